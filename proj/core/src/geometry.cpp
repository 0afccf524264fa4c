#include "kkflow/geometry.hpp"

#include <cmath>
#include <limits>

namespace kkflow {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

[[noreturn]] void domain_fail(const std::string& what) { throw DomainError(what); }

// Central-difference step for custom fields.
double fd_step(const Vec3& x) { return 1e-5 * std::max(1.0, norm(x)); }

struct Radial {
  double v = 0.0;   // value
  double d1 = 0.0;  // d/dr
  double d2 = 0.0;  // d^2/dr^2
};

}  // namespace

ExternalPotential ExternalPotential::constant(double u) {
  ExternalPotential p;
  p.kind = Kind::constant;
  p.u0 = u;
  return p;
}

ExternalPotential ExternalPotential::coulomb(double k) {
  ExternalPotential p;
  p.kind = Kind::coulomb;
  p.k = k;
  return p;
}

ExternalPotential ExternalPotential::custom(std::function<double(const Vec3&)> f) {
  ExternalPotential p;
  p.kind = Kind::custom;
  p.fn = std::move(f);
  return p;
}

MetricSpec MetricSpec::taub_nut(double m) {
  MetricSpec s;
  s.kind = MetricKind::taub_nut;
  s.m = m;
  s.g = 4.0 * m;
  return s;
}

MetricSpec MetricSpec::lee_lee(double m, double a0) {
  MetricSpec s = taub_nut(m);
  s.kind = MetricKind::lee_lee;
  s.a0 = a0;
  return s;
}

MetricSpec MetricSpec::winding_string(double u0) {
  MetricSpec s;
  s.kind = MetricKind::winding_string;
  s.g = 1.0;
  if (u0 != 0.0) s.U = ExternalPotential::constant(u0);
  return s;
}

MetricSpec MetricSpec::extended_taub_nut(double a, double b, double c, double d) {
  MetricSpec s;
  s.kind = MetricKind::extended_taub_nut;
  s.ea = a;
  s.eb = b;
  s.ec = c;
  s.ed = d;
  s.g = 1.0;
  return s;
}

MetricSpec MetricSpec::multicenter(double f0, std::vector<Center> centers) {
  MetricSpec s;
  s.kind = MetricKind::multicenter;
  s.f0 = f0;
  s.centers = std::move(centers);
  return s;
}

MetricSpec MetricSpec::two_center(double m1, double m2, const Vec3& a, double f0) {
  return multicenter(f0, {{m1, a}, {m2, -1.0 * a}});
}

MetricSpec MetricSpec::flat_kepler(double coulomb_k) {
  MetricSpec s;
  s.kind = MetricKind::flat_kepler;
  if (coulomb_k != 0.0) s.U = ExternalPotential::coulomb(coulomb_k);
  return s;
}

MetricSpec MetricSpec::custom(std::function<double(const Vec3&)> f,
                              std::function<double(const Vec3&)> h,
                              std::function<double(const Vec3&)> U) {
  MetricSpec s;
  s.kind = MetricKind::custom;
  s.custom_f = std::move(f);
  s.custom_h = std::move(h);
  s.custom_U = std::move(U);
  return s;
}

double MetricSpec::domain_distance(const Vec3& x) const {
  switch (kind) {
    case MetricKind::taub_nut:
    case MetricKind::lee_lee: {
      double r = norm(x);
      // f = 1 + 4m/r crosses zero at r = -4m for m < 0.
      if (m < 0.0) return r - (-4.0 * m);
      return r;
    }
    case MetricKind::extended_taub_nut:
      return norm(x);
    case MetricKind::winding_string:
      return norm(x) - 1.0;
    case MetricKind::multicenter: {
      double d = kInf;
      for (const auto& c : centers) d = std::min(d, norm(x - c.pos));
      return d;
    }
    case MetricKind::flat_kepler:
      return U.kind == ExternalPotential::Kind::coulomb ? norm(x) : kInf;
    case MetricKind::custom:
      return kInf;
  }
  return kInf;
}

namespace {

Radial radial_f(const MetricSpec& s, double r) {
  switch (s.kind) {
    case MetricKind::taub_nut:
    case MetricKind::lee_lee:
      return {1.0 + 4.0 * s.m / r, -4.0 * s.m / (r * r), 8.0 * s.m / (r * r * r)};
    case MetricKind::winding_string:
      return {1.0, 0.0, 0.0};
    case MetricKind::extended_taub_nut:
      return {s.eb + s.ea / r, -s.ea / (r * r), 2.0 * s.ea / (r * r * r)};
    case MetricKind::flat_kepler:
      return {1.0, 0.0, 0.0};
    default:
      break;
  }
  domain_fail("radial_f: not a radial kind");
}

Radial radial_h(const MetricSpec& s, double r) {
  switch (s.kind) {
    case MetricKind::taub_nut:
    case MetricKind::lee_lee: {
      Radial f = radial_f(s, r);
      double h = 1.0 / f.v;
      double h1 = -f.d1 / (f.v * f.v);
      double h2 = (2.0 * f.d1 * f.d1 - f.v * f.d2) / (f.v * f.v * f.v);
      return {h, h1, h2};
    }
    case MetricKind::winding_string: {
      double w = 1.0 - 1.0 / r;  // h = w^-2
      double w1 = 1.0 / (r * r);
      double w2 = -2.0 / (r * r * r);
      double h = 1.0 / (w * w);
      double h1 = -2.0 * w1 / (w * w * w);
      double h2 = (6.0 * w1 * w1 - 2.0 * w * w2) / (w * w * w * w);
      return {h, h1, h2};
    }
    case MetricKind::extended_taub_nut: {
      double num = s.ea * r + s.eb * r * r, num1 = s.ea + 2.0 * s.eb * r, num2 = 2.0 * s.eb;
      double den = 1.0 + s.ed * r + s.ec * r * r, den1 = s.ed + 2.0 * s.ec * r, den2 = 2.0 * s.ec;
      double h = num / den;
      double h1 = (num1 * den - num * den1) / (den * den);
      double h2 = (num2 * den * den - 2.0 * num1 * den1 * den - num * den2 * den +
                   2.0 * num * den1 * den1) /
                  (den * den * den);
      return {h, h1, h2};
    }
    case MetricKind::flat_kepler:
      return {1.0, 0.0, 0.0};
    default:
      break;
  }
  domain_fail("radial_h: not a radial kind");
}

// U(r) and dU/dr for the attached external potential; radial kinds only.
Radial radial_U(const MetricSpec& s, double r) {
  const ExternalPotential& p = s.U;
  switch (p.kind) {
    case ExternalPotential::Kind::zero:
      if (s.kind == MetricKind::lee_lee) {
        Radial f = radial_f(s, r);
        double u = 0.5 * s.a0 * s.a0 / f.v;
        double u1 = -0.5 * s.a0 * s.a0 * f.d1 / (f.v * f.v);
        return {u, u1, 0.0};
      }
      return {0.0, 0.0, 0.0};
    case ExternalPotential::Kind::constant:
      return {p.u0, 0.0, 0.0};
    case ExternalPotential::Kind::coulomb:
      return {-p.k / r, p.k / (r * r), -2.0 * p.k / (r * r * r)};
    case ExternalPotential::Kind::theorem3: {
      // U = (q^2 g^2/2r^2 + beta/r + gamma)/f - q^2/2h + E
      Radial f = radial_f(s, r), h = radial_h(s, r);
      double qg = p.q * s.g;
      double P = 0.5 * qg * qg / (r * r) + p.beta / r + p.gamma;
      double P1 = -qg * qg / (r * r * r) - p.beta / (r * r);
      double u = P / f.v - 0.5 * p.q * p.q / h.v + p.E;
      double u1 = P1 / f.v - P * f.d1 / (f.v * f.v) + 0.5 * p.q * p.q * h.d1 / (h.v * h.v);
      return {u, u1, 0.0};
    }
    default:
      break;
  }
  domain_fail("radial_U: unsupported potential kind for a radial metric");
}

void eval_multicenter(const MetricSpec& s, const Vec3& x, MetricSample* out) {
  double f = s.f0;
  Vec3 gf{};
  for (const auto& c : s.centers) {
    Vec3 d = x - c.pos;
    double dn = norm(d);
    if (dn < s.r_min) domain_fail("metric_eval: within r_min of a center");
    f += c.mass / dn;
    gf -= c.mass / (dn * dn * dn) * d;
  }
  if (f <= 0.0) domain_fail("metric_eval: f <= 0");
  out->f = f;
  out->grad_f = gf;
  out->laplacian_f = 0.0;  // harmonic away from centers
  out->h = 1.0 / f;        // Gibbons-Hawking self-dual form
  out->grad_h = -1.0 / (f * f) * gf;

  const ExternalPotential& p = s.U;
  switch (p.kind) {
    case ExternalPotential::Kind::zero:
      out->U = 0.0;
      out->grad_U = Vec3{};
      break;
    case ExternalPotential::Kind::constant:
      out->U = p.u0;
      out->grad_U = Vec3{};
      break;
    case ExternalPotential::Kind::theorem3_two_center: {
      // fW = q^2/2 S^2 + beta S + gamma + E with S = f - f0;
      // U = (fW - E)/f + E - q^2/2h, and here q^2/2h = q^2 f / 2.
      double S = f - s.f0;
      double G = 0.5 * p.q * p.q * S * S + p.beta * S + p.gamma + p.E;
      Vec3 gG = (p.q * p.q * S + p.beta) * gf;
      out->U = (G - p.E) / f + p.E - 0.5 * p.q * p.q * f;
      out->grad_U = gG / f - (G - p.E) / (f * f) * gf - 0.5 * p.q * p.q * gf;
      break;
    }
    case ExternalPotential::Kind::custom: {
      double hstep = fd_step(x);
      out->U = p.fn(x);
      for (int k = 0; k < 3; ++k) {
        Vec3 xp = x, xm = x;
        xp[k] += hstep;
        xm[k] -= hstep;
        out->grad_U[k] = (p.fn(xp) - p.fn(xm)) / (2.0 * hstep);
      }
      break;
    }
    default:
      domain_fail("metric_eval: unsupported potential kind for multicenter");
  }
}

void eval_custom(const MetricSpec& s, const Vec3& x, MetricSample* out) {
  double hstep = fd_step(x);
  auto grad_lap = [&](const std::function<double(const Vec3&)>& fn, double* v, Vec3* g,
                      double* lap) {
    *v = fn(x);
    double l = 0.0;
    for (int k = 0; k < 3; ++k) {
      Vec3 xp = x, xm = x;
      xp[k] += hstep;
      xm[k] -= hstep;
      double fp = fn(xp), fm = fn(xm);
      (*g)[k] = (fp - fm) / (2.0 * hstep);
      l += (fp - 2.0 * (*v) + fm) / (hstep * hstep);
    }
    if (lap) *lap = l;
  };
  grad_lap(s.custom_f, &out->f, &out->grad_f, &out->laplacian_f);
  if (out->f <= 0.0) domain_fail("metric_eval: f <= 0");
  if (s.custom_h) {
    grad_lap(s.custom_h, &out->h, &out->grad_h, nullptr);
  } else {
    out->h = 1.0;
    out->grad_h = Vec3{};
  }
  if (out->h <= 0.0) domain_fail("metric_eval: h <= 0");
  if (s.custom_U) {
    double lap;
    grad_lap(s.custom_U, &out->U, &out->grad_U, &lap);
  } else {
    out->U = 0.0;
    out->grad_U = Vec3{};
  }
}

}  // namespace

MetricSample metric_eval(const MetricSpec& spec, const Vec3& x) {
  MetricSample out;
  if (spec.kind == MetricKind::multicenter) {
    eval_multicenter(spec, x, &out);
    return out;
  }
  if (spec.kind == MetricKind::custom) {
    eval_custom(spec, x, &out);
    return out;
  }

  double r = norm(x);
  if (spec.domain_distance(x) < spec.r_min)
    domain_fail("metric_eval: within r_min of a singular locus");

  Radial f = radial_f(spec, r), h = radial_h(spec, r);
  if (f.v <= 0.0) domain_fail("metric_eval: f <= 0");
  if (h.v <= 0.0) domain_fail("metric_eval: h <= 0");
  Radial u = radial_U(spec, r);

  // Regular kinds (flat f, h, U) are evaluable at the origin, where every
  // radial derivative vanishes; singular kinds were excluded above.
  Vec3 rhat = r > 0.0 ? x / r : Vec3{};
  out.f = f.v;
  out.grad_f = f.d1 * rhat;
  out.laplacian_f = r > 0.0 ? f.d2 + 2.0 * f.d1 / r : 0.0;
  out.h = h.v;
  out.grad_h = h.d1 * rhat;
  out.U = u.v;
  out.grad_U = u.d1 * rhat;
  return out;
}

ChristoffelSample christoffel(const MetricSample& sample) {
  if (sample.f <= 0.0) throw DomainError("christoffel: f <= 0");
  ChristoffelSample out;
  const double inv2f = 0.5 / sample.f;
  for (int k = 0; k < 3; ++k)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double v = 0.0;
        if (k == i) v += sample.grad_f[j];
        if (k == j) v += sample.grad_f[i];
        if (i == j) v -= sample.grad_f[k];
        out.gamma[k][i][j] = inv2f * v;
      }
  return out;
}

FieldSample magnetic_field(const MetricSpec& spec, const Vec3& x) {
  FieldSample out;
  if (spec.kind == MetricKind::multicenter) {
    for (const auto& c : spec.centers) {
      Vec3 d = x - c.pos;
      double dn = norm(d);
      if (dn < spec.r_min) throw DomainError("magnetic_field: within r_min of a center");
      out.B += c.mass / (dn * dn * dn) * d;
    }
  } else if (spec.g != 0.0) {
    double r = norm(x);
    if (r < spec.r_min) throw DomainError("magnetic_field: within r_min of the origin");
    out.B = spec.g / (r * r * r) * x;
  }
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double v = 0.0;
      for (int k = 0; k < 3; ++k) v += levi_civita(i, j, k) * out.B[k];
      out.F[i][j] = v;
    }
  return out;
}

namespace {

// A for one monopole of charge g at the origin, string gauge A_phi = -g cos(theta):
// A = -g z/(r rho^2) * (-y, x, 0), rho^2 = x^2 + y^2.
Vec3 dirac_potential(double g, const Vec3& x, double r_min) {
  double rho2 = x.x * x.x + x.y * x.y;
  double r = norm(x);
  if (r < r_min) throw DomainError("gauge_potential: within r_min of a center");
  if (rho2 < 1e-24 * std::max(1.0, r * r))
    throw GaugeStringError("gauge_potential: point on the Dirac string (z axis)");
  double c = -g * x.z / (r * rho2);
  return {-c * x.y, c * x.x, 0.0};
}

}  // namespace

Vec3 gauge_potential(const MetricSpec& spec, const Vec3& x) {
  if (spec.kind == MetricKind::multicenter) {
    Vec3 A{};
    for (const auto& c : spec.centers) A += dirac_potential(c.mass, x - c.pos, spec.r_min);
    return A;
  }
  if (spec.g == 0.0) return Vec3{};
  return dirac_potential(spec.g, x, spec.r_min);
}

}  // namespace kkflow
