#include "kkflow/conserved.hpp"

#include <cmath>
#include <stdexcept>

namespace kkflow {

Vec3 angular_momentum(const PhaseState& state, double g) {
  double r = norm(state.x);
  if (r <= 0.0) throw DomainError("angular_momentum: r = 0");
  return cross(state.x, state.Pi) - (state.q * g / r) * state.x;
}

Vec3 runge_lenz_radial(const PhaseState& state, double g, double beta) {
  double r = norm(state.x);
  if (r <= 0.0) throw DomainError("runge_lenz_radial: r = 0");
  return cross(state.Pi, angular_momentum(state, g)) + (beta / r) * state.x;
}

ExternalPotential theorem3_potential(double q, double beta, double gamma, double E) {
  ExternalPotential p;
  p.kind = ExternalPotential::Kind::theorem3;
  p.q = q;
  p.beta = beta;
  p.gamma = gamma;
  p.E = E;
  return p;
}

SphereSpec two_center_sphere(const TwoCenterSpec& tc) {
  if (!(tc.m1 > 0.0) || !(tc.m2 > 0.0))
    throw std::invalid_argument("two_center_sphere: masses must be positive");
  if (!(norm(tc.a) > 0.0)) throw std::invalid_argument("two_center_sphere: |a| = 0");
  SphereSpec sp;
  sp.axis = tc.axis();
  if (tc.m1 == tc.m2) {
    sp.median_plane = true;
    sp.rho = 0.0;
    sp.center = Vec3{};
    sp.radius = 0.0;
    return sp;
  }
  double p1 = std::cbrt(tc.m1 * tc.m1), p2 = std::cbrt(tc.m2 * tc.m2);
  sp.rho = (p1 + p2) / (p2 - p1);
  sp.center = sp.rho * tc.a;
  sp.radius = norm(tc.a) * std::sqrt(sp.rho * sp.rho - 1.0);
  return sp;
}

namespace {

// T = m1 (x-a)/|x-a| + m2 (x+a)/|x+a| (the monopole charge vector).
Vec3 charge_vector(const TwoCenterSpec& tc, const Vec3& x) {
  Vec3 d1 = x - tc.a, d2 = x + tc.a;
  double n1 = norm(d1), n2 = norm(d2);
  if (n1 <= 0.0 || n2 <= 0.0) throw DomainError("two_center: on a center");
  return (tc.m1 / n1) * d1 + (tc.m2 / n2) * d2;
}

double two_center_S(const TwoCenterSpec& tc, const Vec3& x) {
  double n1 = norm(x - tc.a), n2 = norm(x + tc.a);
  if (n1 <= 0.0 || n2 <= 0.0) throw DomainError("two_center: on a center");
  return tc.m1 / n1 + tc.m2 / n2;
}

}  // namespace

TwoCenterObservables two_center_observables(const PhaseState& state, const TwoCenterSpec& tc,
                                            double beta) {
  Vec3 ah = tc.axis();
  Vec3 L = cross(state.x, state.Pi);
  Vec3 T = charge_vector(tc, state.x);
  TwoCenterObservables out;
  double La = dot(L, ah);
  out.Ja = La - state.q * dot(T, ah);
  double Pa = dot(state.Pi, ah);
  out.Q = out.Ja * out.Ja + Pa * Pa;
  if (state.q != 0.0) {
    Vec3 Jf = L - state.q * T;
    out.Ka = dot(cross(state.Pi, Jf), ah) + (beta / state.q) * (La - out.Ja);
    out.Ka_valid = true;
  }
  return out;
}

double two_center_effective_potential(const TwoCenterSpec& tc, double q, double beta,
                                      double gamma, const Vec3& x) {
  double S = two_center_S(tc, x);
  return 0.5 * q * q * S * S + beta * S + gamma;
}

// ---- coefficient factories ----

KillingCoefficients angular_momentum_coefficients(const MetricSpec& spec, const Vec3& n,
                                                  double q) {
  Vec3 nn = normalized(n);
  double qg = q * spec.g;
  KillingCoefficients c;
  c.order = 1;
  c.C = [qg, nn](const Vec3& x) { return -qg * dot(nn, x) / norm(x); };
  c.grad_C = [qg, nn](const Vec3& x) {
    double r = norm(x);
    return -qg * (nn / r - (dot(nn, x) / (r * r * r)) * x);
  };
  c.Ci = [spec, nn](const Vec3& x) { return metric_eval(spec, x).f * cross(nn, x); };
  c.grad_Ci = [spec, nn](const Vec3& x) {
    MetricSample s = metric_eval(spec, x);
    Vec3 nx = cross(nn, x);
    Mat3 g{};
    for (int k = 0; k < 3; ++k)
      for (int i = 0; i < 3; ++i) {
        double dnx = 0.0;  // d_k (n cross x)_i = eps_ipk n_p
        for (int p = 0; p < 3; ++p) dnx += levi_civita(i, p, k) * nn[p];
        g[k][i] = s.grad_f[k] * nx[i] + s.f * dnx;
      }
    return g;
  };
  return c;
}

namespace {

Mat3 rl_flat_array(const Vec3& n, const Vec3& x) {
  double nx = dot(n, x);
  Mat3 m{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) m[i][j] = 2.0 * (i == j) * nx - n[i] * x[j] - n[j] * x[i];
  return m;
}

void attach_rl_rank2(KillingCoefficients* c, const MetricSpec& spec, const Vec3& n) {
  c->Cij = [spec, n](const Vec3& x) {
    double f = metric_eval(spec, x).f;
    Mat3 m = rl_flat_array(n, x);
    for (auto& row : m)
      for (double& v : row) v *= f;
    return m;
  };
  c->grad_Cij = [spec, n](const Vec3& x) {
    MetricSample s = metric_eval(spec, x);
    Mat3 m = rl_flat_array(n, x);
    Ten3 g{};
    for (int k = 0; k < 3; ++k)
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
          double dm = 2.0 * (i == j) * n[k] - n[i] * (j == k) - n[j] * (i == k);
          g[k][i][j] = s.grad_f[k] * m[i][j] + s.f * dm;
        }
    return g;
  };
  c->n = n;
}

}  // namespace

KillingCoefficients runge_lenz_coefficients(const MetricSpec& spec, const Vec3& n, double q,
                                            double beta) {
  Vec3 nn = normalized(n);
  double qg = q * spec.g;
  KillingCoefficients c;
  c.order = 2;
  c.C = [beta, nn](const Vec3& x) { return beta * dot(nn, x) / norm(x); };
  c.grad_C = [beta, nn](const Vec3& x) {
    double r = norm(x);
    return beta * (nn / r - (dot(nn, x) / (r * r * r)) * x);
  };
  c.Ci = [spec, nn, qg](const Vec3& x) {
    double r = norm(x);
    return (qg * metric_eval(spec, x).f / r) * cross(nn, x);
  };
  c.grad_Ci = [spec, nn, qg](const Vec3& x) {
    MetricSample s = metric_eval(spec, x);
    double r = norm(x);
    Vec3 nx = cross(nn, x);
    double pref = qg * s.f / r;
    Mat3 g{};
    for (int k = 0; k < 3; ++k) {
      double dpref = qg * (s.grad_f[k] / r - s.f * x[k] / (r * r * r));
      for (int i = 0; i < 3; ++i) {
        double dnx = 0.0;
        for (int p = 0; p < 3; ++p) dnx += levi_civita(i, p, k) * nn[p];
        g[k][i] = dpref * nx[i] + pref * dnx;
      }
    }
    return g;
  };
  attach_rl_rank2(&c, spec, nn);
  return c;
}

KillingCoefficients metric_killing_tensor(const MetricSpec& spec) {
  KillingCoefficients c;
  c.order = 2;
  c.Cij = [spec](const Vec3& x) {
    double f = metric_eval(spec, x).f;
    Mat3 m{};
    for (int i = 0; i < 3; ++i) m[i][i] = f;
    return m;
  };
  c.grad_Cij = [spec](const Vec3& x) {
    MetricSample s = metric_eval(spec, x);
    Ten3 g{};
    for (int k = 0; k < 3; ++k)
      for (int i = 0; i < 3; ++i) g[k][i][i] = s.grad_f[k];
    return g;
  };
  return c;
}

KillingCoefficients two_center_rl_coefficients(const TwoCenterSpec& tc, double q, double beta) {
  Vec3 ah = tc.axis();
  MetricSpec spec = tc.metric();
  KillingCoefficients c;
  c.order = 2;
  c.C = [tc, ah, beta](const Vec3& x) { return beta * dot(charge_vector(tc, x), ah); };
  c.grad_C = [tc, ah, beta](const Vec3& x) {
    Vec3 g{};
    for (const auto& [mass, ctr] : std::initializer_list<std::pair<double, Vec3>>{
             {tc.m1, tc.a}, {tc.m2, -1.0 * tc.a}}) {
      Vec3 d = x - ctr;
      double dn = norm(d);
      // grad of m (d.ah)/|d| = m [ah/|d| - (d.ah) d/|d|^3]
      g += mass * (ah / dn - (dot(d, ah) / (dn * dn * dn)) * d);
    }
    return beta * g;
  };
  c.Ci = [tc, spec, q](const Vec3& x) {
    MetricSample s = metric_eval(spec, x);
    double S = s.f - tc.f0;
    return (q * s.f * S) * cross(tc.axis(), x);
  };
  c.grad_Ci = [tc, spec, q](const Vec3& x) {
    MetricSample s = metric_eval(spec, x);
    double S = s.f - tc.f0;
    Vec3 ah2 = tc.axis();
    Vec3 ax = cross(ah2, x);
    Mat3 g{};
    for (int k = 0; k < 3; ++k) {
      double dpref = q * (s.grad_f[k] * S + s.f * s.grad_f[k]);  // dS = df
      for (int i = 0; i < 3; ++i) {
        double dax = 0.0;
        for (int p = 0; p < 3; ++p) dax += levi_civita(i, p, k) * ah2[p];
        g[k][i] = dpref * ax[i] + q * s.f * S * dax;
      }
    }
    return g;
  };
  attach_rl_rank2(&c, spec, ah);
  return c;
}

KillingCoefficients two_center_ja_coefficients(const TwoCenterSpec& tc, double q) {
  Vec3 ah = tc.axis();
  MetricSpec spec = tc.metric();
  KillingCoefficients c;
  c.order = 1;
  c.C = [tc, ah, q](const Vec3& x) { return -q * dot(charge_vector(tc, x), ah); };
  c.grad_C = [tc, ah, q](const Vec3& x) {
    Vec3 g{};
    for (const auto& [mass, ctr] : std::initializer_list<std::pair<double, Vec3>>{
             {tc.m1, tc.a}, {tc.m2, -1.0 * tc.a}}) {
      Vec3 d = x - ctr;
      double dn = norm(d);
      g += mass * (ah / dn - (dot(d, ah) / (dn * dn * dn)) * d);
    }
    return -q * g;
  };
  c.Ci = [spec, ah](const Vec3& x) { return metric_eval(spec, x).f * cross(ah, x); };
  c.grad_Ci = [spec, ah](const Vec3& x) {
    MetricSample s = metric_eval(spec, x);
    Vec3 ax = cross(ah, x);
    Mat3 g{};
    for (int k = 0; k < 3; ++k)
      for (int i = 0; i < 3; ++i) {
        double dax = 0.0;
        for (int p = 0; p < 3; ++p) dax += levi_civita(i, p, k) * ah[p];
        g[k][i] = s.grad_f[k] * ax[i] + s.f * dax;
      }
    return g;
  };
  return c;
}

// ---- lifts ----

double LiftedTensor::quadratic_form(const Vec3& x, std::span<const double> p) const {
  auto comp = components(x);
  double k = 0.0;
  for (int mu = 0; mu < dim; ++mu)
    for (int nu = 0; nu < dim; ++nu) k += comp[mu][nu] * p[mu] * p[nu];
  return 0.5 * k;
}

LiftedTensor lift_killing_stackel(const KillingCoefficients& coeffs, const MetricSpec& spec,
                                  double q, GaugeField A) {
  if (q == 0.0) throw std::invalid_argument("lift_killing_stackel: q = 0");
  GaugeField gauge = A ? std::move(A) : [spec](const Vec3& x) { return gauge_potential(spec, x); };
  LiftedTensor out;
  out.dim = 4;
  out.components = [coeffs, spec, q, gauge](const Vec3& x) {
    double f = metric_eval(spec, x).f;
    Vec3 Ak = gauge(x);
    double c0 = coeffs.eval_C(x);
    Vec3 ci = coeffs.eval_Ci(x) / f;     // flat array
    Mat3 cij = coeffs.eval_Cij(x);       // flat array after /f
    for (auto& row : cij)
      for (double& v : row) v /= f;
    std::array<std::array<double, 5>, 5> comp{};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) comp[i][j] = cij[i][j];
    for (int i = 0; i < 3; ++i) {
      double v = ci[i] / q;
      for (int k = 0; k < 3; ++k) v -= cij[i][k] * Ak[k];
      comp[i][3] = comp[3][i] = v;
    }
    double v44 = 2.0 * c0 / (q * q) - 2.0 * dot(ci, Ak) / q;
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) v44 += cij[j][k] * Ak[j] * Ak[k];
    comp[3][3] = v44;
    return comp;
  };
  return out;
}

LiftedTensor bargmann_kepler_tensor(const Vec3& n, std::function<double(double)> V) {
  LiftedTensor out;
  out.dim = 5;
  Vec3 nn = n;
  out.components = [nn, V](const Vec3& x) {
    double r = norm(x);
    if (r <= 0.0) throw DomainError("bargmann_kepler_tensor: r = 0");
    double eta = dot(nn, x);
    std::array<std::array<double, 5>, 5> comp{};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        comp[i][j] = 2.0 * eta * (i == j) - nn[i] * x[j] - nn[j] * x[i];
    comp[3][3] = 2.0 * eta * V(r);
    return comp;
  };
  return out;
}

double bargmann_rl_scalar(const Vec3& n, const Vec3& x, const Vec3& p, double mass,
                          const std::function<double(double)>& V) {
  double r = norm(x);
  if (r <= 0.0) throw DomainError("bargmann_rl_scalar: r = 0");
  Vec3 L = cross(x, p);
  return dot(cross(p, L) + (mass * mass * V(r)) * x, n);
}

// ---- observable registry ----

Observable make_observable(const std::string& name, const ObservableContext& ctx) {
  Observable o;
  o.name = name;
  if (name == "H") {
    MetricSpec spec = ctx.spec;
    o.eval = [spec](const PhaseState& s) { return hamiltonian(s, spec); };
  } else if (name == "q") {
    o.eval = [](const PhaseState& s) { return s.q; };
  } else if (name == "Jx" || name == "Jy" || name == "Jz") {
    int k = name[1] == 'x' ? 0 : (name[1] == 'y' ? 1 : 2);
    double g = ctx.g;
    o.scale_group = "J";
    o.eval = [g, k](const PhaseState& s) { return angular_momentum(s, g)[k]; };
  } else if (name == "Kx" || name == "Ky" || name == "Kz") {
    int k = name[1] == 'x' ? 0 : (name[1] == 'y' ? 1 : 2);
    double g = ctx.g, beta = ctx.beta;
    o.scale_group = "K";
    o.eval = [g, beta, k](const PhaseState& s) { return runge_lenz_radial(s, g, beta)[k]; };
  } else if (name == "Ja") {
    TwoCenterSpec tc = ctx.tc;
    double beta = ctx.beta;
    o.eval = [tc, beta](const PhaseState& s) { return two_center_observables(s, tc, beta).Ja; };
  } else if (name == "Q2") {
    TwoCenterSpec tc = ctx.tc;
    double beta = ctx.beta;
    o.eval = [tc, beta](const PhaseState& s) { return two_center_observables(s, tc, beta).Q; };
  } else if (name == "Ka") {
    TwoCenterSpec tc = ctx.tc;
    double beta = ctx.beta;
    o.eval = [tc, beta](const PhaseState& s) {
      auto obs = two_center_observables(s, tc, beta);
      if (!obs.Ka_valid) throw std::invalid_argument("Ka requires q != 0");
      return obs.Ka;
    };
  } else if (name == "KBn") {
    Vec3 n = ctx.bargmann_n;
    double k = ctx.kepler_k;
    o.eval = [n, k](const PhaseState& s) {
      return bargmann_rl_scalar(n, s.x, s.Pi, 1.0, [k](double r) { return -k / r; });
    };
  } else {
    throw std::invalid_argument("unknown observable: " + name);
  }
  return o;
}

std::vector<Observable> make_observables(const std::vector<std::string>& names,
                                         const ObservableContext& ctx) {
  std::vector<Observable> out;
  out.reserve(names.size());
  for (const auto& n : names) out.push_back(make_observable(n, ctx));
  return out;
}

}  // namespace kkflow
