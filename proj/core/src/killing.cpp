#include "kkflow/killing.hpp"

#include <algorithm>
#include <cmath>

namespace kkflow {

namespace {

double fd_step(const Vec3& x) { return 1e-5 * std::max(1.0, norm(x)); }

Vec3 grad_of_scalar(const KillingCoefficients& c, const Vec3& x) {
  if (c.grad_C) return c.grad_C(x);
  if (!c.C) return Vec3{};
  double h = fd_step(x);
  Vec3 g;
  for (int k = 0; k < 3; ++k) {
    Vec3 xp = x, xm = x;
    xp[k] += h;
    xm[k] -= h;
    g[k] = (c.C(xp) - c.C(xm)) / (2.0 * h);
  }
  return g;
}

Mat3 grad_of_vector(const KillingCoefficients& c, const Vec3& x) {
  if (c.grad_Ci) return c.grad_Ci(x);
  Mat3 g{};
  if (!c.Ci) return g;
  double h = fd_step(x);
  for (int k = 0; k < 3; ++k) {
    Vec3 xp = x, xm = x;
    xp[k] += h;
    xm[k] -= h;
    Vec3 vp = c.Ci(xp), vm = c.Ci(xm);
    for (int i = 0; i < 3; ++i) g[k][i] = (vp[i] - vm[i]) / (2.0 * h);
  }
  return g;
}

Ten3 grad_of_matrix(const KillingCoefficients& c, const Vec3& x) {
  if (c.grad_Cij) return c.grad_Cij(x);
  Ten3 g{};
  if (!c.Cij) return g;
  double h = fd_step(x);
  for (int k = 0; k < 3; ++k) {
    Vec3 xp = x, xm = x;
    xp[k] += h;
    xm[k] -= h;
    Mat3 mp = c.Cij(xp), mm = c.Cij(xm);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) g[k][i][j] = (mp[i][j] - mm[i][j]) / (2.0 * h);
  }
  return g;
}

}  // namespace

double ConstraintResiduals::worst() const {
  return std::max(std::max(order0, order1), std::max(order2, order3));
}

double rank1_rotation_condition(const MetricSpec& spec, const Vec3& n, const Vec3& x) {
  MetricSample s = metric_eval(spec, x);
  return std::abs(dot(cross(n, s.grad_f), x));
}

RlCondition rank2_rl_condition(const MetricSpec& spec, const Vec3& n, const Vec3& x) {
  MetricSample s = metric_eval(spec, x);
  Vec3 v = cross(n, cross(x, s.grad_f));
  return {v, norm(v)};
}

namespace {

// Textbook D_i C_j = d_i C_j - Gamma^m_ij C_m on the stored lower field.
Mat3 covariant_rank1(const KillingCoefficients& c, const MetricSample& s, const Vec3& x) {
  Mat3 d = grad_of_vector(c, x);
  Vec3 ci = c.eval_Ci(x);
  ChristoffelSample ch = christoffel(s);
  Mat3 out{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double v = d[i][j];
      for (int m = 0; m < 3; ++m) v -= ch.gamma[m][i][j] * ci[m];
      out[i][j] = v;
    }
  return out;
}

// Textbook D_k C_ij = d_k C_ij - Gamma^m_ki C_mj - Gamma^m_kj C_im.
Ten3 covariant_rank2(const KillingCoefficients& c, const MetricSample& s, const Vec3& x) {
  Ten3 d = grad_of_matrix(c, x);
  Mat3 cij = c.eval_Cij(x);
  ChristoffelSample ch = christoffel(s);
  Ten3 out{};
  for (int k = 0; k < 3; ++k)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double v = d[k][i][j];
        for (int m = 0; m < 3; ++m)
          v -= ch.gamma[m][k][i] * cij[m][j] + ch.gamma[m][k][j] * cij[i][m];
        out[k][i][j] = v;
      }
  return out;
}

// Paper-scheme symmetrized derivative of the n-structured rank-2 tensor:
// closed form sum_cyc [ delta_ij d_l f (n.x) - delta_ij x_l (n.grad f) ].
Ten3 rl_symmetrized_derivative(const Vec3& n, const MetricSample& s, const Vec3& x) {
  double nx = dot(n, x);
  double ngf = dot(n, s.grad_f);
  Ten3 out{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int l = 0; l < 3; ++l) {
        double v = 0.0;
        const int idx[3][3] = {{i, j, l}, {j, l, i}, {l, i, j}};
        for (const auto& p : idx)
          if (p[0] == p[1]) v += s.grad_f[p[2]] * nx - x[p[2]] * ngf;
        out[i][j][l] = v;
      }
  return out;
}

}  // namespace

double symmetrized_covariant_derivative(const KillingCoefficients& coeffs,
                                        const MetricSpec& spec, const Vec3& x, int rank) {
  MetricSample s = metric_eval(spec, x);
  if (rank == 1) {
    Mat3 d = covariant_rank1(coeffs, s, x);
    double r = 0.0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) r = std::max(r, std::abs(0.5 * (d[i][j] + d[j][i])));
    return r;
  }
  if (rank == 2) {
    if (coeffs.n) return max_abs(rl_symmetrized_derivative(*coeffs.n, s, x));
    Ten3 d = covariant_rank2(coeffs, s, x);
    double r = 0.0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        for (int l = 0; l < 3; ++l)
          r = std::max(r, std::abs(d[i][j][l] + d[j][l][i] + d[l][i][j]));
    return r;
  }
  throw std::invalid_argument("symmetrized_covariant_derivative: rank must be 1 or 2");
}

ConstraintResiduals van_holten_residuals(const KillingCoefficients& coeffs,
                                         const MetricSpec& spec,
                                         const EffectivePotential& pot, double q,
                                         const Vec3& x) {
  MetricSample s = metric_eval(spec, x);
  FieldSample fld = magnetic_field(spec, x);
  Vec3 dG = pot.grad_fw(spec, x);
  const double f = s.f;

  Vec3 ci = coeffs.eval_Ci(x);
  Mat3 cij = coeffs.eval_Cij(x);
  Ten3 cijk = coeffs.eval_Cijk(x);
  Vec3 dC = grad_of_scalar(coeffs, x);

  ConstraintResiduals res;

  // order 0: C^m d_m G, metric-raised.
  res.order0 = std::abs(dot(ci, dG)) / f;

  // order 1: d_n C - q F_nm C^m - C_n^m d_m G, metric-raised.
  for (int n = 0; n < 3; ++n) {
    double v = dC[n];
    for (int m = 0; m < 3; ++m) v -= q * fld.F[n][m] * ci[m] / f + cij[n][m] * dG[m] / f;
    res.order1 = std::max(res.order1, std::abs(v));
  }

  // order 2: (D_i C_l + D_l C_i) - q (F_im C_l^m + F_lm C_i^m) - C_il^k d_k G,
  // covariant LHS, flat-raised magnetic and potential mixed tensors.
  Mat3 Dci = covariant_rank1(coeffs, s, x);
  for (int i = 0; i < 3; ++i)
    for (int l = 0; l < 3; ++l) {
      double v = Dci[i][l] + Dci[l][i];
      for (int m = 0; m < 3; ++m)
        v -= q * (fld.F[i][m] * cij[l][m] + fld.F[l][m] * cij[i][m]) + cijk[i][l][m] * dG[m];
      res.order2 = std::max(res.order2, std::abs(v));
    }

  // order 3: symmetrized derivative of C_ij minus the magnetic rank-3 terms
  // (C_ijkl = 0). The symmetrized derivative follows the paper's scheme for
  // n-structured tensors, f * sum_cyc d_i (C_jl/f) otherwise.
  Ten3 sym3{};
  if (coeffs.n && coeffs.Cij) {
    sym3 = rl_symmetrized_derivative(*coeffs.n, s, x);
  } else if (coeffs.Cij) {
    Ten3 d = grad_of_matrix(coeffs, x);
    Ten3 dA{};
    for (int k = 0; k < 3; ++k)
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
          dA[k][i][j] = (d[k][i][j] - cij[i][j] * s.grad_f[k] / f);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        for (int l = 0; l < 3; ++l) sym3[i][j][l] = dA[i][j][l] + dA[j][l][i] + dA[l][i][j];
  }
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int l = 0; l < 3; ++l) {
        double v = sym3[i][j][l];
        const int idx[3][3] = {{i, j, l}, {j, l, i}, {l, i, j}};
        for (const auto& p : idx)
          for (int m = 0; m < 3; ++m) v -= q * fld.F[p[0]][m] * cijk[p[1]][p[2]][m];
        res.order3 = std::max(res.order3, std::abs(v));
      }
  return res;
}

namespace {

// 5-point second-derivative stencil, 4th order.
double stencil_d2(const std::function<double(double)>& fn, double h) {
  return (-fn(2 * h) + 16 * fn(h) - 30 * fn(0) + 16 * fn(-h) - fn(-2 * h)) / (12 * h * h);
}

}  // namespace

double laplace_obstruction(const EffectivePotential& pot, const MetricSpec& spec, double q,
                           double g, const Vec3& x) {
  if (pot.kind == EffectivePotential::Kind::radial_coulomb) {
    // phi = fW - q^2 g^2/2r^2 = beta/r + const; Delta = phi'' + 2 phi'/r.
    double r = norm(x);
    if (r < spec.r_min) throw DomainError("laplace_obstruction: r < r_min");
    double d1 = -pot.beta / (r * r);
    double d2 = 2.0 * pot.beta / (r * r * r);
    return d2 + 2.0 * d1 / r;
  }

  auto subtracted = [&](const Vec3& p) {
    double v = pot.fw(spec, p);
    if (pot.kind == EffectivePotential::Kind::two_center &&
        spec.kind == MetricKind::multicenter) {
      for (const auto& c : spec.centers) {
        double d = norm(p - c.pos);
        v -= 0.5 * q * q * c.mass * c.mass / (d * d);
      }
    } else {
      double r = norm(p);
      v -= 0.5 * q * q * g * g / (r * r);
    }
    return v;
  };

  double h = 1e-3 * std::max(1.0, norm(x));
  double lap = 0.0;
  for (int k = 0; k < 3; ++k) {
    lap += stencil_d2(
        [&](double d) {
          Vec3 p = x;
          p[k] += d;
          return subtracted(p);
        },
        h);
  }
  return lap;
}

}  // namespace kkflow
