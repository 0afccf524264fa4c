// Test-only finite-difference oracles. These use only metric_eval(...).f/h/U
// values at shifted points, staying independent of the production derivative
// paths they cross-check.
#pragma once

#include <cmath>
#include <functional>
#include <random>

#include "kkflow/geometry.hpp"

namespace kkflow::test {

inline double oracle_step(const Vec3& x) { return 1e-5 * std::max(1.0, norm(x)); }

inline Vec3 fd_grad(const std::function<double(const Vec3&)>& fn, const Vec3& x) {
  double h = oracle_step(x);
  Vec3 g;
  for (int k = 0; k < 3; ++k) {
    Vec3 xp = x, xm = x;
    xp[k] += h;
    xm[k] -= h;
    g[k] = (fn(xp) - fn(xm)) / (2.0 * h);
  }
  return g;
}

// Second derivatives balance truncation against cancellation at a larger step.
inline double fd_laplacian(const std::function<double(const Vec3&)>& fn, const Vec3& x) {
  double h = 1e-4 * std::max(1.0, norm(x));
  double c = fn(x), s = 0.0;
  for (int k = 0; k < 3; ++k) {
    Vec3 xp = x, xm = x;
    xp[k] += h;
    xm[k] -= h;
    s += (fn(xp) - 2.0 * c + fn(xm)) / (h * h);
  }
  return s;
}

// Gamma^k_ij from finite differences of g_ij = f delta_ij values alone.
inline Ten3 fd_christoffel(const MetricSpec& spec, const Vec3& x) {
  auto fval = [&](const Vec3& p) { return metric_eval(spec, p).f; };
  double f = fval(x);
  Vec3 df = fd_grad(fval, x);
  Ten3 out{};
  for (int k = 0; k < 3; ++k)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        // 1/2 g^{kl} (d_i g_lj + d_j g_il - d_l g_ij), g = f delta
        double v = 0.0;
        if (k == j) v += df[i];
        if (k == i) v += df[j];
        if (i == j) v -= df[k];
        out[k][i][j] = 0.5 * v / f;
      }
  return out;
}

inline Vec3 fd_curl(const std::function<Vec3(const Vec3&)>& fn, const Vec3& x) {
  double h = oracle_step(x);
  Mat3 d{};  // d[k][i] = d_k A_i
  for (int k = 0; k < 3; ++k) {
    Vec3 xp = x, xm = x;
    xp[k] += h;
    xm[k] -= h;
    Vec3 vp = fn(xp), vm = fn(xm);
    for (int i = 0; i < 3; ++i) d[k][i] = (vp[i] - vm[i]) / (2.0 * h);
  }
  return {d[1][2] - d[2][1], d[2][0] - d[0][2], d[0][1] - d[1][0]};
}

inline double fd_divergence(const std::function<Vec3(const Vec3&)>& fn, const Vec3& x) {
  double h = oracle_step(x);
  double s = 0.0;
  for (int k = 0; k < 3; ++k) {
    Vec3 xp = x, xm = x;
    xp[k] += h;
    xm[k] -= h;
    s += (fn(xp)[k] - fn(xm)[k]) / (2.0 * h);
  }
  return s;
}

inline Vec3 random_direction(std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Vec3 v{nd(rng), nd(rng), nd(rng)};
  return v / norm(v);
}

// Random point in a radial shell, at least `margin` from singular loci.
inline Vec3 random_domain_point(const MetricSpec& spec, std::mt19937_64& rng, double lo = 0.8,
                                double hi = 6.0, double margin = 0.5) {
  std::uniform_real_distribution<double> ur(0.0, 1.0);
  for (int tries = 0; tries < 1000; ++tries) {
    Vec3 x = (lo + (hi - lo) * ur(rng)) * random_direction(rng);
    if (spec.domain_distance(x) > margin) return x;
  }
  throw std::runtime_error("random_domain_point: no admissible point found");
}

}  // namespace kkflow::test
