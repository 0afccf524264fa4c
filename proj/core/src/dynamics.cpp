#include "kkflow/dynamics.hpp"

#include <cmath>

namespace kkflow {

double hamiltonian(const PhaseState& state, const MetricSpec& spec) {
  MetricSample s = metric_eval(spec, state.x);
  return 0.5 * norm2(state.Pi) / s.f + 0.5 * state.q * state.q / s.h + s.U;
}

EomRhs eom_rhs(const PhaseState& state, const MetricSpec& spec) {
  MetricSample s = metric_eval(spec, state.x);
  Vec3 v = state.Pi / s.f;

  // dV = -q^2/(2h^2) dh + dU
  Vec3 dV = -0.5 * state.q * state.q / (s.h * s.h) * s.grad_h + s.grad_U;

  // Gamma^k_ij Pi_k v^j = (1/2f)[Pi (v.df) + df (Pi.v) - v (Pi.df)]
  Vec3 curv = (state.Pi * dot(v, s.grad_f) + s.grad_f * dot(state.Pi, v) -
               v * dot(state.Pi, s.grad_f)) /
              (2.0 * s.f);

  FieldSample fs = magnetic_field(spec, state.x);
  Vec3 lorentz = state.q * cross(v, fs.B);  // q F_ij v^j

  return {v, lorentz - dV + curv};
}

namespace {

Vec3 obs_grad_x(const Observable& o, const PhaseState& st) {
  if (o.grad_x) return o.grad_x(st);
  double h = 1e-6 * std::max(1.0, norm(st.x));
  Vec3 g;
  for (int k = 0; k < 3; ++k) {
    PhaseState p = st, m = st;
    p.x[k] += h;
    m.x[k] -= h;
    g[k] = (o.eval(p) - o.eval(m)) / (2.0 * h);
  }
  return g;
}

Vec3 obs_grad_Pi(const Observable& o, const PhaseState& st) {
  if (o.grad_Pi) return o.grad_Pi(st);
  double h = 1e-6 * std::max(1.0, norm(st.Pi));
  Vec3 g;
  for (int k = 0; k < 3; ++k) {
    PhaseState p = st, m = st;
    p.Pi[k] += h;
    m.Pi[k] -= h;
    g[k] = (o.eval(p) - o.eval(m)) / (2.0 * h);
  }
  return g;
}

}  // namespace

double poisson_bracket(const Observable& a, const Observable& b, const PhaseState& state,
                       const MetricSpec& spec) {
  Vec3 ax = obs_grad_x(a, state), api = obs_grad_Pi(a, state);
  Vec3 bx = obs_grad_x(b, state), bpi = obs_grad_Pi(b, state);
  FieldSample fs = magnetic_field(spec, state.x);
  double mag = 0.0;
  for (int k = 0; k < 3; ++k)
    for (int l = 0; l < 3; ++l) mag += fs.F[k][l] * api[k] * bpi[l];
  return dot(ax, bpi) - dot(api, bx) + state.q * mag;
}

EffectivePotential EffectivePotential::from_metric(double q, double E) {
  EffectivePotential p;
  p.kind = Kind::metric;
  p.q = q;
  p.E = E;
  return p;
}

EffectivePotential EffectivePotential::radial_coulomb(double q, double g, double beta,
                                                      double gamma, double E) {
  EffectivePotential p;
  p.kind = Kind::radial_coulomb;
  p.q = q;
  p.g = g;
  p.beta = beta;
  p.gamma = gamma;
  p.E = E;
  return p;
}

EffectivePotential EffectivePotential::two_center(double q, double beta, double gamma,
                                                  double E) {
  EffectivePotential p;
  p.kind = Kind::two_center;
  p.q = q;
  p.beta = beta;
  p.gamma = gamma;
  p.E = E;
  return p;
}

EffectivePotential EffectivePotential::custom(std::function<double(const Vec3&)> fw) {
  EffectivePotential p;
  p.kind = Kind::custom;
  p.fw_fn = std::move(fw);
  return p;
}

double EffectivePotential::fw(const MetricSpec& spec, const Vec3& x) const {
  switch (kind) {
    case Kind::radial_coulomb: {
      double r = norm(x);
      double qg = q * g;
      return 0.5 * qg * qg / (r * r) + beta / r + gamma + E;
    }
    case Kind::two_center: {
      double S = metric_eval(spec, x).f - spec.f0;
      return 0.5 * q * q * S * S + beta * S + gamma + E;
    }
    case Kind::custom:
      return fw_fn(x);
    case Kind::metric:
      return fw_direct(spec, x);
  }
  return 0.0;
}

Vec3 EffectivePotential::grad_fw(const MetricSpec& spec, const Vec3& x) const {
  switch (kind) {
    case Kind::radial_coulomb: {
      double r = norm(x);
      double qg = q * g;
      double d1 = -qg * qg / (r * r * r) - beta / (r * r);
      return d1 / r * x;
    }
    case Kind::two_center: {
      MetricSample s = metric_eval(spec, x);
      double S = s.f - spec.f0;
      return (q * q * S + beta) * s.grad_f;  // grad S = grad f
    }
    default: {
      double h = 1e-6 * std::max(1.0, norm(x));
      Vec3 g3;
      for (int k = 0; k < 3; ++k) {
        Vec3 xp = x, xm = x;
        xp[k] += h;
        xm[k] -= h;
        g3[k] = (fw(spec, xp) - fw(spec, xm)) / (2.0 * h);
      }
      return g3;
    }
  }
}

double EffectivePotential::fw_direct(const MetricSpec& spec, const Vec3& x) const {
  MetricSample s = metric_eval(spec, x);
  return s.f * (s.U + 0.5 * q * q / s.h + E / s.f - E);
}

}  // namespace kkflow
