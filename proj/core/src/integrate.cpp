#include "kkflow/integrate.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace kkflow {

void IntegratorConfig::validate() const {
  if (!(rel_tol > 0.0 && rel_tol <= 1e-2)) throw std::invalid_argument("rel_tol out of (0, 1e-2]");
  if (!(abs_tol > 0.0 && abs_tol <= 1e-2)) throw std::invalid_argument("abs_tol out of (0, 1e-2]");
  if (!(t_max > 0.0)) throw std::invalid_argument("t_max must be positive");
  if (!(sample_interval > 0.0)) throw std::invalid_argument("sample_interval must be positive");
  if (!(max_step > 0.0)) throw std::invalid_argument("max_step must be positive");
}

namespace {

using Y6 = std::array<double, 6>;

Y6 pack(const PhaseState& s) { return {s.x.x, s.x.y, s.x.z, s.Pi.x, s.Pi.y, s.Pi.z}; }

PhaseState unpack(const Y6& y, double q) {
  return {{y[0], y[1], y[2]}, {y[3], y[4], y[5]}, q};
}

// Dormand-Prince 5(4) tableau.
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
// 4th-order embedded weights (include the FSAL stage).
constexpr double e1 = 5179.0 / 57600, e3 = 7571.0 / 16695, e4 = 393.0 / 640,
                 e5 = -92097.0 / 339200, e6 = 187.0 / 2100, e7 = 1.0 / 40;

struct Stepper {
  const MetricSpec& spec;
  double q;
  std::size_t* evals;

  Y6 rhs(const Y6& y) const {
    ++*evals;
    EomRhs r = eom_rhs(unpack(y, q), spec);
    return {r.dx.x, r.dx.y, r.dx.z, r.dPi.x, r.dPi.y, r.dPi.z};
  }
};

Y6 axpy(const Y6& y, double h, std::initializer_list<std::pair<double, const Y6*>> terms) {
  Y6 out = y;
  for (const auto& [c, k] : terms)
    for (int i = 0; i < 6; ++i) out[i] += h * c * (*k)[i];
  return out;
}

// Cubic Hermite interpolant over one accepted step.
Y6 hermite(const Y6& y0, const Y6& y1, const Y6& f0, const Y6& f1, double h, double theta) {
  double t2 = theta * theta, t3 = t2 * theta;
  double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + theta;
  double h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
  Y6 out;
  for (int i = 0; i < 6; ++i)
    out[i] = h00 * y0[i] + h10 * h * f0[i] + h01 * y1[i] + h11 * h * f1[i];
  return out;
}

double error_norm(const Y6& err, const Y6& y0, const Y6& y1, double atol, double rtol) {
  double s = 0.0;
  for (int i = 0; i < 6; ++i) {
    double sc = atol + rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
    double e = err[i] / sc;
    s += e * e;
  }
  return std::sqrt(s / 6.0);
}

double initial_step(const Stepper& st, const Y6& y0, const Y6& f0, double atol, double rtol,
                    double hmax) {
  double d0 = 0.0, d1 = 0.0;
  for (int i = 0; i < 6; ++i) {
    double sc = atol + rtol * std::abs(y0[i]);
    d0 += (y0[i] / sc) * (y0[i] / sc);
    d1 += (f0[i] / sc) * (f0[i] / sc);
  }
  d0 = std::sqrt(d0 / 6.0);
  d1 = std::sqrt(d1 / 6.0);
  double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
  h0 = std::min(h0, hmax);
  try {
    Y6 y1 = axpy(y0, h0, {{1.0, &f0}});
    Y6 f1 = st.rhs(y1);
    double d2 = 0.0;
    for (int i = 0; i < 6; ++i) {
      double sc = atol + rtol * std::abs(y0[i]);
      double df = (f1[i] - f0[i]) / sc;
      d2 += df * df;
    }
    d2 = std::sqrt(d2 / 6.0) / h0;
    double dm = std::max(d1, d2);
    double h1 = dm <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dm, 0.2);
    return std::min({100.0 * h0, h1, hmax});
  } catch (const DomainError&) {
    return h0 * 1e-2;
  }
}

}  // namespace

Trajectory integrate(const PhaseState& state0, const MetricSpec& spec,
                     const IntegratorConfig& cfg) {
  cfg.validate();
  Trajectory traj;
  Stepper st{spec, state0.q, &traj.rhs_evaluations};

  const double singular_radius = 10.0 * spec.r_min;
  if (spec.domain_distance(state0.x) < singular_radius)
    throw DomainError("integrate: initial state within 10*r_min of a singularity");

  Y6 y = pack(state0);
  Y6 f = st.rhs(y);
  double t = 0.0;
  double hmax = std::min(cfg.max_step, cfg.t_max);
  double h = initial_step(st, y, f, cfg.abs_tol, cfg.rel_tol, hmax);

  traj.t.push_back(0.0);
  traj.states.push_back(state0);
  const double dt = cfg.sample_interval;
  long sample_k = 1;  // next sample index: t_k = k*dt

  const double h_floor = 1e-14 * std::max(1.0, cfg.t_max);
  double err_prev = 1.0;

  while (t < cfg.t_max) {
    if (cfg.t_max - t < h_floor) break;  // within rounding of the end point
    bool last = false;
    if (t + h >= cfg.t_max) {
      h = cfg.t_max - t;
      last = true;
    }
    if (h < h_floor)
      throw StepSizeUnderflow("integrate: step size underflow at t=" + std::to_string(t));

    Y6 y1, f1;
    double en;
    try {
      Y6 k2 = st.rhs(axpy(y, h, {{a21, &f}}));
      Y6 k3 = st.rhs(axpy(y, h, {{a31, &f}, {a32, &k2}}));
      Y6 k4 = st.rhs(axpy(y, h, {{a41, &f}, {a42, &k2}, {a43, &k3}}));
      Y6 k5 = st.rhs(axpy(y, h, {{a51, &f}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
      Y6 k6 = st.rhs(axpy(y, h, {{a61, &f}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}));
      y1 = axpy(y, h, {{b1, &f}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}});
      f1 = st.rhs(y1);  // FSAL
      Y6 y4 = axpy(y, h, {{e1, &f}, {e3, &k3}, {e4, &k4}, {e5, &k5}, {e6, &k6}, {e7, &f1}});
      Y6 err;
      for (int i = 0; i < 6; ++i) err[i] = y1[i] - y4[i];
      en = error_norm(err, y, y1, cfg.abs_tol, cfg.rel_tol);
    } catch (const DomainError&) {
      h *= 0.5;  // a stage left the domain; retry smaller
      continue;
    }

    if (!(en <= 1.0)) {  // rejects NaN as well
      h *= std::isfinite(en) ? std::clamp(0.9 * std::pow(en, -0.2), 0.1, 0.9) : 0.1;
      continue;
    }

    // Accepted: dense-sample the step interval, then advance.
    double t1 = last ? cfg.t_max : t + h;
    while (true) {
      double ts = sample_k * dt;
      if (ts > t1 + 1e-12 * std::max(1.0, t1)) break;
      if (ts > cfg.t_max + 1e-12) break;
      double theta = std::clamp((ts - t) / h, 0.0, 1.0);
      Y6 ys = hermite(y, y1, f, f1, h, theta);
      traj.t.push_back(ts);
      traj.states.push_back(unpack(ys, state0.q));
      ++sample_k;
    }

    t = t1;
    y = y1;
    f = f1;
    ++traj.accepted_steps;

    if (spec.domain_distance(unpack(y, state0.q).x) < singular_radius) {
      traj.status = IntegrationStatus::singularity_approach;
      break;
    }

    // PI controller (Hairer-Norsett-Wanner style).
    double fac = 0.9 * std::pow(std::max(en, 1e-16), -0.7 / 5.0) *
                 std::pow(err_prev, 0.4 / 5.0);
    err_prev = std::max(en, 1e-16);
    h = std::min(h * std::clamp(fac, 0.2, 5.0), hmax);
  }

  // Make sure the end point is sampled even when t_max is off the grid.
  if (traj.status == IntegrationStatus::ok && traj.t.back() < cfg.t_max - 1e-12) {
    traj.t.push_back(cfg.t_max);
    traj.states.push_back(unpack(y, state0.q));
  }
  return traj;
}

double DriftReport::worst_rel() const {
  double w = 0.0;
  for (const auto& e : entries) w = std::max(w, e.max_rel_dev);
  return w;
}

const DriftEntry* DriftReport::find(const std::string& name) const {
  for (const auto& e : entries)
    if (e.name == name) return &e;
  return nullptr;
}

DriftReport drift_report(const Trajectory& traj, const std::vector<Observable>& observables) {
  if (traj.size() == 0) throw std::invalid_argument("drift_report: empty trajectory");
  DriftReport rep;
  std::vector<std::vector<double>> vals(observables.size());
  for (std::size_t i = 0; i < observables.size(); ++i) {
    vals[i].reserve(traj.size());
    for (const auto& s : traj.states) vals[i].push_back(observables[i].eval(s));
  }
  for (std::size_t i = 0; i < observables.size(); ++i) {
    const auto& o = observables[i];
    DriftEntry e;
    e.name = o.name;
    e.initial = vals[i][0];
    const std::string group = o.scale_group.empty() ? o.name : o.scale_group;
    double s2 = 0.0;
    for (std::size_t j = 0; j < observables.size(); ++j) {
      const std::string gj =
          observables[j].scale_group.empty() ? observables[j].name : observables[j].scale_group;
      if (gj == group) s2 += vals[j][0] * vals[j][0];
    }
    e.scale = std::sqrt(s2);
    for (double v : vals[i]) e.max_abs_dev = std::max(e.max_abs_dev, std::abs(v - e.initial));
    e.max_rel_dev = e.max_abs_dev / std::max(e.scale, 1e-300);
    rep.entries.push_back(e);
  }
  return rep;
}

void attach_observables(Trajectory& traj, const std::vector<Observable>& observables) {
  traj.observable_names.clear();
  traj.observable_series.assign(observables.size(), {});
  for (std::size_t i = 0; i < observables.size(); ++i) {
    traj.observable_names.push_back(observables[i].name);
    traj.observable_series[i].reserve(traj.size());
    for (const auto& s : traj.states) traj.observable_series[i].push_back(observables[i].eval(s));
  }
}

}  // namespace kkflow
