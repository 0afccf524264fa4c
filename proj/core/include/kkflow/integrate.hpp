#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "kkflow/dynamics.hpp"

namespace kkflow {

class StepSizeUnderflow : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct IntegratorConfig {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double t_max = 100.0;
  double max_step = 1e6;
  double sample_interval = 0.05;

  void validate() const;
};

enum class IntegrationStatus { ok, singularity_approach };

struct Trajectory {
  std::vector<double> t;
  std::vector<PhaseState> states;
  std::vector<std::string> observable_names;
  std::vector<std::vector<double>> observable_series;  // [observable][sample]
  IntegrationStatus status = IntegrationStatus::ok;
  std::size_t accepted_steps = 0;
  std::size_t rhs_evaluations = 0;

  std::size_t size() const { return t.size(); }
};

// Dormand-Prince 5(4) with PI step control; samples on a uniform grid through
// cubic Hermite interpolation of accepted steps. Terminates early (flagged)
// when the state comes within 10*r_min of a singular locus.
Trajectory integrate(const PhaseState& state0, const MetricSpec& spec,
                     const IntegratorConfig& cfg);

struct DriftEntry {
  std::string name;
  double initial = 0.0;
  double scale = 0.0;  // group scale used for the relative deviation
  double max_abs_dev = 0.0;
  double max_rel_dev = 0.0;
};

struct DriftReport {
  std::vector<DriftEntry> entries;
  double worst_rel() const;
  const DriftEntry* find(const std::string& name) const;
};

// Evaluates each observable at every sample and reports the deviation from
// its initial value. Observables sharing a scale_group divide by the euclidean
// norm of the group's initial values.
DriftReport drift_report(const Trajectory& traj, const std::vector<Observable>& observables);

// Fills traj.observable_series (one series per observable, aligned with samples).
void attach_observables(Trajectory& traj, const std::vector<Observable>& observables);

}  // namespace kkflow
