#pragma once

#include <optional>
#include <string>
#include <vector>

#include "kkflow/conserved.hpp"
#include "kkflow/integrate.hpp"

namespace kkflow {

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CheckSpec {
  std::string kind;  // drift | killing-residuals | laplace | conic-identity | sphere-confinement
  double threshold = 0.0;
  double angle_threshold = 1e-6;  // sphere-confinement tangency (radians)
};

struct SphereTangentGenerator {
  std::string mode = "equatorial";  // equatorial | explicit
  double phi = 0.0;                 // azimuth on the equatorial circle
};

struct ScenarioConfig {
  std::string name;
  std::string preset;
  MetricSpec metric;
  double q = 0.0;

  std::optional<Vec3> x0, Pi0;                       // explicit initial state
  std::optional<SphereTangentGenerator> sphere_gen;  // two-center alternative

  // FormPot parameters; negative sentinel handling through the flags below.
  std::string potential_form = "none";  // none | formpot2 | formpot3
  std::optional<double> beta, gamma, E;
  bool beta_balance = false;   // formpot3: equatorial force balance
  bool gamma_on_shell = false; // formpot3: close the on-shell condition

  IntegratorConfig integ;
  std::vector<std::string> observables;
  std::vector<CheckSpec> checks;
  std::string out_dir = ".";
  unsigned long long seed = 1;
  int residual_points = 100;
};

struct ResidualSummary {
  std::string set;  // coefficient-set label
  ConstraintResiduals max_over_points;
  int points = 0;
};

struct CheckResult {
  std::string name;
  bool pass = false;
  double measured = 0.0;
  double threshold = 0.0;
};

struct RunReport {
  std::string scenario;
  unsigned long long seed = 0;
  double E = 0.0, beta = 0.0, gamma = 0.0;
  DriftReport drift;
  std::vector<ResidualSummary> residuals;
  std::vector<CheckResult> checks;
  std::vector<std::string> notes;
  bool all_pass = true;
  std::string csv_path, drift_json_path, residual_json_path;
};

ScenarioConfig parse_config(const std::string& json_text);

// Names of the scenarios compiled into the library.
std::vector<std::string> builtin_scenario_names();
// JSON text of a built-in scenario; ParseError when unknown.
std::string builtin_scenario(const std::string& name);

RunReport run_scenario(const ScenarioConfig& cfg);

// The residual/laplace suite alone (no integration); used by check-killing.
RunReport run_killing_checks(const ScenarioConfig& cfg);

std::string report_to_json(const RunReport& rep);

}  // namespace kkflow
