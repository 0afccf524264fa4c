// kkflow scenario runner: integrates the reduced monopole systems and
// verifies their conserved quantities and Killing structures.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "kkflow/scenario.hpp"

namespace {

std::string load_config_text(const std::string& name_or_path) {
  for (const auto& n : kkflow::builtin_scenario_names())
    if (n == name_or_path) return kkflow::builtin_scenario(name_or_path);
  std::ifstream in(name_or_path);
  if (!in) throw kkflow::ParseError("no built-in scenario or readable file named '" + name_or_path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void apply_overrides(kkflow::ScenarioConfig& cfg, const std::string& out_dir, double tol,
                     long long seed) {
  if (!out_dir.empty()) cfg.out_dir = out_dir;
  if (seed >= 0) cfg.seed = static_cast<unsigned long long>(seed);
  if (tol > 0.0)
    for (auto& c : cfg.checks) c.threshold = tol;
}

void print_report(const kkflow::RunReport& rep, std::mutex& io) {
  std::scoped_lock lock(io);
  std::printf("scenario %s (seed %llu, E=%.12g, beta=%.12g)\n", rep.scenario.c_str(), rep.seed,
              rep.E, rep.beta);
  for (const auto& c : rep.checks)
    std::printf("  [%s] %-18s measured %.3e  threshold %.3e\n", c.pass ? "PASS" : "FAIL",
                c.name.c_str(), c.measured, c.threshold);
  for (const auto& n : rep.notes) std::printf("  note: %s\n", n.c_str());
  if (!rep.csv_path.empty()) std::printf("  wrote %s\n", rep.csv_path.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Geodesic flows and Runge-Lenz structures on Kaluza-Klein reduced 3-manifolds"};
  app.require_subcommand(1);

  std::string out_dir;
  double tol = -1.0;
  long long seed = -1;
  app.add_option("--out-dir", out_dir, "Directory for CSV/JSON outputs");
  app.add_option("--tol", tol, "Override every check threshold");
  app.add_option("--seed", seed, "Override the residual sampling seed");

  auto* run = app.add_subcommand("run", "Integrate scenarios and run their checks");
  run->fallthrough();
  std::vector<std::string> run_configs;
  run->add_option("config", run_configs, "Built-in scenario names or config file paths")
      ->required();

  auto* check = app.add_subcommand("check-killing", "Run only the Killing/residual suite");
  check->fallthrough();
  std::string check_config;
  check->add_option("config", check_config, "Built-in scenario name or config file path")
      ->required();

  auto* sphere = app.add_subcommand("sphere", "Print the two-center confinement sphere");
  double m1 = 0, m2 = 0, ax = 0, ay = 0, az = 0;
  sphere->add_option("m1", m1)->required();
  sphere->add_option("m2", m2)->required();
  sphere->add_option("ax", ax)->required();
  sphere->add_option("ay", ay)->required();
  sphere->add_option("az", az)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (sphere->parsed()) {
      kkflow::TwoCenterSpec tc{m1, m2, {ax, ay, az}, 1.0};
      kkflow::SphereSpec sp = kkflow::two_center_sphere(tc);
      if (sp.median_plane) {
        std::printf("m1 = m2: the sphere degenerates to the median plane of the two centers\n");
        std::printf("plane: through the origin, normal (%.17g, %.17g, %.17g)\n", sp.axis.x,
                    sp.axis.y, sp.axis.z);
      } else {
        std::printf("rho    = %.17g\n", sp.rho);
        std::printf("center = (%.17g, %.17g, %.17g)\n", sp.center.x, sp.center.y, sp.center.z);
        std::printf("radius = %.17g\n", sp.radius);
      }
      return 0;
    }

    if (check->parsed()) {
      kkflow::ScenarioConfig cfg = kkflow::parse_config(load_config_text(check_config));
      apply_overrides(cfg, out_dir, tol, seed);
      kkflow::RunReport rep = kkflow::run_killing_checks(cfg);
      std::mutex io;
      print_report(rep, io);
      std::cout << kkflow::report_to_json(rep) << "\n";
      return rep.all_pass ? 0 : 1;
    }

    // run: scenarios in a batch execute concurrently; outputs are disjoint.
    std::vector<kkflow::ScenarioConfig> cfgs;
    for (const auto& c : run_configs) {
      kkflow::ScenarioConfig cfg = kkflow::parse_config(load_config_text(c));
      apply_overrides(cfg, out_dir, tol, seed);
      cfgs.push_back(std::move(cfg));
    }
    std::vector<kkflow::RunReport> reports(cfgs.size());
    std::vector<std::string> errors(cfgs.size());
    std::mutex io;
    std::vector<std::thread> workers;
    for (std::size_t i = 0; i < cfgs.size(); ++i) {
      workers.emplace_back([&, i] {
        try {
          reports[i] = kkflow::run_scenario(cfgs[i]);
          print_report(reports[i], io);
        } catch (const std::exception& e) {
          std::scoped_lock lock(io);
          errors[i] = e.what();
          std::fprintf(stderr, "scenario %s failed: %s\n", cfgs[i].name.c_str(), e.what());
        }
      });
    }
    for (auto& w : workers) w.join();

    bool all_pass = true;
    for (std::size_t i = 0; i < cfgs.size(); ++i) {
      if (!errors[i].empty()) return 1;
      all_pass &= reports[i].all_pass;
    }
    return all_pass ? 0 : 1;
  } catch (const kkflow::ParseError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const kkflow::ValidationError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
