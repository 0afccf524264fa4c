#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "kkflow/scenario.hpp"

using namespace kkflow;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_SUITE_BEGIN("scenario");

TEST_CASE("minimal config gets the documented defaults") {
  ScenarioConfig cfg = parse_config(R"({"preset":"taub-nut","metric":{"m":1.0},"q":0.5})");
  CHECK(cfg.integ.rel_tol == 1e-10);
  CHECK(cfg.integ.abs_tol == 1e-12);
  CHECK(cfg.integ.t_max == 100.0);
  CHECK(cfg.residual_points == 100);
  CHECK(cfg.metric.kind == MetricKind::taub_nut);
  CHECK(cfg.metric.g == 4.0);
}

TEST_CASE("unknown preset is a parse error") {
  CHECK_THROWS_AS(parse_config(R"({"preset":"schwarzschild"})"), ParseError);
}

TEST_CASE("malformed JSON is a parse error") {
  CHECK_THROWS_AS(parse_config("{preset: nope"), ParseError);
}

TEST_CASE("equal masses with a K_a request degenerate to the median plane") {
  CHECK_THROWS_AS(parse_config(R"({
    "preset": "two-center",
    "metric": {"m1": 1.0, "m2": 1.0, "a": [0, 0, 1]},
    "q": 0.5,
    "observables": ["Ka"],
    "checks": [{"kind": "sphere-confinement", "threshold": 1e-6}]
  })"),
                  ValidationError);
}

TEST_CASE("out-of-range tolerances are rejected") {
  CHECK_THROWS_AS(parse_config(R"({
    "preset": "taub-nut", "metric": {"m": 1.0},
    "integrator": {"rel_tol": 0.5}
  })"),
                  ValidationError);
}

TEST_CASE("unknown check kind is a parse error") {
  CHECK_THROWS_AS(parse_config(R"({
    "preset": "taub-nut", "metric": {"m": 1.0},
    "checks": [{"kind": "frobnicate"}]
  })"),
                  ParseError);
}

TEST_CASE("explicit off-sphere initial data fails validation") {
  ScenarioConfig cfg = parse_config(R"({
    "name": "bad-sphere",
    "preset": "two-center",
    "metric": {"m1": 1.0, "m2": 8.0, "a": [0, 0, 1]},
    "q": 0.5,
    "initial": {"x": [3.0, 0.0, 0.0], "Pi": [0.0, 0.3, 0.0]},
    "potential": {"form": "formpot3", "beta": -1.0, "gamma": 0.0},
    "checks": [{"kind": "sphere-confinement", "threshold": 1e-6}]
  })");
  CHECK_THROWS_AS(run_scenario(cfg), ValidationError);
}

TEST_CASE("built-in scenarios parse and are listed") {
  for (const auto& name : builtin_scenario_names()) {
    ScenarioConfig cfg = parse_config(builtin_scenario(name));
    CHECK(cfg.name == name);
  }
  CHECK_THROWS_AS(builtin_scenario("nope"), ParseError);
}

TEST_CASE("taub-nut bundled scenario passes end to end") {
  ScenarioConfig cfg = parse_config(builtin_scenario("taub-nut-bound"));
  cfg.out_dir = "scenario_test_out/a";
  RunReport rep = run_scenario(cfg);
  CHECK(rep.all_pass);
  CHECK(rep.E == doctest::Approx(0.3125).epsilon(1e-12));
  CHECK(rep.beta == doctest::Approx(-0.25).epsilon(1e-12));
  CHECK(std::filesystem::exists(rep.csv_path));
  CHECK(std::filesystem::exists(rep.drift_json_path));
  CHECK(std::filesystem::exists(rep.residual_json_path));

  std::string csv = slurp(rep.csv_path);
  CHECK(csv.rfind("t,x1,x2,x3,Pi1,Pi2,Pi3,H,q,Jx,Jy,Jz,Kx,Ky,Kz\n", 0) == 0);

  std::string drift_json = slurp(rep.drift_json_path);
  CHECK(drift_json.find("\"schema\": 1") != std::string::npos);
}

TEST_CASE("identical configs produce bit-identical CSV output") {
  ScenarioConfig cfg = parse_config(builtin_scenario("kepler-bargmann"));
  cfg.out_dir = "scenario_test_out/d1";
  RunReport r1 = run_scenario(cfg);
  cfg.out_dir = "scenario_test_out/d2";
  RunReport r2 = run_scenario(cfg);
  CHECK(slurp(r1.csv_path) == slurp(r2.csv_path));
}

TEST_CASE("check-killing works without integration") {
  ScenarioConfig cfg = parse_config(builtin_scenario("lee-lee"));
  RunReport rep = run_killing_checks(cfg);
  CHECK(rep.all_pass);
  bool has_residuals = false;
  for (const auto& r : rep.residuals) has_residuals |= r.points > 0;
  CHECK(has_residuals);
  std::string j = report_to_json(rep);
  CHECK(j.find("\"schema\": 1") != std::string::npos);
}

TEST_SUITE_END();
