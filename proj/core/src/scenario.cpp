#include "kkflow/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include <nlohmann/json.hpp>

namespace kkflow {

using json = nlohmann::json;

namespace {

Vec3 parse_vec3(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 3)
    throw ParseError(path + ": expected an array of 3 numbers");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

double require_number(const json& j, const std::string& key, const std::string& path) {
  if (!j.contains(key)) throw ParseError(path + "." + key + ": missing");
  if (!j[key].is_number()) throw ParseError(path + "." + key + ": expected a number");
  return j[key].get<double>();
}

}  // namespace

ScenarioConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("config is not valid JSON: ") + e.what());
  }

  ScenarioConfig cfg;
  cfg.name = j.value("name", "scenario");
  if (!j.contains("preset")) throw ParseError("preset: missing");
  cfg.preset = j["preset"].get<std::string>();
  const json m = j.value("metric", json::object());

  if (cfg.preset == "taub-nut") {
    cfg.metric = MetricSpec::taub_nut(require_number(m, "m", "metric"));
  } else if (cfg.preset == "lee-lee") {
    cfg.metric = MetricSpec::lee_lee(require_number(m, "m", "metric"),
                                     require_number(m, "a0", "metric"));
  } else if (cfg.preset == "winding-string") {
    cfg.metric = MetricSpec::winding_string(m.value("u0", 0.0));
  } else if (cfg.preset == "extended-taub-nut") {
    cfg.metric = MetricSpec::extended_taub_nut(
        require_number(m, "a", "metric"), require_number(m, "b", "metric"),
        require_number(m, "c", "metric"), require_number(m, "d", "metric"));
  } else if (cfg.preset == "two-center") {
    Vec3 a = parse_vec3(m.value("a", json::array({0.0, 0.0, 1.0})), "metric.a");
    cfg.metric = MetricSpec::two_center(require_number(m, "m1", "metric"),
                                        require_number(m, "m2", "metric"), a,
                                        m.value("f0", 1.0));
  } else if (cfg.preset == "multicenter") {
    std::vector<Center> centers;
    if (!m.contains("centers") || !m["centers"].is_array())
      throw ParseError("metric.centers: missing or not an array");
    for (const auto& c : m["centers"])
      centers.push_back({require_number(c, "m", "metric.centers[]"),
                         parse_vec3(c.at("pos"), "metric.centers[].pos")});
    cfg.metric = MetricSpec::multicenter(m.value("f0", 1.0), std::move(centers));
  } else if (cfg.preset == "flat-kepler") {
    cfg.metric = MetricSpec::flat_kepler(m.value("k", 0.0));
  } else {
    throw ParseError("preset: unknown preset '" + cfg.preset + "'");
  }

  cfg.q = j.value("q", 0.0);

  if (j.contains("initial")) {
    const json& ini = j["initial"];
    if (ini.contains("sphere_tangent")) {
      if (cfg.preset != "two-center")
        throw ValidationError("initial.sphere_tangent: only valid for the two-center preset");
      SphereTangentGenerator gen;
      gen.mode = ini["sphere_tangent"].value("mode", "equatorial");
      gen.phi = ini["sphere_tangent"].value("phi", 0.0);
      cfg.sphere_gen = gen;
    } else {
      if (!ini.contains("x") || !ini.contains("Pi"))
        throw ParseError("initial: expected x and Pi (or sphere_tangent)");
      cfg.x0 = parse_vec3(ini["x"], "initial.x");
      cfg.Pi0 = parse_vec3(ini["Pi"], "initial.Pi");
    }
  }

  if (j.contains("potential")) {
    const json& p = j["potential"];
    cfg.potential_form = p.value("form", "none");
    if (cfg.potential_form != "none" && cfg.potential_form != "formpot2" &&
        cfg.potential_form != "formpot3")
      throw ParseError("potential.form: unknown form '" + cfg.potential_form + "'");
    auto opt_num = [&](const char* key, bool* special, const char* special_word) {
      std::optional<double> out;
      if (!p.contains(key)) return out;
      if (p[key].is_string()) {
        std::string s = p[key].get<std::string>();
        if (special && s == special_word) {
          *special = true;
          return out;
        }
        if (s == "auto") return out;  // resolved from the realized energy
        throw ParseError(std::string("potential.") + key + ": unrecognized keyword '" + s + "'");
      }
      out = p[key].get<double>();
      return out;
    };
    cfg.beta = opt_num("beta", &cfg.beta_balance, "balance");
    cfg.gamma = opt_num("gamma", &cfg.gamma_on_shell, "on-shell");
    if (p.contains("E")) cfg.E = p["E"].get<double>();
  }

  if (j.contains("integrator")) {
    const json& it = j["integrator"];
    cfg.integ.rel_tol = it.value("rel_tol", cfg.integ.rel_tol);
    cfg.integ.abs_tol = it.value("abs_tol", cfg.integ.abs_tol);
    cfg.integ.t_max = it.value("t_max", cfg.integ.t_max);
    cfg.integ.max_step = it.value("max_step", cfg.integ.max_step);
    cfg.integ.sample_interval = it.value("sample_interval", cfg.integ.sample_interval);
  }
  try {
    cfg.integ.validate();
  } catch (const std::invalid_argument& e) {
    throw ValidationError(std::string("integrator: ") + e.what());
  }

  if (j.contains("observables"))
    cfg.observables = j["observables"].get<std::vector<std::string>>();

  if (j.contains("checks")) {
    for (const auto& c : j["checks"]) {
      CheckSpec cs;
      cs.kind = c.at("kind").get<std::string>();
      if (cs.kind != "drift" && cs.kind != "killing-residuals" && cs.kind != "laplace" &&
          cs.kind != "conic-identity" && cs.kind != "sphere-confinement")
        throw ParseError("checks[].kind: unknown check '" + cs.kind + "'");
      cs.threshold = c.value("threshold", 1e-8);
      cs.angle_threshold = c.value("angle_threshold", 1e-6);
      cfg.checks.push_back(cs);
    }
  }

  cfg.out_dir = j.value("out_dir", ".");
  cfg.seed = j.value("seed", 1ULL);
  cfg.residual_points = j.value("residual_points", 100);
  if (cfg.residual_points < 1) throw ValidationError("residual_points must be >= 1");

  // Median-plane degeneracy: K_a and the confinement sphere need m1 != m2.
  if (cfg.preset == "two-center") {
    bool wants_sphere = cfg.sphere_gen.has_value();
    for (const auto& c : cfg.checks)
      if (c.kind == "sphere-confinement") wants_sphere = true;
    bool wants_ka = false;
    for (const auto& o : cfg.observables)
      if (o == "Ka") wants_ka = true;
    double m1 = cfg.metric.centers.at(0).mass, m2 = cfg.metric.centers.at(1).mass;
    if ((wants_sphere || wants_ka) && m1 == m2)
      throw ValidationError(
          "two-center with m1 = m2: the confinement sphere degenerates to the median "
          "plane (Eguchi-Hanson); K_a and sphere checks are unavailable");
  }
  return cfg;
}

namespace {

struct Assembled {
  MetricSpec spec;          // metric with the potential attached
  PhaseState state0;
  double E = 0.0, beta = 0.0, gamma = 0.0;
  bool two_center = false;
  TwoCenterSpec tc{};
  SphereSpec sphere{};
  std::vector<std::string> notes;
};

// Equatorial relative equilibrium: the unique sphere-confined motion whose
// acceleration is radial w.r.t. the sphere center. Force balance fixes beta
// and the angular rate.
void equatorial_state(const TwoCenterSpec& tc, double q, double phi, Vec3* x0, Vec3* Pi0,
                      double* beta_out) {
  SphereSpec sp = two_center_sphere(tc);
  if (sp.median_plane) throw ValidationError("equatorial generator: m1 = m2 degenerates");
  Vec3 ah = sp.axis;
  Vec3 e1 = std::abs(ah.z) < 0.9 ? normalized(cross(ah, Vec3{0, 0, 1}))
                                 : normalized(cross(ah, Vec3{1, 0, 0}));
  Vec3 e2 = cross(ah, e1);
  Vec3 u = std::cos(phi) * e1 + std::sin(phi) * e2;
  Vec3 x = sp.center + sp.radius * u;

  double d1 = norm(x - tc.a), d2 = norm(x + tc.a);
  double S = tc.m1 / d1 + tc.m2 / d2;
  double f = tc.f0 + S;
  double mu = tc.m1 / (d1 * d1 * d1);
  double aa = norm(tc.a);
  double x2 = norm2(x);
  double beta = -q * q * (S + 2.0 * mu * sp.radius * sp.radius * x2 / (sp.rho * aa * sp.rho * aa));
  double omega = -2.0 * mu * q * x2 / (f * sp.rho * aa);

  *x0 = x;
  *Pi0 = f * omega * cross(ah, x);
  *beta_out = beta;
}

Assembled assemble(const ScenarioConfig& cfg) {
  Assembled as;
  as.spec = cfg.metric;

  if (cfg.preset == "two-center") {
    as.two_center = true;
    as.tc = TwoCenterSpec{cfg.metric.centers[0].mass, cfg.metric.centers[1].mass,
                          cfg.metric.centers[0].pos, cfg.metric.f0};
    if (as.tc.m1 != as.tc.m2) as.sphere = two_center_sphere(as.tc);
  }

  // Initial state (possibly generated), and formpot3 beta via force balance.
  double beta = cfg.beta.value_or(0.0);
  Vec3 x0{}, Pi0{};
  if (cfg.sphere_gen) {
    if (cfg.sphere_gen->mode != "equatorial")
      throw ValidationError("initial.sphere_tangent.mode: only 'equatorial' is supported");
    double bal_beta;
    equatorial_state(as.tc, cfg.q, cfg.sphere_gen->phi, &x0, &Pi0, &bal_beta);
    if (cfg.beta_balance) {
      beta = bal_beta;
    } else if (!cfg.beta) {
      throw ValidationError("two-center sphere scenario: potential.beta must be a number or 'balance'");
    }
  } else {
    if (!cfg.x0 || !cfg.Pi0) throw ValidationError("initial: x and Pi are required");
    x0 = *cfg.x0;
    Pi0 = *cfg.Pi0;
  }

  // Validate sphere membership/tangency for explicit two-center sphere states.
  if (as.two_center && !as.sphere.median_plane && as.sphere.radius > 0.0) {
    bool sphere_checked = false;
    for (const auto& c : cfg.checks) sphere_checked |= (c.kind == "sphere-confinement");
    if (sphere_checked) {
      double dev = std::abs(norm(x0 - as.sphere.center) - as.sphere.radius);
      if (dev > 1e-10)
        throw ValidationError("initial x is off the confinement sphere by " + std::to_string(dev));
      double tang = std::abs(dot(Pi0, x0 - as.sphere.center)) / std::max(norm(Pi0), 1e-300);
      if (tang > 1e-10) throw ValidationError("initial Pi is not tangent to the sphere");
    }
  }

  // Attach the formpot3 potential (two-center); gamma closes the on-shell
  // condition, E is bookkeeping (H == E along the flow).
  double gamma = cfg.gamma.value_or(0.0);
  double E = cfg.E.value_or(0.0);
  if (cfg.potential_form == "formpot3") {
    if (!as.two_center) throw ValidationError("potential.form formpot3 requires the two-center preset");
    double S = 0.0;
    {
      MetricSample s = metric_eval(as.spec, x0);
      S = s.f - as.spec.f0;
    }
    if (cfg.gamma_on_shell)
      gamma = -(0.5 * norm2(Pi0) + 0.5 * cfg.q * cfg.q * S * S + beta * S);
    ExternalPotential U;
    U.kind = ExternalPotential::Kind::theorem3_two_center;
    U.q = cfg.q;
    U.beta = beta;
    U.gamma = gamma;
    U.E = E;
    as.spec.U = U;
  }

  // Fully pinned formpot2 parameters convert to the theorem-3 potential, so
  // the integrator consumes one U path; the natural preset potentials already
  // equal this conversion at the auto parameters.
  if (cfg.potential_form == "formpot2" && cfg.beta && cfg.gamma && cfg.E) {
    if (!cfg.metric.radial())
      throw ValidationError("potential.form formpot2 requires a radial preset");
    ExternalPotential U = theorem3_potential(cfg.q, *cfg.beta, *cfg.gamma, *cfg.E);
    as.spec.U = U;
    gamma = *cfg.gamma;
    E = *cfg.E;
  }

  as.state0 = PhaseState{x0, Pi0, cfg.q};

  // Realized energy; warn when the config pinned a different E.
  double H0 = hamiltonian(as.state0, as.spec);
  if (cfg.E && std::abs(*cfg.E - H0) > 1e-10 * std::max(1.0, std::abs(H0)))
    as.notes.push_back("config E = " + std::to_string(*cfg.E) +
                       " differs from the realized H = " + std::to_string(H0) +
                       "; the realized value is used");
  E = H0;

  // Resolve formpot2 parameters from the realized energy.
  if (cfg.potential_form == "formpot2") {
    const double q = cfg.q;
    if (!cfg.beta) {
      switch (cfg.metric.kind) {
        case MetricKind::taub_nut:
        case MetricKind::lee_lee:
          beta = -4.0 * cfg.metric.m * (E - q * q);
          break;
        case MetricKind::winding_string:
          beta = -q * q;
          break;
        case MetricKind::extended_taub_nut:
          beta = -cfg.metric.ea * E + 0.5 * cfg.metric.ed * q * q;
          break;
        case MetricKind::flat_kepler:
          beta = -cfg.metric.U.k;
          break;
        default:
          throw ValidationError("potential.beta: no auto rule for this preset");
      }
    }
    if (!cfg.gamma && !cfg.gamma_on_shell) {
      switch (cfg.metric.kind) {
        case MetricKind::taub_nut:
          gamma = 0.5 * q * q - E;
          break;
        case MetricKind::lee_lee:
          gamma = 0.5 * q * q - E + 0.5 * cfg.metric.a0 * cfg.metric.a0;
          break;
        case MetricKind::winding_string:
          gamma = 0.5 * q * q - E + cfg.metric.U.u0;
          break;
        case MetricKind::extended_taub_nut:
          gamma = -cfg.metric.eb * E + 0.5 * cfg.metric.ec * q * q;
          break;
        case MetricKind::flat_kepler:
          gamma = 0.5 * q * q - E;
          break;
        default:
          gamma = 0.0;
          break;
      }
    }
  }

  as.E = E;
  as.beta = beta;
  as.gamma = gamma;
  return as;
}

std::vector<std::string> default_observables(const Assembled& as, double q) {
  if (as.two_center) {
    std::vector<std::string> o{"H", "q", "Ja", "Q2"};
    if (q != 0.0) o.push_back("Ka");
    return o;
  }
  return {"H", "q", "Jx", "Jy", "Jz", "Kx", "Ky", "Kz"};
}

std::mt19937_64 seeded_rng(unsigned long long seed) { return std::mt19937_64(seed); }

Vec3 random_direction(std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Vec3 v{nd(rng), nd(rng), nd(rng)};
  double n = norm(v);
  if (n < 1e-12) return {1, 0, 0};
  return v / n;
}

// Seeded residual sample points, respecting the metric's domain.
std::vector<Vec3> sample_points(const Assembled& as, std::mt19937_64& rng, int count) {
  std::vector<Vec3> pts;
  std::uniform_real_distribution<double> ur(0.0, 1.0);
  int budget = 1000 * count;
  if (as.two_center && !as.sphere.median_plane) {
    // Sphere-confined construction: sample the confinement sphere itself.
    while ((int)pts.size() < count && budget-- > 0) {
      Vec3 w = random_direction(rng);
      Vec3 x = as.sphere.center + as.sphere.radius * w;
      bool ok = true;
      for (const auto& c : as.spec.centers) ok &= norm(x - c.pos) > 0.3;
      if (ok) pts.push_back(x);
    }
  } else {
    double lo = as.spec.kind == MetricKind::winding_string ? 1.5 : 0.8;
    double hi = 6.0;
    while ((int)pts.size() < count && budget-- > 0) {
      double r = lo + (hi - lo) * ur(rng);
      Vec3 x = r * random_direction(rng);
      if (as.spec.domain_distance(x) > 0.5) pts.push_back(x);
    }
  }
  if ((int)pts.size() < count)
    throw ValidationError("residual sampling could not find enough admissible points");
  return pts;
}

void write_csv(const std::string& path, const Trajectory& traj) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw std::runtime_error("cannot open " + path);
  std::fprintf(f, "t,x1,x2,x3,Pi1,Pi2,Pi3");
  for (const auto& n : traj.observable_names) std::fprintf(f, ",%s", n.c_str());
  std::fprintf(f, "\n");
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const PhaseState& s = traj.states[i];
    std::fprintf(f, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g", traj.t[i], s.x.x, s.x.y, s.x.z,
                 s.Pi.x, s.Pi.y, s.Pi.z);
    for (const auto& series : traj.observable_series) std::fprintf(f, ",%.17g", series[i]);
    std::fprintf(f, "\n");
  }
  std::fclose(f);
}

json residuals_to_json(const std::vector<ResidualSummary>& rs) {
  json out = json::object();
  for (const auto& r : rs) {
    out[r.set] = {{"order0", r.max_over_points.order0},
                  {"order1", r.max_over_points.order1},
                  {"order2", r.max_over_points.order2},
                  {"order3", r.max_over_points.order3},
                  {"points", r.points}};
  }
  return out;
}

json drift_to_json(const DriftReport& d) {
  json out = json::object();
  for (const auto& e : d.entries)
    out[e.name] = {{"initial", e.initial},
                   {"scale", e.scale},
                   {"max_abs_dev", e.max_abs_dev},
                   {"max_rel_dev", e.max_rel_dev}};
  return out;
}

json checks_to_json(const std::vector<CheckResult>& cs) {
  json out = json::array();
  for (const auto& c : cs)
    out.push_back(
        {{"name", c.name}, {"pass", c.pass}, {"measured", c.measured}, {"threshold", c.threshold}});
  return out;
}

// Residual suite shared by run_scenario and run_killing_checks.
std::vector<ResidualSummary> residual_suite(const Assembled& as, const ScenarioConfig& cfg,
                                            const std::vector<Vec3>& points) {
  std::vector<ResidualSummary> out;
  auto accumulate = [&](const std::string& label, const KillingCoefficients& coeffs,
                        const EffectivePotential& pot) {
    ResidualSummary rs;
    rs.set = label;
    for (const auto& x : points) {
      ConstraintResiduals r = van_holten_residuals(coeffs, as.spec, pot, cfg.q, x);
      rs.max_over_points.order0 = std::max(rs.max_over_points.order0, r.order0);
      rs.max_over_points.order1 = std::max(rs.max_over_points.order1, r.order1);
      rs.max_over_points.order2 = std::max(rs.max_over_points.order2, r.order2);
      rs.max_over_points.order3 = std::max(rs.max_over_points.order3, r.order3);
    }
    rs.points = (int)points.size();
    out.push_back(rs);
  };

  if (as.two_center) {
    EffectivePotential pot =
        EffectivePotential::two_center(cfg.q, as.beta, as.gamma, as.E);
    accumulate("axial-angular-momentum", two_center_ja_coefficients(as.tc, cfg.q), pot);
    accumulate("runge-lenz-scalar", two_center_rl_coefficients(as.tc, cfg.q, as.beta), pot);
  } else {
    EffectivePotential pot =
        EffectivePotential::radial_coulomb(cfg.q, as.spec.g, as.beta, as.gamma, as.E);
    std::mt19937_64 rng = seeded_rng(cfg.seed + 17);
    Vec3 n1{0, 0, 1};
    Vec3 n2 = random_direction(rng);
    ResidualSummary am{"angular-momentum", {}, 0}, rl{"runge-lenz", {}, 0};
    for (const Vec3& n : {n1, n2}) {
      KillingCoefficients amc = angular_momentum_coefficients(as.spec, n, cfg.q);
      KillingCoefficients rlc = runge_lenz_coefficients(as.spec, n, cfg.q, as.beta);
      for (const auto& x : points) {
        ConstraintResiduals ra = van_holten_residuals(amc, as.spec, pot, cfg.q, x);
        ConstraintResiduals rr = van_holten_residuals(rlc, as.spec, pot, cfg.q, x);
        am.max_over_points.order0 = std::max(am.max_over_points.order0, ra.order0);
        am.max_over_points.order1 = std::max(am.max_over_points.order1, ra.order1);
        am.max_over_points.order2 = std::max(am.max_over_points.order2, ra.order2);
        am.max_over_points.order3 = std::max(am.max_over_points.order3, ra.order3);
        rl.max_over_points.order0 = std::max(rl.max_over_points.order0, rr.order0);
        rl.max_over_points.order1 = std::max(rl.max_over_points.order1, rr.order1);
        rl.max_over_points.order2 = std::max(rl.max_over_points.order2, rr.order2);
        rl.max_over_points.order3 = std::max(rl.max_over_points.order3, rr.order3);
      }
      am.points += (int)points.size();
      rl.points += (int)points.size();
    }
    out.push_back(am);
    out.push_back(rl);
  }
  return out;
}

double laplace_suite(const Assembled& as, const ScenarioConfig& cfg,
                     const std::vector<Vec3>& points, std::vector<std::string>* notes) {
  double worst = 0.0;
  if (as.two_center) {
    EffectivePotential pot = EffectivePotential::two_center(cfg.q, as.beta, as.gamma, as.E);
    for (const auto& x : points)
      worst = std::max(worst,
                       std::abs(laplace_obstruction(pot, as.spec, cfg.q, as.spec.g, x)));
    if (notes)
      notes->push_back("two-center laplace cross term (recorded, not asserted): max |obstruction| = " +
                       std::to_string(worst));
  } else {
    EffectivePotential pot =
        EffectivePotential::radial_coulomb(cfg.q, as.spec.g, as.beta, as.gamma, as.E);
    for (const auto& x : points) {
      // Exercise both the analytic radial path and the stencil path.
      double analytic = laplace_obstruction(pot, as.spec, cfg.q, as.spec.g, x);
      EffectivePotential generic = EffectivePotential::custom(
          [&pot, &as](const Vec3& p) { return pot.fw(as.spec, p); });
      double stenciled = laplace_obstruction(generic, as.spec, cfg.q, as.spec.g, x);
      worst = std::max(worst, std::max(std::abs(analytic), std::abs(stenciled)));
    }
  }
  return worst;
}

}  // namespace

std::vector<std::string> builtin_scenario_names() {
  return {"taub-nut-bound", "two-center-sphere", "kepler-bargmann",
          "lee-lee",        "winding-string",    "extended-taub-nut"};
}

std::string builtin_scenario(const std::string& name) {
  if (name == "taub-nut-bound")
    return R"({
  "name": "taub-nut-bound",
  "preset": "taub-nut",
  "metric": {"m": 1.0},
  "q": 0.5,
  "initial": {"x": [8.0, 0.0, 0.0], "Pi": [-0.55, 0.25, 0.10]},
  "potential": {"form": "formpot2", "beta": "auto", "gamma": "auto"},
  "integrator": {"rel_tol": 1e-12, "abs_tol": 1e-14, "t_max": 100.0, "sample_interval": 0.05},
  "observables": ["H", "q", "Jx", "Jy", "Jz", "Kx", "Ky", "Kz"],
  "checks": [
    {"kind": "drift", "threshold": 1e-8},
    {"kind": "killing-residuals", "threshold": 1e-8},
    {"kind": "conic-identity", "threshold": 1e-8},
    {"kind": "laplace", "threshold": 1e-6}
  ],
  "seed": 20260809,
  "residual_points": 100
})";
  if (name == "two-center-sphere")
    return R"({
  "name": "two-center-sphere",
  "preset": "two-center",
  "metric": {"m1": 1.0, "m2": 8.0, "a": [0.0, 0.0, 1.0], "f0": 1.0},
  "q": 0.5,
  "initial": {"sphere_tangent": {"mode": "equatorial", "phi": 0.0}},
  "potential": {"form": "formpot3", "beta": "balance", "gamma": "on-shell", "E": 1.0},
  "integrator": {"rel_tol": 1e-12, "abs_tol": 1e-14, "t_max": 50.0, "sample_interval": 0.05},
  "observables": ["H", "q", "Ja", "Q2", "Ka"],
  "checks": [
    {"kind": "drift", "threshold": 1e-8},
    {"kind": "killing-residuals", "threshold": 1e-8},
    {"kind": "sphere-confinement", "threshold": 1e-6, "angle_threshold": 1e-6}
  ],
  "seed": 20260809,
  "residual_points": 100
})";
  if (name == "kepler-bargmann")
    return R"({
  "name": "kepler-bargmann",
  "preset": "flat-kepler",
  "metric": {"k": 1.0},
  "q": 0.0,
  "initial": {"x": [1.2, 0.0, 0.0], "Pi": [0.0, 0.8, 0.15]},
  "potential": {"form": "formpot2", "beta": "auto", "gamma": "auto"},
  "integrator": {"rel_tol": 1e-13, "abs_tol": 1e-15, "t_max": 40.0, "sample_interval": 0.02},
  "observables": ["H", "Jx", "Jy", "Jz", "Kx", "Ky", "Kz", "KBn"],
  "checks": [
    {"kind": "drift", "threshold": 1e-9},
    {"kind": "conic-identity", "threshold": 1e-8}
  ],
  "seed": 20260809
})";
  if (name == "lee-lee")
    return R"({
  "name": "lee-lee",
  "preset": "lee-lee",
  "metric": {"m": 1.0, "a0": 0.8},
  "q": 0.5,
  "initial": {"x": [6.0, 0.0, 0.0], "Pi": [-0.45, 0.30, 0.12]},
  "potential": {"form": "formpot2", "beta": "auto", "gamma": "auto"},
  "integrator": {"rel_tol": 1e-12, "abs_tol": 1e-14, "t_max": 60.0, "sample_interval": 0.05},
  "observables": ["H", "q", "Jx", "Jy", "Jz", "Kx", "Ky", "Kz"],
  "checks": [
    {"kind": "drift", "threshold": 1e-8},
    {"kind": "killing-residuals", "threshold": 1e-8},
    {"kind": "conic-identity", "threshold": 1e-8},
    {"kind": "laplace", "threshold": 1e-6}
  ],
  "seed": 20260809,
  "residual_points": 100
})";
  if (name == "winding-string")
    return R"({
  "name": "winding-string",
  "preset": "winding-string",
  "metric": {},
  "q": 0.5,
  "initial": {"x": [4.0, 0.0, 0.0], "Pi": [-0.30, 0.25, 0.10]},
  "potential": {"form": "formpot2", "beta": "auto", "gamma": "auto"},
  "integrator": {"rel_tol": 1e-12, "abs_tol": 1e-14, "t_max": 60.0, "sample_interval": 0.05},
  "observables": ["H", "q", "Jx", "Jy", "Jz", "Kx", "Ky", "Kz"],
  "checks": [
    {"kind": "drift", "threshold": 1e-8},
    {"kind": "killing-residuals", "threshold": 1e-8},
    {"kind": "conic-identity", "threshold": 1e-8},
    {"kind": "laplace", "threshold": 1e-6}
  ],
  "seed": 20260809,
  "residual_points": 100
})";
  if (name == "extended-taub-nut")
    return R"({
  "name": "extended-taub-nut",
  "preset": "extended-taub-nut",
  "metric": {"a": 1.2, "b": 1.0, "c": 0.3, "d": 0.5},
  "q": 0.5,
  "initial": {"x": [5.0, 0.0, 0.0], "Pi": [-0.40, 0.35, 0.0]},
  "potential": {"form": "formpot2", "beta": "auto", "gamma": "auto"},
  "integrator": {"rel_tol": 1e-12, "abs_tol": 1e-14, "t_max": 60.0, "sample_interval": 0.05},
  "observables": ["H", "q", "Jx", "Jy", "Jz", "Kx", "Ky", "Kz"],
  "checks": [
    {"kind": "drift", "threshold": 1e-8},
    {"kind": "killing-residuals", "threshold": 1e-8},
    {"kind": "conic-identity", "threshold": 1e-8},
    {"kind": "laplace", "threshold": 1e-6}
  ],
  "seed": 20260809,
  "residual_points": 100
})";
  throw ParseError("unknown built-in scenario '" + name + "'");
}

RunReport run_scenario(const ScenarioConfig& cfg) {
  Assembled as = assemble(cfg);
  RunReport rep;
  rep.scenario = cfg.name;
  rep.seed = cfg.seed;
  rep.E = as.E;
  rep.beta = as.beta;
  rep.gamma = as.gamma;
  rep.notes = as.notes;

  ObservableContext ctx;
  ctx.spec = as.spec;
  ctx.g = as.spec.g;
  ctx.beta = as.beta;
  ctx.two_center = as.two_center;
  ctx.tc = as.tc;
  ctx.kepler_k = as.spec.U.kind == ExternalPotential::Kind::coulomb ? as.spec.U.k : 1.0;
  std::vector<std::string> obs_names =
      cfg.observables.empty() ? default_observables(as, cfg.q) : cfg.observables;
  for (const auto& o : obs_names)
    if ((o == "Ja" || o == "Q2" || o == "Ka") && !as.two_center)
      throw ValidationError("observable " + o + " requires the two-center preset");
  std::vector<Observable> observables = make_observables(obs_names, ctx);

  Trajectory traj = integrate(as.state0, as.spec, cfg.integ);
  if (traj.status == IntegrationStatus::singularity_approach)
    rep.notes.push_back("integration terminated early: singularity approach");
  attach_observables(traj, observables);
  rep.drift = drift_report(traj, observables);

  std::mt19937_64 rng = seeded_rng(cfg.seed);
  std::vector<Vec3> points = sample_points(as, rng, cfg.residual_points);
  // The spec's validity notion includes the scenario's own trajectory points.
  std::vector<Vec3> residual_points = points;
  for (const auto& s : traj.states) residual_points.push_back(s.x);

  bool need_residuals = false, need_laplace = false;
  for (const auto& c : cfg.checks) {
    need_residuals |= (c.kind == "killing-residuals");
    need_laplace |= (c.kind == "laplace");
  }
  if (need_residuals) rep.residuals = residual_suite(as, cfg, residual_points);
  double laplace_worst = 0.0;
  if (need_laplace) laplace_worst = laplace_suite(as, cfg, points, nullptr);
  if (as.two_center) laplace_suite(as, cfg, points, &rep.notes);

  for (const auto& c : cfg.checks) {
    CheckResult cr;
    cr.name = c.kind;
    cr.threshold = c.threshold;
    if (c.kind == "drift") {
      cr.measured = rep.drift.worst_rel();
      cr.pass = cr.measured <= c.threshold;
    } else if (c.kind == "killing-residuals") {
      double worst = 0.0;
      for (const auto& r : rep.residuals) worst = std::max(worst, r.max_over_points.worst());
      cr.measured = worst;
      cr.pass = worst <= c.threshold;
    } else if (c.kind == "laplace") {
      cr.measured = laplace_worst;
      cr.pass = laplace_worst <= c.threshold;
    } else if (c.kind == "conic-identity") {
      // K.x - beta r = J^2 - q^2 g^2 pointwise along the trajectory.
      double qg = cfg.q * as.spec.g;
      Vec3 J0 = angular_momentum(traj.states.front(), as.spec.g);
      double target = norm2(J0) - qg * qg;
      double worst = 0.0;
      for (const auto& s : traj.states) {
        Vec3 K = runge_lenz_radial(s, as.spec.g, as.beta);
        worst = std::max(worst, std::abs(dot(K, s.x) - as.beta * norm(s.x) - target));
      }
      cr.measured = worst;
      cr.pass = worst <= c.threshold;
    } else if (c.kind == "sphere-confinement") {
      double worst_dev = 0.0, worst_angle = 0.0;
      for (const auto& s : traj.states) {
        double dev = std::abs(norm(s.x - as.sphere.center) - as.sphere.radius) / as.sphere.radius;
        worst_dev = std::max(worst_dev, dev);
        MetricSample ms = metric_eval(as.spec, s.x);
        EomRhs r = eom_rhs(s, as.spec);
        Vec3 v = s.Pi / ms.f;
        Vec3 fdvdt = r.dPi - dot(v, ms.grad_f) * v;  // f dv/dt
        Vec3 radial = s.x - as.sphere.center;
        double c0 = dot(fdvdt, radial) / (norm(fdvdt) * norm(radial));
        worst_angle = std::max(worst_angle, std::acos(std::clamp(std::abs(c0), 0.0, 1.0)));
      }
      cr.measured = worst_dev;
      cr.pass = worst_dev <= c.threshold && worst_angle <= c.angle_threshold;
      rep.notes.push_back("tangency: max angle(f dv/dt, x - rho a) = " +
                          std::to_string(worst_angle) + " rad");
    }
    rep.all_pass &= cr.pass;
    rep.checks.push_back(cr);
  }

  // Output files.
  std::filesystem::create_directories(cfg.out_dir);
  rep.csv_path = cfg.out_dir + "/" + cfg.name + ".csv";
  rep.drift_json_path = cfg.out_dir + "/" + cfg.name + ".drift.json";
  rep.residual_json_path = cfg.out_dir + "/" + cfg.name + ".residuals.json";
  write_csv(rep.csv_path, traj);
  {
    json jd{{"schema", 1},
            {"scenario", cfg.name},
            {"seed", cfg.seed},
            {"E", rep.E},
            {"beta", rep.beta},
            {"gamma", rep.gamma},
            {"drift", drift_to_json(rep.drift)},
            {"checks", checks_to_json(rep.checks)},
            {"notes", rep.notes},
            {"pass", rep.all_pass}};
    std::ofstream(rep.drift_json_path) << jd.dump(2) << "\n";
  }
  {
    json jr{{"schema", 1},
            {"scenario", cfg.name},
            {"seed", cfg.seed},
            {"residuals", residuals_to_json(rep.residuals)}};
    std::ofstream(rep.residual_json_path) << jr.dump(2) << "\n";
  }
  return rep;
}

RunReport run_killing_checks(const ScenarioConfig& cfg) {
  Assembled as = assemble(cfg);
  RunReport rep;
  rep.scenario = cfg.name;
  rep.seed = cfg.seed;
  rep.E = as.E;
  rep.beta = as.beta;
  rep.gamma = as.gamma;
  rep.notes = as.notes;

  std::mt19937_64 rng = seeded_rng(cfg.seed);
  std::vector<Vec3> points = sample_points(as, rng, cfg.residual_points);
  rep.residuals = residual_suite(as, cfg, points);
  double laplace_worst = laplace_suite(as, cfg, points, as.two_center ? &rep.notes : nullptr);

  double thr = 1e-8, laplace_thr = 1e-6;
  for (const auto& c : cfg.checks) {
    if (c.kind == "killing-residuals") thr = c.threshold;
    if (c.kind == "laplace") laplace_thr = c.threshold;
  }
  double worst = 0.0;
  for (const auto& r : rep.residuals) worst = std::max(worst, r.max_over_points.worst());
  rep.checks.push_back({"killing-residuals", worst <= thr, worst, thr});
  if (!as.two_center)
    rep.checks.push_back({"laplace", laplace_worst <= laplace_thr, laplace_worst, laplace_thr});
  for (const auto& c : rep.checks) rep.all_pass &= c.pass;
  return rep;
}

std::string report_to_json(const RunReport& rep) {
  json j{{"schema", 1},
         {"scenario", rep.scenario},
         {"seed", rep.seed},
         {"E", rep.E},
         {"beta", rep.beta},
         {"gamma", rep.gamma},
         {"drift", drift_to_json(rep.drift)},
         {"residuals", residuals_to_json(rep.residuals)},
         {"checks", checks_to_json(rep.checks)},
         {"notes", rep.notes},
         {"pass", rep.all_pass}};
  return j.dump(2);
}

}  // namespace kkflow
