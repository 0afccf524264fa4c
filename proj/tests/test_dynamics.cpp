#include <doctest.h>

#include <random>

#include "kkflow/conserved.hpp"
#include "kkflow/dynamics.hpp"
#include "kkflow/integrate.hpp"
#include "oracles.hpp"

using namespace kkflow;
using test::random_direction;
using test::random_domain_point;

TEST_SUITE_BEGIN("dynamics");

TEST_CASE("hamiltonian values") {
  MetricSpec flat = MetricSpec::flat_kepler();
  CHECK(hamiltonian({{2, 0, 0}, {1, 0, 0}, 0.0}, flat) == doctest::Approx(0.5).epsilon(1e-14));

  MetricSpec tn = MetricSpec::taub_nut(1.0);
  CHECK(hamiltonian({{1, 0, 0}, {0, 0, 0}, 1.0}, tn) == doctest::Approx(2.5).epsilon(1e-14));
}

TEST_CASE("hamiltonian equals the energy expression at random states") {
  MetricSpec tn = MetricSpec::lee_lee(1.0, 0.7);
  std::mt19937_64 rng(21);
  std::normal_distribution<double> nd(0.0, 0.5);
  for (int t = 0; t < 50; ++t) {
    PhaseState st{random_domain_point(tn, rng), {nd(rng), nd(rng), nd(rng)}, 0.6};
    MetricSample s = metric_eval(tn, st.x);
    double expected = 0.5 * norm2(st.Pi) / s.f + 0.5 * st.q * st.q / s.h + s.U;
    CHECK(hamiltonian(st, tn) == doctest::Approx(expected).epsilon(1e-14));
  }
}

TEST_CASE("free particle and Kepler force") {
  MetricSpec flat = MetricSpec::flat_kepler();
  EomRhs r = eom_rhs({{0.3, 0.1, -2}, {0.4, -0.2, 1}, 0.0}, flat);
  CHECK(norm(r.dx - Vec3{0.4, -0.2, 1}) == 0.0);
  CHECK(norm(r.dPi) == 0.0);

  MetricSpec kepler = MetricSpec::flat_kepler(1.0);  // U = -1/r
  EomRhs k = eom_rhs({{1, 0, 0}, {0, 1, 0}, 0.0}, kepler);
  CHECK(k.dPi.x == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(std::abs(k.dPi.y) < 1e-15);
  CHECK(std::abs(k.dPi.z) < 1e-15);
}

TEST_CASE("eom_rhs is consistent with a short integration step") {
  MetricSpec tn = MetricSpec::taub_nut(1.0);
  PhaseState st{{2.0, 0.5, -0.4}, {0.3, 0.2, -0.1}, 0.5};
  IntegratorConfig cfg;
  cfg.rel_tol = 1e-12;
  cfg.abs_tol = 1e-14;
  cfg.sample_interval = 1e-3;
  cfg.t_max = 2e-3;
  Trajectory traj = integrate(st, tn, cfg);
  // centered difference of Pi across the first two samples vs the rhs at the midpoint
  REQUIRE(traj.size() >= 3);
  double dt = traj.t[2] - traj.t[0];
  Vec3 dPi_num = (traj.states[2].Pi - traj.states[0].Pi) / dt;
  EomRhs r = eom_rhs(traj.states[1], tn);
  CHECK(norm(dPi_num - r.dPi) < 1e-6);  // O(dt^2)
}

TEST_CASE("fundamental poisson brackets") {
  MetricSpec spec = MetricSpec::taub_nut(0.25);  // g = 1
  PhaseState st{{0, 0, 2}, {0.3, -0.1, 0.2}, 1.0};

  Observable x1{"x1", "", [](const PhaseState& s) { return s.x.x; }, nullptr, nullptr};
  Observable Pi1{"Pi1", "", [](const PhaseState& s) { return s.Pi.x; }, nullptr, nullptr};
  Observable Pi2{"Pi2", "", [](const PhaseState& s) { return s.Pi.y; }, nullptr, nullptr};

  CHECK(poisson_bracket(x1, Pi1, st, spec) == doctest::Approx(1.0).epsilon(1e-9));
  // {Pi_1, Pi_2} = q F_12 = q B_z; B(0,0,2) = (0,0,1/4)
  CHECK(poisson_bracket(Pi1, Pi2, st, spec) == doctest::Approx(0.25).epsilon(1e-9));
}

TEST_CASE("angular momentum commutes with the hamiltonian") {
  MetricSpec spec = MetricSpec::taub_nut(1.0);
  std::mt19937_64 rng(77);
  std::normal_distribution<double> nd(0.0, 0.4);
  Observable H{"H", "", [spec](const PhaseState& s) { return hamiltonian(s, spec); }, nullptr,
               nullptr};
  Observable Jz{"Jz", "",
                [g = spec.g](const PhaseState& s) { return angular_momentum(s, g).z; }, nullptr,
                nullptr};
  for (int t = 0; t < 20; ++t) {
    PhaseState st{random_domain_point(spec, rng), {nd(rng), nd(rng), nd(rng)}, 0.5};
    CHECK(std::abs(poisson_bracket(Jz, H, st, spec)) < 1e-6);
  }
}

TEST_CASE("bracket antisymmetry for random smooth observables") {
  MetricSpec spec = MetricSpec::two_center(1.0, 8.0, {0, 0, 1});
  std::mt19937_64 rng(31);
  std::normal_distribution<double> nd(0.0, 0.5);
  for (int t = 0; t < 10; ++t) {
    Vec3 a = random_direction(rng), b = random_direction(rng);
    double wa = nd(rng), wb = nd(rng);
    Observable A{"A", "",
                 [a, wa](const PhaseState& s) {
                   return dot(a, s.x) * dot(a, s.Pi) + wa * norm2(s.Pi);
                 },
                 nullptr, nullptr};
    Observable B{"B", "",
                 [b, wb](const PhaseState& s) {
                   return std::sin(dot(b, s.x)) + wb * dot(b, s.Pi);
                 },
                 nullptr, nullptr};
    PhaseState st{random_domain_point(spec, rng, 0.8, 5.0, 0.6), {nd(rng), nd(rng), nd(rng)},
                  0.5};
    double ab = poisson_bracket(A, B, st, spec);
    double ba = poisson_bracket(B, A, st, spec);
    CHECK(std::abs(ab + ba) < 1e-9 * std::max(1.0, std::abs(ab)));
  }
}

TEST_CASE("dH/dt vanishes along the flow") {
  MetricSpec spec = MetricSpec::taub_nut(1.0);
  std::mt19937_64 rng(19);
  std::normal_distribution<double> nd(0.0, 0.4);
  for (int t = 0; t < 20; ++t) {
    PhaseState st{random_domain_point(spec, rng), {nd(rng), nd(rng), nd(rng)}, 0.5};
    EomRhs r = eom_rhs(st, spec);
    // directional derivative of H along (dx, dPi) by symmetric difference
    double eps = 1e-6;
    PhaseState p = st, m = st;
    p.x += eps * r.dx;
    p.Pi += eps * r.dPi;
    m.x -= eps * r.dx;
    m.Pi -= eps * r.dPi;
    double dH = (hamiltonian(p, spec) - hamiltonian(m, spec)) / (2 * eps);
    CHECK(std::abs(dH) < 1e-9);
  }
}

TEST_CASE("effective potential: closed form matches FormPot1 evaluation") {
  // radial family: attach the admissible U, then fW(closed) == f*(U + q^2/2h + E/f - E)
  double q = 0.5, beta = -0.37, gamma = 0.12, E = 0.41;
  MetricSpec tn = MetricSpec::taub_nut(1.0);
  tn.U = theorem3_potential(q, beta, gamma, E);
  EffectivePotential pot = EffectivePotential::radial_coulomb(q, tn.g, beta, gamma, E);
  for (double r : {0.3, 0.9, 1.7, 4.2, 11.0}) {
    Vec3 x{r, 0, 0};
    double closed = pot.fw(tn, x);
    double direct = pot.fw_direct(tn, x);
    CHECK(std::abs(closed - direct) / std::max(1.0, std::abs(closed)) < 1e-12);
  }

  // two-center family
  MetricSpec tc = MetricSpec::two_center(1.0, 8.0, {0, 0, 1});
  ExternalPotential U;
  U.kind = ExternalPotential::Kind::theorem3_two_center;
  U.q = q;
  U.beta = beta;
  U.gamma = gamma;
  U.E = E;
  tc.U = U;
  EffectivePotential pot2 = EffectivePotential::two_center(q, beta, gamma, E);
  std::mt19937_64 rng(4);
  for (int t = 0; t < 20; ++t) {
    Vec3 x = random_domain_point(tc, rng, 0.8, 5.0, 0.6);
    double closed = pot2.fw(tc, x);
    double direct = pot2.fw_direct(tc, x);
    CHECK(std::abs(closed - direct) / std::max(1.0, std::abs(closed)) < 1e-12);
  }
}

TEST_CASE("two-center tangency on the equatorial circle") {
  // On the balanced equatorial state, f dv/dt points at the sphere center.
  TwoCenterSpec tc{1.0, 8.0, {0, 0, 1}, 1.0};
  SphereSpec sp = two_center_sphere(tc);
  double q = 0.5;
  for (double phi : {0.0, 1.3, 2.9}) {
    // mirror the scenario generator's balance
    Vec3 ah = sp.axis;
    Vec3 e1 = normalized(cross(ah, Vec3{1, 0, 0}));
    Vec3 e2 = cross(ah, e1);
    Vec3 u = std::cos(phi) * e1 + std::sin(phi) * e2;
    Vec3 x = sp.center + sp.radius * u;
    double d1 = norm(x - tc.a);
    double S = tc.m1 / d1 + tc.m2 / norm(x + tc.a);
    double f = tc.f0 + S;
    double mu = tc.m1 / (d1 * d1 * d1);
    double aa = norm(tc.a);
    double x2 = norm2(x);
    double beta = -q * q * (S + 2.0 * mu * sp.radius * sp.radius * x2 / (sp.rho * aa * sp.rho * aa));
    double omega = -2.0 * mu * q * x2 / (f * sp.rho * aa);
    Vec3 Pi = f * omega * cross(ah, x);

    MetricSpec spec = tc.metric();
    ExternalPotential U;
    U.kind = ExternalPotential::Kind::theorem3_two_center;
    U.q = q;
    U.beta = beta;
    U.gamma = -(0.5 * norm2(Pi) + 0.5 * q * q * S * S + beta * S);
    U.E = 0.0;
    spec.U = U;

    PhaseState st{x, Pi, q};
    MetricSample ms = metric_eval(spec, x);
    EomRhs r = eom_rhs(st, spec);
    Vec3 v = Pi / ms.f;
    Vec3 fdvdt = r.dPi - dot(v, ms.grad_f) * v;
    Vec3 radial = x - sp.center;
    double c = dot(fdvdt, radial) / (norm(fdvdt) * norm(radial));
    double angle = std::acos(std::clamp(std::abs(c), 0.0, 1.0));
    CHECK(angle < 1e-6);
  }
}

TEST_SUITE_END();
