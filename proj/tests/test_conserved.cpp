#include <doctest.h>

#include <array>
#include <cmath>
#include <numbers>
#include <random>

#include "kkflow/conserved.hpp"
#include "kkflow/integrate.hpp"
#include "oracles.hpp"

using namespace kkflow;
using test::random_direction;
using test::random_domain_point;

TEST_SUITE_BEGIN("conserved");

TEST_CASE("angular momentum values") {
  PhaseState st{{1, 0, 0}, {0, 1, 0}, 0.0};
  CHECK(norm(angular_momentum(st, 1.0) - Vec3{0, 0, 1}) == 0.0);
  st.q = 1.0;
  CHECK(norm(angular_momentum(st, 2.0) - Vec3{-2, 0, 1}) == 0.0);
}

TEST_CASE("runge-lenz vanishes on the circular Kepler orbit") {
  PhaseState st{{1, 0, 0}, {0, 1, 0}, 0.0};
  CHECK(norm(runge_lenz_radial(st, 0.0, -1.0)) < 1e-15);
}

TEST_CASE("theorem 3: original taub-nut needs no external potential") {
  double q = 0.5, E = 0.37, m = 1.0;
  double beta = -4.0 * m * (E - q * q);
  double gamma = 0.5 * q * q - E;
  MetricSpec tn = MetricSpec::taub_nut(m);
  tn.U = theorem3_potential(q, beta, gamma, E);
  for (double r = 0.1; r <= 100.0; r *= 1.37) {
    MetricSample s = metric_eval(tn, {r, 0, 0});
    CHECK(std::abs(s.U) < 1e-12);
    CHECK(norm(s.grad_U) < 1e-12);
  }
}

TEST_CASE("theorem 3: lee-lee potential is a gamma shift") {
  double q = 0.5, E = 0.43, m = 1.0, a0 = 0.8;
  double beta = -4.0 * m * (E - q * q);
  double gamma = 0.5 * q * q - E + 0.5 * a0 * a0;  // E -> E - a0^2/2 in the brackets
  MetricSpec tn = MetricSpec::taub_nut(m);
  tn.U = theorem3_potential(q, beta, gamma, E);
  for (double r = 0.2; r <= 50.0; r *= 1.41) {
    MetricSample s = metric_eval(tn, {r, 0, 0});
    double lee_lee = 0.5 * a0 * a0 / s.f;
    CHECK(s.U == doctest::Approx(lee_lee).epsilon(1e-12));
  }
}

TEST_CASE("theorem 3: flat consistency") {
  double q = 0.7, E = 0.5 * q * q;
  MetricSpec flat = MetricSpec::flat_kepler();
  flat.U = theorem3_potential(q, 0.0, 0.0, E);
  MetricSample s = metric_eval(flat, {2, 1, -1});
  CHECK(std::abs(s.U) < 1e-15);
}

TEST_CASE("two-center sphere: closed form and brute-force membership") {
  TwoCenterSpec tc{1.0, 8.0, {0, 0, 1}, 1.0};
  SphereSpec sp = two_center_sphere(tc);
  CHECK(sp.rho == doctest::Approx(5.0 / 3.0).epsilon(1e-14));
  CHECK(norm(sp.center - Vec3{0, 0, 5.0 / 3.0}) < 1e-14);
  CHECK(sp.radius == doctest::Approx(4.0 / 3.0).epsilon(1e-14));

  std::mt19937_64 rng(7);
  for (int t = 0; t < 50; ++t) {
    Vec3 x = sp.center + sp.radius * random_direction(rng);
    double d1 = norm(x - tc.a), d2 = norm(x + tc.a);
    CHECK(std::abs(tc.m2 / (d2 * d2 * d2) - tc.m1 / (d1 * d1 * d1)) < 1e-10);
  }
}

TEST_CASE("two-center sphere: median plane and collapse limits") {
  SphereSpec eq = two_center_sphere({1.0, 1.0, {0, 0, 1}, 1.0});
  CHECK(eq.median_plane);

  SphereSpec big = two_center_sphere({1.0, 1e12, {0, 0, 1}, 1.0});
  CHECK(big.rho > 1.0);
  CHECK(big.rho < 1.0 + 1e-6);
  CHECK(big.radius < 1e-3);
}

TEST_CASE("two-center observables: substitution and q = 0") {
  TwoCenterSpec tc{1.0, 1.0, {0, 0, 1}, 1.0};
  PhaseState st{{1, 0, 0}, {0, 1, 0}, 1.0};
  TwoCenterObservables obs = two_center_observables(st, tc, -0.5);
  CHECK(obs.Ja == doctest::Approx(1.0).epsilon(1e-14));  // charge term cancels by symmetry

  st.q = 0.0;
  obs = two_center_observables(st, tc, -0.5);
  double La = dot(cross(st.x, st.Pi), tc.axis());
  double Pa = dot(st.Pi, tc.axis());
  CHECK(obs.Ja == La);
  CHECK(obs.Q == La * La + Pa * Pa);
  CHECK(!obs.Ka_valid);
}

TEST_CASE("two-center observables reduce to the radial construction") {
  // one NUT charge at the origin: J_a is the axis component of J with g = m1
  TwoCenterSpec tc{1.5, 0.0, {0, 0, 1e-10}, 1.0};
  std::mt19937_64 rng(15);
  std::normal_distribution<double> nd(0.0, 0.5);
  for (int t = 0; t < 20; ++t) {
    PhaseState st{2.0 * random_direction(rng), {nd(rng), nd(rng), nd(rng)}, 0.6};
    TwoCenterObservables obs = two_center_observables(st, tc, -0.3);
    Vec3 J = angular_momentum(st, tc.m1);
    CHECK(std::abs(obs.Ja - dot(J, tc.axis())) < 1e-9);
  }
}

TEST_CASE("two-center effective potential values") {
  TwoCenterSpec tc{1.0, 1.0, {0, 0, 1}, 1.0};
  CHECK(two_center_effective_potential(tc, 0.0, 0.0, 0.0, {0.5, 0.5, 0.5}) == 0.0);
  double q = 0.7, beta = -0.4, gamma = 0.3;
  // midpoint: S = 2
  CHECK(two_center_effective_potential(tc, q, beta, gamma, {0, 0, 0}) ==
        doctest::Approx(2.0 * q * q + 2.0 * beta + gamma).epsilon(1e-14));
}

TEST_CASE("conic identity and J.K hold pointwise") {
  double q = 0.5, g = 4.0, beta = -0.25;
  std::mt19937_64 rng(23);
  std::normal_distribution<double> nd(0.0, 0.5);
  for (int t = 0; t < 50; ++t) {
    PhaseState st{3.0 * random_direction(rng), {nd(rng), nd(rng), nd(rng)}, q};
    Vec3 J = angular_momentum(st, g);
    Vec3 K = runge_lenz_radial(st, g, beta);
    double lhs = dot(K, st.x) - beta * norm(st.x);
    double rhs = norm2(J) - q * q * g * g;
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-8));
    CHECK(dot(J, K) == doctest::Approx(-beta * q * g).epsilon(1e-10));
  }
}

TEST_CASE("winding-string and extended taub-nut conservation") {
  IntegratorConfig cfg;
  cfg.rel_tol = 1e-12;
  cfg.abs_tol = 1e-14;
  cfg.t_max = 20.0;
  cfg.sample_interval = 0.05;

  {
    MetricSpec ws = MetricSpec::winding_string();
    PhaseState st{{4, 0, 0}, {-0.3, 0.25, 0.1}, 0.5};
    double E = hamiltonian(st, ws);
    double beta = -st.q * st.q;  // K = xdot cross J - q^2 x/r with f = 1
    (void)E;
    Trajectory traj = integrate(st, ws, cfg);
    ObservableContext ctx;
    ctx.spec = ws;
    ctx.g = ws.g;
    ctx.beta = beta;
    DriftReport rep = drift_report(traj, make_observables({"Kx", "Ky", "Kz"}, ctx));
    for (const auto& e : rep.entries) CHECK(e.max_rel_dev < 1e-8);
  }
  {
    MetricSpec et = MetricSpec::extended_taub_nut(1.2, 1.0, 0.3, 0.5);
    PhaseState st{{5, 0, 0}, {-0.4, 0.35, 0.0}, 0.5};
    double E = hamiltonian(st, et);
    double beta = -et.ea * E + 0.5 * et.ed * st.q * st.q;
    Trajectory traj = integrate(st, et, cfg);
    ObservableContext ctx;
    ctx.spec = et;
    ctx.g = et.g;
    ctx.beta = beta;
    DriftReport rep = drift_report(traj, make_observables({"H", "Kx", "Ky", "Kz"}, ctx));
    for (const auto& e : rep.entries) CHECK(e.max_rel_dev < 1e-8);
  }
}

TEST_CASE("lift: vanishing gauge potential reduces to the bare arrays") {
  MetricSpec tn = MetricSpec::taub_nut(1.0);
  double q = 0.5, beta = -0.3;
  Vec3 n{0, 0, 1};
  KillingCoefficients rl = runge_lenz_coefficients(tn, n, q, beta);
  LiftedTensor lift = lift_killing_stackel(rl, tn, q, [](const Vec3&) { return Vec3{}; });
  Vec3 x{1.3, -0.7, 0.4};
  auto comp = lift.components(x);
  double f = metric_eval(tn, x).f;
  Vec3 ci = rl.Ci(x) / f;
  double c0 = rl.C(x);
  for (int i = 0; i < 3; ++i) CHECK(comp[i][3] == doctest::Approx(ci[i] / q).epsilon(1e-14));
  CHECK(comp[3][3] == doctest::Approx(2.0 * c0 / (q * q)).epsilon(1e-14));
}

TEST_CASE("lift round-trip: 4D quadratic form equals the reduced polynomial") {
  MetricSpec tn = MetricSpec::taub_nut(1.0);
  double q = 0.5, beta = -0.3;
  Vec3 n = normalized(Vec3{0.3, -0.2, 0.93});
  KillingCoefficients rl = runge_lenz_coefficients(tn, n, q, beta);
  LiftedTensor lift = lift_killing_stackel(rl, tn, q);
  std::mt19937_64 rng(41);
  std::normal_distribution<double> nd(0.0, 0.5);
  for (int t = 0; t < 100; ++t) {
    Vec3 x = random_domain_point(tn, rng);
    if (x.x * x.x + x.y * x.y < 0.04) continue;  // off the gauge string
    Vec3 Pi{nd(rng), nd(rng), nd(rng)};
    Vec3 A = gauge_potential(tn, x);
    std::array<double, 4> p{Pi.x + q * A.x, Pi.y + q * A.y, Pi.z + q * A.z, q};
    double lifted = lift.quadratic_form(x, p);

    double f = metric_eval(tn, x).f;
    Vec3 ai = rl.Ci(x) / f;
    Mat3 aij = rl.Cij(x);
    double quad = 0.0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) quad += aij[i][j] / f * Pi[i] * Pi[j];
    double reduced = rl.C(x) + dot(ai, Pi) + 0.5 * quad;
    CHECK(lifted == doctest::Approx(reduced).epsilon(1e-10));

    // and the reduced polynomial is the Runge-Lenz projection itself
    PhaseState st{x, Pi, q};
    CHECK(reduced ==
          doctest::Approx(dot(runge_lenz_radial(st, tn.g, beta), n)).epsilon(1e-10));
  }
}

TEST_CASE("lift: gauge shift leaves the quadratic form invariant") {
  MetricSpec tn = MetricSpec::taub_nut(1.0);
  double q = 0.5, beta = -0.3;
  Vec3 n{0, 0, 1};
  KillingCoefficients rl = runge_lenz_coefficients(tn, n, q, beta);
  auto chi_grad = [](const Vec3& p) { return Vec3{0.3, 0.1 * p.z, 0.1 * p.y}; };
  GaugeField A1 = [tn](const Vec3& p) { return gauge_potential(tn, p); };
  GaugeField A2 = [tn, chi_grad](const Vec3& p) {
    return gauge_potential(tn, p) + chi_grad(p);
  };
  LiftedTensor l1 = lift_killing_stackel(rl, tn, q, A1);
  LiftedTensor l2 = lift_killing_stackel(rl, tn, q, A2);
  std::mt19937_64 rng(43);
  std::normal_distribution<double> nd(0.0, 0.5);
  for (int t = 0; t < 30; ++t) {
    Vec3 x = random_domain_point(tn, rng);
    if (x.x * x.x + x.y * x.y < 0.04) continue;
    Vec3 Pi{nd(rng), nd(rng), nd(rng)};
    auto mom = [&](const GaugeField& A) {
      Vec3 a = A(x);
      return std::array<double, 4>{Pi.x + q * a.x, Pi.y + q * a.y, Pi.z + q * a.z, q};
    };
    auto p1 = mom(A1), p2 = mom(A2);
    CHECK(l1.quadratic_form(x, p1) == doctest::Approx(l2.quadratic_form(x, p2)).epsilon(1e-10));
  }
}

TEST_CASE("lift requires q != 0") {
  MetricSpec tn = MetricSpec::taub_nut(1.0);
  KillingCoefficients rl = runge_lenz_coefficients(tn, {0, 0, 1}, 0.5, -0.3);
  CHECK_THROWS_AS(lift_killing_stackel(rl, tn, 0.0), std::invalid_argument);
}

TEST_CASE("bargmann tensor components on the axis") {
  auto V = [](double r) { return -1.0 / r; };
  Vec3 n{0, 0, 1};
  LiftedTensor bt = bargmann_kepler_tensor(n, V);
  double r = 2.5;
  auto comp = bt.components({0, 0, r});
  CHECK(comp[2][2] == doctest::Approx(0.0));
  CHECK(comp[0][0] == doctest::Approx(2.0 * r).epsilon(1e-14));
  CHECK(comp[1][1] == doctest::Approx(2.0 * r).epsilon(1e-14));
  CHECK(comp[3][3] == doctest::Approx(2.0 * r * V(r)).epsilon(1e-14));
}

TEST_CASE("bargmann trace removal is trace-free under the 5D metric") {
  // C^{ab} = (eta_hat/g^c_c) g^{ab} - eta^{ab} with eta^{ij} = n^i x^j + n^j x^i
  // - eta_hat delta^{ij}, eta^{45} = eta^{54} = eta_hat
  Vec3 n = normalized(Vec3{0.4, -0.1, 0.9});
  Vec3 x{1.2, 0.7, -0.5};
  double V = -1.0 / norm(x);
  double eta_hat = dot(n, x);

  double g_lo[5][5] = {};  // Bargmann metric: dx^2 + 2 dx4 dx5 - 2V (dx5)^2
  for (int i = 0; i < 3; ++i) g_lo[i][i] = 1.0;
  g_lo[3][4] = g_lo[4][3] = 1.0;
  g_lo[4][4] = -2.0 * V;
  double g_up[5][5] = {};
  for (int i = 0; i < 3; ++i) g_up[i][i] = 1.0;
  g_up[3][4] = g_up[4][3] = 1.0;
  g_up[3][3] = 2.0 * V;

  double eta[5][5] = {};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) eta[i][j] = n[i] * x[j] + n[j] * x[i] - eta_hat * (i == j);
  eta[3][4] = eta[4][3] = eta_hat;

  // eta_hat round-trip: eta^{ab} g_ab = eta_hat
  double contracted = 0.0;
  for (int a = 0; a < 5; ++a)
    for (int b = 0; b < 5; ++b) contracted += eta[a][b] * g_lo[a][b];
  CHECK(contracted == doctest::Approx(eta_hat).epsilon(1e-12));

  double C[5][5];
  for (int a = 0; a < 5; ++a)
    for (int b = 0; b < 5; ++b) C[a][b] = (eta_hat / 5.0) * g_up[a][b] - eta[a][b];
  double trace = 0.0;
  for (int a = 0; a < 5; ++a)
    for (int b = 0; b < 5; ++b) trace += C[a][b] * g_lo[a][b];
  CHECK(std::abs(trace) < 1e-12);
}

TEST_CASE("bargmann scalar is conserved along a short Kepler arc") {
  MetricSpec kepler = MetricSpec::flat_kepler(1.0);
  IntegratorConfig cfg;
  cfg.rel_tol = 1e-13;
  cfg.abs_tol = 1e-15;
  cfg.t_max = 10.0;
  cfg.sample_interval = 0.02;
  PhaseState st{{1.2, 0, 0}, {0, 0.8, 0.15}, 0.0};
  Trajectory traj = integrate(st, kepler, cfg);
  ObservableContext ctx;
  ctx.spec = kepler;
  ctx.bargmann_n = Vec3{1, 0, 0};
  ctx.kepler_k = 1.0;
  DriftReport rep = drift_report(traj, make_observables({"KBn"}, ctx));
  CHECK(rep.entries[0].max_rel_dev < 1e-9);
}

TEST_SUITE_END();
