#include <benchmark/benchmark.h>

#include "kkflow/conserved.hpp"
#include "kkflow/integrate.hpp"
#include "kkflow/killing.hpp"

using namespace kkflow;

namespace {

void BM_MetricEvalTaubNut(benchmark::State& state) {
  MetricSpec spec = MetricSpec::taub_nut(1.0);
  Vec3 x{1.3, -0.7, 0.4};
  for (auto _ : state) {
    MetricSample s = metric_eval(spec, x);
    benchmark::DoNotOptimize(s);
  }
}
BENCHMARK(BM_MetricEvalTaubNut);

void BM_MetricEvalTwoCenter(benchmark::State& state) {
  MetricSpec spec = MetricSpec::two_center(1.0, 8.0, {0, 0, 1});
  Vec3 x{1.3, -0.7, 0.4};
  for (auto _ : state) {
    MetricSample s = metric_eval(spec, x);
    benchmark::DoNotOptimize(s);
  }
}
BENCHMARK(BM_MetricEvalTwoCenter);

void BM_EomRhsTaubNut(benchmark::State& state) {
  MetricSpec spec = MetricSpec::taub_nut(1.0);
  PhaseState st{{1.3, -0.7, 0.4}, {0.2, 0.4, -0.1}, 0.5};
  for (auto _ : state) {
    EomRhs r = eom_rhs(st, spec);
    benchmark::DoNotOptimize(r);
  }
}
BENCHMARK(BM_EomRhsTaubNut);

void BM_VanHoltenResiduals(benchmark::State& state) {
  MetricSpec spec = MetricSpec::taub_nut(1.0);
  double q = 0.5, beta = -0.25;
  EffectivePotential pot = EffectivePotential::radial_coulomb(q, spec.g, beta, 0.1, 0.3);
  KillingCoefficients rl = runge_lenz_coefficients(spec, {0, 0, 1}, q, beta);
  Vec3 x{1.3, -0.7, 0.4};
  for (auto _ : state) {
    ConstraintResiduals r = van_holten_residuals(rl, spec, pot, q, x);
    benchmark::DoNotOptimize(r);
  }
}
BENCHMARK(BM_VanHoltenResiduals);

void BM_IntegrateTaubNut(benchmark::State& state) {
  MetricSpec spec = MetricSpec::taub_nut(1.0);
  PhaseState st{{8, 0, 0}, {-0.55, 0.25, 0.10}, 0.5};
  IntegratorConfig cfg;
  cfg.rel_tol = 1e-10;
  cfg.abs_tol = 1e-12;
  cfg.t_max = 10.0;
  cfg.sample_interval = 0.1;
  for (auto _ : state) {
    Trajectory traj = integrate(st, spec, cfg);
    benchmark::DoNotOptimize(traj);
  }
}
BENCHMARK(BM_IntegrateTaubNut);

}  // namespace

BENCHMARK_MAIN();
