#include <benchmark/benchmark.h>

#include "bhe/closed_form.hpp"
#include "bhe/fock_oracle.hpp"
#include "bhe/gillespie.hpp"
#include "bhe/moment_engine.hpp"
#include "bhe/particle_engine.hpp"
#include "bhe/wave_trajectory.hpp"

using namespace bhe;

namespace {

EngineParams reference() { return EngineParams::from_occupations(1, 1, 1, 1, 2, 0.1); }

void BM_ClosedForm(benchmark::State& state) {
  const auto p = reference();
  for (auto _ : state) {
    benchmark::DoNotOptimize(closed_form::quantum_stats(p));
    benchmark::DoNotOptimize(closed_form::particle_stats(p));
  }
}
BENCHMARK(BM_ClosedForm);

void BM_MomentQuantum(benchmark::State& state) {
  const auto p = reference();
  for (auto _ : state) benchmark::DoNotOptimize(moments::evaluate(p, moments::ModelSpec::quantum()));
}
BENCHMARK(BM_MomentQuantum);

void BM_ParticleMoments(benchmark::State& state) {
  const auto p = reference();
  for (auto _ : state) benchmark::DoNotOptimize(particle::moment_stats(p));
}
BENCHMARK(BM_ParticleMoments);

void BM_ParticleDrazin(benchmark::State& state) {
  const auto p = EngineParams::from_occupations(1, 1, 1, 1, static_cast<double>(state.range(0)), 0.1);
  for (auto _ : state) benchmark::DoNotOptimize(particle::drazin_stats(p));
}
BENCHMARK(BM_ParticleDrazin)->Arg(2)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_FockOracle(benchmark::State& state) {
  const auto p = reference();
  const int n_max = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(fock::evaluate(p, n_max));
  state.counters["dimension"] = static_cast<double>(fock::BlockBasis(n_max).dimension());
}
BENCHMARK(BM_FockOracle)->Arg(10)->Arg(20)->Arg(30)->Unit(benchmark::kMillisecond);

void BM_WaveSteps(benchmark::State& state) {
  const WaveParams p{reference(), 0.0};
  wave::Integrator it(p, 0.01);
  Rng rng = make_rng(1, 0);
  it.reset_stationary(rng);
  for (auto _ : state) {
    it.step(rng);
    benchmark::DoNotOptimize(it.current());
  }
}
BENCHMARK(BM_WaveSteps);

void BM_WaveEnsemble(benchmark::State& state) {
  const WaveParams p{reference(), 0.0};
  wave::TrajectoryConfig c;
  c.n_traj = 8;
  c.t_total = 200;
  c.workers = 1;
  for (auto _ : state) benchmark::DoNotOptimize(wave::estimate_power_stats(p, c));
}
BENCHMARK(BM_WaveEnsemble)->Unit(benchmark::kMillisecond);

void BM_Gillespie(benchmark::State& state) {
  const auto p = reference();
  particle::GillespieConfig c;
  c.n_traj = 8;
  c.t_total = 500;
  c.workers = 1;
  for (auto _ : state) benchmark::DoNotOptimize(particle::gillespie_simulate(p, c));
}
BENCHMARK(BM_Gillespie)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
