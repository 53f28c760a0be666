#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "bhe/closed_form.hpp"
#include "bhe/wave_trajectory.hpp"
#include "oracles.hpp"

using namespace bhe;
using cd = std::complex<double>;

namespace {

wave::TrajectoryConfig small_config(std::uint64_t seed) {
  wave::TrajectoryConfig c;
  c.t_total = 400.0;
  c.n_traj = 16;
  c.seed = seed;
  c.workers = 2;
  return c;
}

}  // namespace

TEST(WaveTrajectory, NoiselessStepIsEuler) {
  const auto p = EngineParams::from_occupations(0.7, 1.0, 0.5, 1.0, 0.0, 0.0);
  wave::Integrator it(WaveParams{p, 0.0}, 0.01);
  it.set_state(cd(1.0, 0.5), cd(-0.2, 0.3));
  const double zeros[4] = {0, 0, 0, 0};
  it.step_with(zeros);
  const cd i(0, 1);
  const cd ah = cd(1.0, 0.5) + (-0.5 * cd(1.0, 0.5) - i * 0.7 * cd(-0.2, 0.3)) * 0.01;
  const cd ac = cd(-0.2, 0.3) + (-0.25 * cd(-0.2, 0.3) - i * 0.7 * cd(1.0, 0.5)) * 0.01;
  EXPECT_NEAR(std::abs(it.a_h() - ah), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(it.a_c() - ac), 0.0, 1e-15);
  const double cur = (i * 0.7 * (std::conj(ah) * ac - std::conj(ac) * ah)).real();
  EXPECT_NEAR(it.current(), cur, 1e-15);
}

TEST(WaveTrajectory, NoiseScaling) {
  const auto p = EngineParams::from_occupations(0.0, 4.0, 1.0, 1.0, 2.0, 0.5);
  wave::Integrator it(WaveParams{p, 0.0}, 0.01);
  it.set_state(0.0, 0.0);
  const double ones[4] = {1, 0, 0, 1};
  it.step_with(ones);
  // -sqrt(kappa) sqrt(Phi dt / 2) per unit normal
  EXPECT_NEAR(it.a_h().real(), -2.0 * std::sqrt(2.0 * 0.01 / 2.0), 1e-15);
  EXPECT_NEAR(it.a_c().imag(), -std::sqrt(0.5 * 0.01 / 2.0), 1e-15);
}

TEST(WaveTrajectory, ConfigValidation) {
  const WaveParams p{oracle::fig2(), 0.0};
  auto c = small_config(1);
  EXPECT_NO_THROW(wave::validate_config(p, c));
  c.dt = 0.05;
  EXPECT_THROW(wave::validate_config(p, c), ParameterError);
  c = small_config(1);
  c.t_burn = 5.0;
  EXPECT_THROW(wave::validate_config(p, c), ParameterError);
  c = small_config(1);
  c.t_total = 30.0;
  EXPECT_THROW(wave::validate_config(p, c), ParameterError);
  c = small_config(1);
  c.n_traj = 0;
  EXPECT_THROW(wave::validate_config(p, c), ParameterError);
  const WaveParams strong{oracle::fig2(10.0), 0.0};
  EXPECT_THROW(wave::validate_config(strong, small_config(1)), ParameterError);
}

TEST(WaveTrajectory, ReferencePointWithinError) {
  const WaveParams p{oracle::fig2(), 0.0};
  const auto e = wave::estimate_power_stats(p, small_config(21));
  EXPECT_LT(std::abs(e.mean_power.mean - oracle::kMeanPower), 4.0 * e.mean_power.std_error);
  ASSERT_TRUE(e.noise);
  EXPECT_LT(std::abs(e.noise->mean - oracle::kWaveNoise), 4.0 * e.noise->std_error)
      << e.noise->mean << " +- " << e.noise->std_error;
  EXPECT_GT(e.mean_power.diagnostics.effective_sample_size, 1.0);
}

TEST(WaveTrajectory, FewTrajectoriesGiveNoNoise) {
  const WaveParams p{oracle::fig2(), 0.0};
  auto c = small_config(3);
  c.n_traj = kMinTrajectoriesForNoise - 1;
  c.t_total = 100.0;
  const auto e = wave::estimate_power_stats(p, c);
  EXPECT_FALSE(e.noise);
  EXPECT_FALSE(e.noise_batch_means);
}

TEST(WaveTrajectory, SeedDeterminismAndWorkerIndependence) {
  const WaveParams p{oracle::fig2(), 0.0};
  auto c = small_config(9);
  c.t_total = 100.0;
  c.n_traj = 8;
  c.workers = 1;
  const auto a = wave::estimate_power_stats(p, c);
  c.workers = 4;
  const auto b = wave::estimate_power_stats(p, c);
  EXPECT_EQ(a.mean_power.mean, b.mean_power.mean);
  EXPECT_EQ(a.noise->mean, b.noise->mean);
  EXPECT_EQ(a.mean_power.seed, 9u);
  c.seed = 10;
  EXPECT_NE(wave::estimate_power_stats(p, c).mean_power.mean, a.mean_power.mean);
}

TEST(WaveTrajectory, TraceMatchesEnsembleMember) {
  const WaveParams p{oracle::fig2(), 0.0};
  auto c = small_config(4);
  c.t_total = 60.0;
  const auto t1 = wave::simulate_wave(p, c, 2, 10);
  const auto t2 = wave::simulate_wave(p, c, 2, 10);
  ASSERT_FALSE(t1.empty());
  EXPECT_EQ(t1.back().a_h, t2.back().a_h);
  EXPECT_NEAR(t1[1].t - t1[0].t, 0.1, 1e-12);
  std::ostringstream os;
  wave::write_trace_csv(os, t1);
  EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "t,re_a_h,im_a_h,re_a_c,im_a_c,current");
}

TEST(WaveTrajectory, StationaryResetHasThermalPower) {
  const auto base = EngineParams::from_occupations(0.0, 1.0, 1.0, 1.0, 3.0, 0.5);
  wave::Integrator it(WaveParams{base, 0.5}, 0.01);
  Rng rng = make_rng(3, 0);
  double sum = 0.0;
  const int n = 20000;
  for (int k = 0; k < n; ++k) {
    it.reset_stationary(rng);
    sum += std::norm(it.a_h());
  }
  EXPECT_NEAR(sum / n, 3.5, 0.1);
}
