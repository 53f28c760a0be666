#include <gtest/gtest.h>

#include <cmath>

#include "bhe/analysis.hpp"
#include "bhe/closed_form.hpp"
#include "oracles.hpp"

using namespace bhe;
using namespace bhe::analysis;

TEST(Analysis, EntropyAndTurAtReference) {
  const auto p = oracle::fig2();
  EXPECT_NEAR(affinity(p), std::log(11.0) - std::log(1.5), 1e-14);
  EXPECT_NEAR(entropy_rate(p, closed_form::mean_power(p) / p.delta()), 1.51425, 5e-6);
  EXPECT_NEAR(tur_bound(p), 1.00380, 5e-6);
  EXPECT_NEAR(*fano(closed_form::quantum_stats(p)), 2.684, 5e-4);
  EXPECT_NEAR(modified_tur_bound(p), 2.0 / 9.5, 1e-14);
}

TEST(Analysis, TemperatureAffinity) {
  const auto p = EngineParams::from_temperatures(1, 1, 1, 3.0, 1.0, 4.0, 0.5);
  EXPECT_NEAR(affinity(p), 1.0 / 0.5 - 3.0 / 4.0, 1e-12);
}

TEST(Analysis, WaveBreaksStandardTurAtWeakCoupling) {
  const auto p = oracle::fig2(0.05);
  const auto w = closed_form::wave_stats(WaveParams{p, 0.0});
  const auto r = tur_check(p, w, Model::wave);
  EXPECT_LT(*r.fano, tur_bound(p));
  EXPECT_FALSE(r.satisfies_standard);
  EXPECT_TRUE(r.satisfies_modified);
  EXPECT_TRUE(r.satisfied);
  const auto q = tur_check(p, closed_form::quantum_stats(p), Model::quantum);
  EXPECT_TRUE(q.satisfies_standard);
  EXPECT_TRUE(q.satisfied);
  // The modified bound is reached as g -> 0.
  const auto tiny = oracle::fig2(1e-4);
  EXPECT_NEAR(*closed_form::wave_stats(WaveParams{tiny, 0.0}).fano, 0.2105, 1e-4);
  EXPECT_NEAR(*closed_form::wave_stats(WaveParams{tiny, 0.0}).fano, modified_tur_bound(tiny), 1e-6);
}

TEST(Analysis, FanoGaps) {
  for (const auto& raw : oracle::grid(31, 50)) {
    const auto p = oracle::forward(raw);
    const auto gaps = fano_gaps(p);
    const double fq = *closed_form::quantum_stats(p).fano;
    const double fw = *closed_form::wave_stats(WaveParams{p, 0.0}).fano;
    const double fp = *closed_form::particle_stats(p).fano;
    EXPECT_NEAR(*gaps.quantum_wave, fq - fw, 1e-9 * fq);
    EXPECT_NEAR(*gaps.quantum_particle, fq - fp, 1e-9 * fq);
    EXPECT_GE(fq + 1e-12, fp);
    EXPECT_GE(fp, 1.0 - 1e-12);
  }
  EXPECT_FALSE(fano_gaps(EngineParams::from_occupations(1, 1, 1, 1, 0.5, 0.5)).quantum_wave);
}

TEST(Analysis, OffsetDifference) {
  const auto p = oracle::fig2();
  for (double c : {0.0, 0.5, 1.0}) {
    const double direct = closed_form::wave_noise(WaveParams{p, c}).noise - closed_form::quantum_noise(p).noise;
    EXPECT_NEAR(wave_quantum_noise_difference(p, c), direct, 1e-12);
  }
  EXPECT_NEAR(wave_quantum_noise_difference(p, 0.5), 0.4 * 0.5, 1e-14);
}

TEST(Analysis, MismatchMaximisers) {
  const double noise_x = std::sqrt((1.0 + std::sqrt(3.0)) / 4.0);
  const double gap_x = std::sqrt((3.0 + std::sqrt(57.0)) / 24.0);
  for (auto [nh, nc] : {std::pair{2.0, 0.1}, std::pair{10.0, 0.1}, std::pair{0.5, 3.0}}) {
    const auto m = find_mismatch_maxima(EngineParams::from_occupations(1, 1, 1, 1, nh, nc));
    EXPECT_NEAR(m.noise_mismatch, noise_x, 1e-4);
    EXPECT_NEAR(m.fano_gap, gap_x, 1e-4);
  }
  EXPECT_THROW(find_mismatch_maxima(EngineParams::from_occupations(1, 2, 1, 1, 2, 0.1)), ParameterError);
  EXPECT_THROW(find_mismatch_maxima(EngineParams::from_occupations(1, 1, 1, 1, 2, 2)), ParameterError);
}

TEST(Analysis, LogArgmax) {
  const double x = log_argmax([](double v) { return -std::pow(std::log(v / 3.0), 2); }, 0.01, 100.0);
  EXPECT_NEAR(x, 3.0, 1e-5);
  EXPECT_THROW(log_argmax([](double) { return 0.0; }, 1.0, 0.5), ParameterError);
}

TEST(Analysis, Routes) {
  EXPECT_EQ(parse_route("closed_form"), Route::closed_form);
  EXPECT_EQ(parse_route("fcs"), Route::fcs);
  EXPECT_FALSE(parse_route("drazin"));
  for (auto r : {Route::closed_form, Route::moment, Route::fcs, Route::monte_carlo})
    EXPECT_EQ(parse_route(to_string(r)), r);
  EXPECT_NO_THROW(check_route(Model::particle, Route::fcs));
  EXPECT_NO_THROW(check_route(Model::wave, Route::monte_carlo));
  EXPECT_THROW(check_route(Model::quantum, Route::fcs), ParameterError);
  EXPECT_THROW(check_route(Model::quantum, Route::monte_carlo), ParameterError);
  EXPECT_THROW(check_route(Model::wave, Route::fcs), ParameterError);
}

TEST(Analysis, LogGrid) {
  const auto g = log_grid(0.1, 100.0, 4);
  ASSERT_EQ(g.size(), 4u);
  EXPECT_NEAR(g[0], 0.1, 1e-15);
  EXPECT_NEAR(g[1], 1.0, 1e-14);
  EXPECT_NEAR(g[3], 100.0, 1e-12);
  EXPECT_TRUE(log_grid(1, 2, 0).empty());
  EXPECT_THROW(log_grid(-1, 2, 5), ParameterError);
}

TEST(Analysis, SweepPointEqualsDirectEvaluation) {
  SweepSpec s;
  s.base = oracle::fig2();
  s.grid = {2.5};
  s.models = {{Model::quantum, Route::moment}, {Model::particle, Route::closed_form}};
  const auto t = run_sweep(s);
  ASSERT_EQ(t.rows.size(), 1u);
  const auto p = oracle::fig2(2.5);
  EXPECT_EQ(sweep_point(s, 2.5), p);
  EXPECT_NEAR(t.rows[0].cells[0].stats->zero_freq_noise, closed_form::quantum_noise(p).noise, 1e-12);
  EXPECT_EQ(t.rows[0].cells[1].stats->zero_freq_noise, closed_form::particle_noise(p).noise);
  EXPECT_EQ(t.rows[0].tur_bound, tur_bound(p));
  EXPECT_EQ(t.x_name, "g_over_kappa");
}

TEST(Analysis, HotOccupationAxis) {
  SweepSpec s;
  s.axis = Axis::hot_occupation;
  s.base = oracle::fig2(10.0);
  s.grid = log_grid(0.2, 50.0, 7);
  const auto t = run_sweep(s);
  for (const auto& row : t.rows) {
    const auto p = EngineParams::from_occupations(10.0, 1, 1, 1, row.x, 0.1);
    EXPECT_NEAR(row.cells[1].stats->zero_freq_noise, closed_form::wave_noise(WaveParams{p, 0.0}).noise, 1e-12);
  }
}

TEST(Analysis, FailingRowKeepsItsSlot) {
  SweepSpec s;
  s.base = oracle::fig2();
  s.grid = {0.5, 1.0};
  s.models = {{Model::quantum, Route::closed_form}, {Model::particle, Route::monte_carlo}};
  s.particle_mc.t_total = 1.0;
  const auto t = run_sweep(s);
  ASSERT_EQ(t.rows.size(), 2u);
  for (const auto& row : t.rows) {
    EXPECT_FALSE(row.error.empty());
    EXPECT_FALSE(row.cells[0].stats);
  }
  s.grid = {1.0, 0.5};
  EXPECT_THROW(run_sweep(s), ParameterError);
  s.models = {{Model::quantum, Route::fcs}};
  EXPECT_THROW(run_sweep(s), ParameterError);
}

TEST(Analysis, HighTemperatureConvergence) {
  // Relative differences between the models shrink as both baths heat up.
  double prev = INFINITY;
  for (double scale : {1.0, 10.0, 100.0, 1000.0}) {
    const auto p = EngineParams::from_occupations(1, 1, 1, 1, 2.0 * scale, 1.0 * scale);
    const double q = closed_form::quantum_noise(p).noise;
    const double w = closed_form::wave_noise(WaveParams{p, 0.0}).noise;
    const double d = std::abs(q - w) / q;
    EXPECT_LT(d, prev);
    prev = d;
  }
  EXPECT_LT(prev, 2e-3);
}
