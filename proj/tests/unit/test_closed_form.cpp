#include <gtest/gtest.h>

#include <cmath>

#include "bhe/closed_form.hpp"
#include "oracles.hpp"

using namespace bhe;
namespace cf = bhe::closed_form;

TEST(ClosedForm, ReferencePoint) {
  const auto p = oracle::fig2();
  EXPECT_NEAR(cf::mean_power(p), oracle::kMeanPower, 1e-14);
  EXPECT_NEAR(cf::equilibrium_coefficient(p), 0.4, 1e-14);
  EXPECT_NEAR(cf::shot_coefficient(p), 0.112, 1e-14);
  EXPECT_NEAR(cf::quantum_noise(p).noise, oracle::kQuantumNoise, 1e-12);
  EXPECT_NEAR(cf::wave_noise(WaveParams{p, 0.0}).noise, oracle::kWaveNoise, 1e-12);
  EXPECT_NEAR(cf::particle_noise(p).noise, oracle::kParticleNoise, 1e-12);
  EXPECT_NEAR(cf::particle_shot_excess(p), 0.4 * 24.0 / 175.0, 1e-14);
}

TEST(ClosedForm, UnequalRatesReference) {
  auto p = oracle::fig2();
  p.kappa_h = 2.0;
  EXPECT_NEAR(cf::particle_noise(p).noise, oracle::kParticleNoiseKappaH2, 1e-12);
}

TEST(ClosedForm, TrivialZeros) {
  auto p = oracle::fig2();
  p.g = 0.0;
  EXPECT_EQ(cf::mean_power(p), 0.0);
  EXPECT_EQ(cf::quantum_noise(p).noise, 0.0);
  const auto eq = EngineParams::from_occupations(1, 1, 2, 1, 0.7, 0.7);
  EXPECT_EQ(cf::mean_power(eq), 0.0);
  EXPECT_FALSE(cf::quantum_stats(eq).fano);
  const auto vac = EngineParams::from_occupations(1, 1, 2, 1, 0.0, 0.0);
  EXPECT_EQ(cf::quantum_noise(vac).noise, 0.0);
  EXPECT_EQ(cf::wave_noise(WaveParams{vac, 0.0}).noise, 0.0);
}

TEST(ClosedForm, SeriesConductanceOnLogGrid) {
  for (double x = 1e-3; x <= 1e3; x *= 1.7) {
    for (double r : {0.1, 0.5, 1.0, 3.0, 10.0}) {
      const auto p = EngineParams::from_occupations(x, r, 1.0, 1.3, 4.0, 0.5);
      EXPECT_LE(oracle::rel(cf::mean_power(p), cf::mean_power_series(p)), 1e-12);
      EXPECT_LE(oracle::rel(cf::mean_power(p), oracle::mean_power(p)), 1e-12);
    }
  }
}

TEST(ClosedForm, EqualRateSpecialisation) {
  for (double g : {1e-2, 0.3, 1.0, 2.5, 50.0}) {
    for (double k : {0.5, 1.0, 3.0}) {
      const auto p = EngineParams::from_occupations(g, k, k, 1.2, 3.0, 0.4);
      const auto c = oracle::equal_kappa(g, k, 1.2);
      EXPECT_LE(oracle::rel(cf::equilibrium_coefficient(p), c.e), 1e-12);
      EXPECT_LE(oracle::rel(cf::shot_coefficient(p), c.s), 1e-12);
      EXPECT_LE(oracle::rel(cf::shot_coefficient(p) + cf::particle_shot_excess(p), c.sp), 1e-12);
      EXPECT_LE(oracle::rel(cf::equal_kappa::shot_coefficient(g, k, 1.2), c.s), 1e-12);
      EXPECT_LE(oracle::rel(cf::equal_kappa::particle_shot_coefficient(g, k, 1.2), c.sp), 1e-12);
      EXPECT_LE(oracle::rel(cf::quantum_noise(p).noise, oracle::quantum_noise_equal(p)), 1e-12);
      EXPECT_LE(oracle::rel(cf::particle_noise(p).noise, oracle::particle_noise_equal(p)), 1e-12);
    }
  }
}

TEST(ClosedForm, GeneralRatesDifferFromEqualForm) {
  const auto p = EngineParams::from_occupations(1, 2, 1, 1, 2, 0.1);
  const auto q = EngineParams::from_occupations(1, 1.5, 1.5, 1, 2, 0.1);
  EXPECT_GT(oracle::rel(cf::quantum_noise(p).noise, cf::quantum_noise(q).noise), 1e-3);
}

TEST(ClosedForm, QuantumMinusWaveIsEquilibriumTimesOccupations) {
  for (const auto& p : oracle::grid(3, 100)) {
    const double diff = cf::quantum_noise(p).noise - cf::wave_noise(WaveParams{p, 0.0}).noise;
    const double expected = cf::equilibrium_coefficient(p) * (p.nbar_h() + p.nbar_c());
    EXPECT_LE(std::abs(diff - expected), 1e-10 * cf::quantum_noise(p).noise);
    EXPECT_GE(expected, 0.0);
  }
}

TEST(ClosedForm, ParticleExcessNonNegative) {
  for (const auto& p : oracle::grid(4, 300)) {
    EXPECT_GE(cf::particle_shot_excess(p), 0.0);
    EXPECT_GE(cf::quantum_noise(p).noise + 1e-12, cf::particle_noise(p).noise);
  }
}

TEST(ClosedForm, PoissonLimitExamples) {
  const auto eq = EngineParams::from_occupations(1, 1, 1, 2, 1.5, 1.5);
  const auto s = cf::poisson_limit(eq);
  EXPECT_EQ(s.mean_power, 0.0);
  EXPECT_NEAR(s.zero_freq_noise, 2.0 * 4.0 * 2.0 * 1.5 * 2.5, 1e-12);
  const auto f = cf::poisson_limit(oracle::fig2());
  EXPECT_NEAR(*f.fano, 2.5 / 1.9, 1e-12);
}

TEST(ClosedForm, PoissonLimitMatchesQuantumFanoAtWeakCoupling) {
  const auto p = oracle::fig2(1e-3);
  EXPECT_LE(oracle::rel(*cf::poisson_limit(p).fano, *cf::quantum_stats(p).fano), 1e-4);
}

TEST(ClosedForm, HybridizedLimitExamples) {
  const auto s = cf::hybridized_limit(oracle::fig2(100.0));
  EXPECT_NEAR(s.mean_power, 0.95, 1e-12);
  EXPECT_NEAR(s.zero_freq_noise, 2.1525, 1e-12);
  const auto eq = EngineParams::from_occupations(100, 2, 1, 1.5, 0.8, 0.8);
  EXPECT_NEAR(cf::hybridized_limit(eq).zero_freq_noise, 2.0 * 1.5 * 1.5 * 2.0 * 0.8 * 1.8 / 3.0, 1e-12);
}

TEST(ClosedForm, LimitsApproachedAtOrderGSquared) {
  const auto base = EngineParams::from_occupations(1, 1, 2, 1, 3, 0.5);
  auto at = [&](double g) {
    auto p = base;
    p.g = g;
    return p;
  };
  const double e1 = oracle::rel(cf::particle_noise(at(1e-2)).noise, cf::poisson_limit(at(1e-2)).zero_freq_noise);
  const double e2 = oracle::rel(cf::particle_noise(at(1e-3)).noise, cf::poisson_limit(at(1e-3)).zero_freq_noise);
  EXPECT_NEAR(e1 / e2, 100.0, 5.0);
  const double h1 = oracle::rel(cf::particle_noise(at(1e2)).noise, cf::hybridized_limit(at(1e2)).zero_freq_noise);
  const double h2 = oracle::rel(cf::particle_noise(at(1e3)).noise, cf::hybridized_limit(at(1e3)).zero_freq_noise);
  EXPECT_NEAR(h1 / h2, 100.0, 5.0);
}

TEST(ClosedForm, ExcessAsymptotes) {
  for (double r : {0.3, 1.0, 4.0}) {
    auto p = EngineParams::from_occupations(1e-3, r, 1.0, 1.7, 2, 0.1);
    EXPECT_NEAR(cf::particle_shot_excess(p) / cf::particle_shot_excess_small_g(p), 1.0, 1e-3);
    p.g = 1e3;
    EXPECT_NEAR(cf::particle_shot_excess(p) / cf::particle_shot_excess_large_g(p), 1.0, 1e-3);
  }
  // Equal rates: 48 g^6 / kappa^5 Delta^2 at small g.
  const auto q = EngineParams::from_occupations(1e-3, 1, 1, 1, 2, 0.1);
  EXPECT_NEAR(cf::particle_shot_excess_small_g(q) / 48e-18, 1.0, 1e-12);
}

TEST(ClosedForm, WaveOffset) {
  const auto vac = EngineParams::from_occupations(1, 1, 1, 1, 0, 0);
  const double e = cf::equilibrium_coefficient(vac);
  EXPECT_NEAR(cf::wave_noise(WaveParams{vac, 0.5}).noise, e / 2.0, 1e-14);
  const auto p = oracle::fig2();
  for (double c : {0.0, 0.25, 0.5, 1.0}) {
    EXPECT_DOUBLE_EQ(cf::wave_stats(WaveParams{p, c}).mean_power, cf::mean_power(p));
    EXPECT_NEAR(cf::wave_noise(WaveParams{p, c}).noise, oracle::wave_noise_equal(p, c), 1e-12);
  }
}

TEST(ClosedForm, ExtremeCouplingStaysFinite) {
  for (double g : {1e-6, 1e6}) {
    const auto p = EngineParams::from_occupations(g, 0.2, 5, 1, 10, 0);
    EXPECT_TRUE(std::isfinite(cf::particle_noise(p).noise));
    EXPECT_GT(cf::quantum_noise(p).noise, 0.0);
    EXPECT_GE(cf::particle_shot_excess(p), 0.0);
  }
}
