#include <gtest/gtest.h>

#include <cmath>

#include "bhe/closed_form.hpp"
#include "bhe/fock_oracle.hpp"
#include "oracles.hpp"

using namespace bhe;
using namespace bhe::fock;

TEST(FockOracle, BlockDimensions) {
  const BlockBasis b(2);
  EXPECT_EQ(b.blocks(), 5);
  EXPECT_EQ(b.dimension(), 1u + 4u + 9u + 4u + 1u);
  for (int n = 0; n < b.blocks(); ++n) EXPECT_EQ(b.block_size(n), b.hi(n) - b.lo(n) + 1);
  const BlockBasis c(7);
  std::size_t total = 0;
  for (int n = 0; n < c.blocks(); ++n) total += static_cast<std::size_t>(c.block_size(n) * c.block_size(n));
  EXPECT_EQ(c.dimension(), total);
}

TEST(FockOracle, TracePreservingAndPhysicalState) {
  const auto op = build_superoperator(EngineParams::from_occupations(1.3, 1.0, 0.6, 1.0, 0.5, 0.1), 10);
  const SteadyStateSolver solver(op);
  const auto rho = solver.steady_state();
  const auto c = check_state(op, rho);
  EXPECT_LT(c.trace_preservation, 1e-12);
  EXPECT_NEAR(c.trace, 1.0, 1e-12);
  EXPECT_LT(c.hermiticity, 1e-12);
  EXPECT_GT(c.min_eigenvalue, -1e-12);
}

TEST(FockOracle, UncoupledIsThermal) {
  const int n_max = 12;
  const auto op = build_superoperator(EngineParams::from_occupations(0.0, 1.0, 2.0, 1.0, 0.6, 0.2), n_max);
  const SteadyStateSolver solver(op);
  const auto rho = solver.steady_state();
  std::vector<BlockMatrix> nh, nc;
  for (int n = 0; n < op.basis.blocks(); ++n) {
    nh.push_back(hop_block(op.basis, n, 0, 0));
    nc.push_back(hop_block(op.basis, n, 1, 1));
  }
  auto mean_of = [&](double nbar) {
    const auto w = oracle::truncated_geometric(nbar, n_max);
    double m = 0.0;
    for (int k = 0; k <= n_max; ++k) m += k * w[static_cast<std::size_t>(k)];
    return m;
  };
  EXPECT_NEAR(expectation(op.basis, rho, nh).real(), mean_of(0.6), 1e-12);
  EXPECT_NEAR(expectation(op.basis, rho, nc).real(), mean_of(0.2), 1e-12);
}

TEST(FockOracle, CurrentIsHermitian) {
  const BlockBasis b(5);
  for (int n = 0; n < b.blocks(); ++n) {
    const BlockMatrix i = current_block(b, n, 0.8);
    EXPECT_LE((i - i.adjoint()).cwiseAbs().maxCoeff(), 1e-15);
  }
}

TEST(FockOracle, MatchesDenseLiouvillian) {
  const auto p = EngineParams::from_occupations(0.8, 1.0, 0.6, 1.0, 0.3, 0.1);
  const auto [mean, noise] = oracle::dense_quantum(p, 5);
  const auto r = evaluate(p, 5);
  EXPECT_LE(oracle::rel(r.stats.mean_power, mean), 1e-10);
  EXPECT_LE(oracle::rel(r.stats.zero_freq_noise, noise), 1e-10);
}

TEST(FockOracle, MatchesClosedFormAtLowOccupation) {
  for (double g : {0.1, 1.0, 5.0}) {
    const auto p = EngineParams::from_occupations(g, 1.0, 0.7, 1.2, 0.5, 0.1);
    const auto r = oracle_power_stats(p, 25);
    EXPECT_LE(oracle::rel(r.stats.mean_power, closed_form::mean_power(p)), 1e-7);
    EXPECT_LE(oracle::rel(r.stats.zero_freq_noise, closed_form::quantum_noise(p).noise), 1e-7);
    EXPECT_LE(std::abs(r.stats.zero_freq_noise - closed_form::quantum_noise(p).noise),
              r.noise_truncation_error + 1e-12);
    EXPECT_EQ(r.sequence.size(), 3u);
  }
}

TEST(FockOracle, WickFourPointFunctions) {
  const auto p = EngineParams::from_occupations(1.0, 1.0, 0.7, 1.0, 0.5, 0.1);
  const auto op = build_superoperator(p, 30);
  const SteadyStateSolver solver(op);
  const auto rho = solver.steady_state();
  const auto n = oracle::covariance(p);
  // <a_h^+ a_h a_h^+ a_h> = 2 N_hh^2 + N_hh
  EXPECT_NEAR(four_point(op.basis, rho, 0, 0, 0, 0).real(), 2 * std::norm(n(0, 0)) + n(0, 0).real(), 1e-8);
  // <a_h^+ a_c a_c^+ a_h> = N_hh (N_cc + 1) + |N_hc|^2
  EXPECT_NEAR(four_point(op.basis, rho, 0, 1, 1, 0).real(),
              n(0, 0).real() * (n(1, 1).real() + 1.0) + std::norm(n(0, 1)), 1e-8);
}

TEST(FockOracle, RefusesUnderResolvedTruncation) {
  EXPECT_THROW(oracle_power_stats(oracle::fig2(), 6), NumericalError);
  OracleOptions lax;
  lax.top_shell_threshold = 1.0;
  lax.estimate_truncation_error = false;
  EXPECT_NO_THROW(oracle_power_stats(oracle::fig2(), 6, lax));
}
