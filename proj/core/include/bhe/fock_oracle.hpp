#pragma once

// Reference evaluation of the quantum model from the Lindblad master
// equation on a truncated Fock space (rotating frame). Only the sector where
// ket and bra carry the same total excitation number is kept: it contains
// the steady state and is closed under the dynamics and the current.

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <complex>
#include <memory>
#include <utility>
#include <vector>

#include "bhe/params.hpp"

namespace bhe::fock {

using cd = std::complex<double>;
using SparseMatrix = Eigen::SparseMatrix<cd>;
using BlockMatrix = Eigen::Matrix<cd, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Two-mode states |n_h, n_c> with n_h, n_c <= n_max, grouped by total N.
class BlockBasis {
 public:
  explicit BlockBasis(int n_max);

  int n_max() const { return n_max_; }
  int blocks() const { return 2 * n_max_ + 1; }
  int block_size(int n) const { return hi(n) - lo(n) + 1; }
  /// Smallest and largest n_h in block N.
  int lo(int n) const { return n > n_max_ ? n - n_max_ : 0; }
  int hi(int n) const { return n < n_max_ ? n : n_max_; }
  /// Offset of block N in the vectorised density operator.
  std::size_t offset(int n) const { return offsets_[static_cast<std::size_t>(n)]; }
  std::size_t dimension() const { return offsets_.back(); }
  /// Flat index of |n_h, N - n_h><m_h, N - m_h|.
  std::size_t index(int n, int n_h, int m_h) const {
    return offset(n) + static_cast<std::size_t>(n_h - lo(n)) * static_cast<std::size_t>(block_size(n)) +
           static_cast<std::size_t>(m_h - lo(n));
  }

 private:
  int n_max_;
  std::vector<std::size_t> offsets_;
};

/// Vectorised Liouvillian of the number-balanced sector.
struct FockSuperoperator {
  EngineParams params;
  BlockBasis basis{1};
  SparseMatrix liouvillian;
};

FockSuperoperator build_superoperator(const EngineParams& params, int n_max);

/// Block N of a_mu^+ a_nu (0 = hot, 1 = cold), with truncated ladders.
BlockMatrix hop_block(const BlockBasis& basis, int n, int mu, int nu);

/// Block N of the current I = i g (a_h^+ a_c - a_c^+ a_h).
BlockMatrix current_block(const BlockBasis& basis, int n, double g);

/// Steady state and Drazin action through one factorisation of the
/// Liouvillian with the vacuum row replaced by the trace row.
class SteadyStateSolver {
 public:
  explicit SteadyStateSolver(const FockSuperoperator& op);
  ~SteadyStateSolver();

  Eigen::VectorXcd steady_state() const;
  /// L^D x for traceless x.
  Eigen::VectorXcd drazin_apply(const Eigen::VectorXcd& x) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  const FockSuperoperator* op_;
};

/// Tr[O rho] for a number-conserving operator given block by block.
cd expectation(const BlockBasis& basis, const Eigen::VectorXcd& rho,
               const std::vector<BlockMatrix>& op);

/// <a_mu^+ a_nu a_gam^+ a_sig> in the steady state.
cd four_point(const BlockBasis& basis, const Eigen::VectorXcd& rho, int mu, int nu, int gam,
              int sig);

struct StateChecks {
  double trace = 0.0;
  double hermiticity = 0.0;       // max |rho - rho^+| entry
  double min_eigenvalue = 0.0;    // over all blocks
  double trace_preservation = 0.0;  // max |1^T L| entry
};

StateChecks check_state(const FockSuperoperator& op, const Eigen::VectorXcd& rho);

/// Probability on states with n_h = n_max or n_c = n_max.
double top_shell_mass(const BlockBasis& basis, const Eigen::VectorXcd& rho);

inline constexpr double kDefaultTopShellThreshold = 1e-6;

struct OracleOptions {
  double top_shell_threshold = kDefaultTopShellThreshold;
  bool estimate_truncation_error = true;
};

struct OracleResult {
  PowerStats stats;
  double top_shell_mass = 0.0;
  // Twice the distance to the Aitken extrapolation over n_max - 6, n_max - 3
  // and n_max (plain successive difference when n_max < 7).
  double mean_truncation_error = 0.0;
  double noise_truncation_error = 0.0;
  StateChecks checks;
  std::size_t dimension = 0;
  // Truncations used for the error estimate, with their statistics.
  std::vector<std::pair<int, PowerStats>> sequence;
};

/// Raw evaluation at one truncation, without refusal or error estimate.
OracleResult evaluate(const EngineParams& params, int n_max);

/// Throws NumericalError when the top-shell mass exceeds the threshold.
OracleResult oracle_power_stats(const EngineParams& params, int n_max, const OracleOptions& opts = {});

}  // namespace bhe::fock
