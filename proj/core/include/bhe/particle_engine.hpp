#pragma once

// Classical rate-equation (particle) model on a truncated occupation
// lattice. Transitions out of the lattice are dropped (reflecting boundary),
// so every column of the generator sums to zero.

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cstddef>
#include <memory>
#include <utility>

#include "bhe/params.hpp"

namespace bhe::particle {

inline constexpr std::size_t kMaxStates = 4'000'000;

class TruncatedStateSpace {
 public:
  /// Throws ParameterError if a cutoff is below 1 or the dimension exceeds
  /// kMaxStates.
  TruncatedStateSpace(int n_max_h, int n_max_c);

  int n_max_h() const { return n_max_h_; }
  int n_max_c() const { return n_max_c_; }
  std::size_t dimension() const {
    return static_cast<std::size_t>(n_max_h_ + 1) * static_cast<std::size_t>(n_max_c_ + 1);
  }
  std::size_t index(int n_h, int n_c) const {
    return static_cast<std::size_t>(n_h) * static_cast<std::size_t>(n_max_c_ + 1) +
           static_cast<std::size_t>(n_c);
  }
  std::pair<int, int> state(std::size_t i) const {
    const auto w = static_cast<std::size_t>(n_max_c_ + 1);
    return {static_cast<int>(i / w), static_cast<int>(i % w)};
  }

 private:
  int n_max_h_;
  int n_max_c_;
};

using SparseMatrix = Eigen::SparseMatrix<double>;

struct RateMatrix {
  TruncatedStateSpace space{1, 1};
  double gamma_i = 0.0;
  SparseMatrix generator;   // L, column-stochastic generator
  SparseMatrix jump_plus;   // hot -> cold transfers, Gamma_I n_h (n_c + 1)
  SparseMatrix jump_minus;  // cold -> hot transfers, Gamma_I n_c (n_h + 1)
  SparseMatrix bath;        // the four bath transitions (off-diagonal only)
  Eigen::VectorXd escape;   // total outgoing rate of every state
};

RateMatrix build_generator(const EngineParams& params, const TruncatedStateSpace& space);

/// Factorisation of L with one row replaced by the normalisation row.
/// Solves both the steady state and the Drazin action.
class ProjectedSolver {
 public:
  explicit ProjectedSolver(const SparseMatrix& generator);
  ~ProjectedSolver();
  ProjectedSolver(ProjectedSolver&&) noexcept;
  ProjectedSolver& operator=(ProjectedSolver&&) noexcept;

  /// L p = 0, sum p = 1. Entries below -1e-8 raise NumericalError; smaller
  /// negative entries are clipped to 0 and the mass is renormalised.
  Eigen::VectorXd steady_state() const;

  /// x = L^D y: solves L x = (Id - p 1^T) y with 1^T x = 0.
  Eigen::VectorXd drazin_apply(const Eigen::VectorXd& p, const Eigen::VectorXd& y) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

Eigen::VectorXd steady_state(const RateMatrix& rates);

/// Probability on the outermost shells n_h = n_max_h or n_c = n_max_c.
double boundary_mass(const TruncatedStateSpace& space, const Eigen::VectorXd& p);

/// Current cumulants (intra-system net transfer); multiply by Delta and
/// Delta^2 for power.
struct Cumulants {
  double mean = 0.0;
  double noise = 0.0;
};

/// <W1> and <W2> - 2 <W1 L^D W1> with W1 = V+ - V-, W2 = V+ + V-.
Cumulants fcs_cumulants_drazin(const RateMatrix& rates, const Eigen::VectorXd& p);

/// Steady-state moments (<n_h>, <n_c>, <n_h^2>, <n_c^2>, <n_h n_c>) solve
/// A m + b = 0.
struct MomentClosure {
  Eigen::Matrix<double, 5, 5> A;
  Eigen::Matrix<double, 5, 1> b;
};

MomentClosure build_moment_closure(const EngineParams& params);
Eigen::Matrix<double, 5, 1> steady_moments(const EngineParams& params);

/// Truncation-free cumulants from the closed moment hierarchy and the
/// two-dimensional regression system for (n_h, n_c).
Cumulants fcs_cumulants_moments(const EngineParams& params);

struct TruncatedSolution {
  RateMatrix rates;
  Eigen::VectorXd p;
  double boundary_mass = 0.0;
  Cumulants cumulants;
};

/// Starts at n_max = ceil(10 (nbar + 1)) per mode, raised to where a
/// geometric law with the exact mean occupation has its tail below
/// tolerance / 4, and doubles the cutoff of
/// every mode whose outer shell carries more than tolerance / 2 until the
/// total boundary mass drops below `tolerance`.
TruncatedSolution solve_adaptive(const EngineParams& params, double tolerance = 1e-10);

/// Same at a fixed truncation.
TruncatedSolution solve_truncated(const EngineParams& params, const TruncatedStateSpace& space);

/// Drazin-route power statistics with the adaptive truncation.
PowerStats drazin_stats(const EngineParams& params, double tolerance = 1e-10);

/// Moment-route power statistics.
PowerStats moment_stats(const EngineParams& params);

}  // namespace bhe::particle
