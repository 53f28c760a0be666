#include "bhe/fock_oracle.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "sparse_solver.hpp"

namespace bhe::fock {

BlockBasis::BlockBasis(int n_max) : n_max_(n_max) {
  if (n_max < 1) throw ParameterError("Fock truncation must be >= 1");
  offsets_.assign(static_cast<std::size_t>(blocks()) + 1, 0);
  for (int n = 0; n < blocks(); ++n) {
    const auto m = static_cast<std::size_t>(block_size(n));
    offsets_[static_cast<std::size_t>(n) + 1] = offsets_[static_cast<std::size_t>(n)] + m * m;
  }
}

namespace {

constexpr cd kI{0.0, 1.0};

using Triplet = Eigen::Triplet<cd>;

}  // namespace

FockSuperoperator build_superoperator(const EngineParams& params, int n_max) {
  FockSuperoperator op;
  op.params = validate(params).params;
  op.basis = BlockBasis(n_max);
  const BlockBasis& B = op.basis;
  const double g = op.params.g;
  const double kh = op.params.kappa_h;
  const double kc = op.params.kappa_c;
  const double nh = op.params.nbar_h();
  const double nc = op.params.nbar_c();
  const double nm = n_max;

  std::vector<Triplet> t;
  t.reserve(B.dimension() * 9);

  for (int n = 0; n < B.blocks(); ++n) {
    for (int a = B.lo(n); a <= B.hi(n); ++a) {
      for (int c = B.lo(n); c <= B.hi(n); ++c) {
        const int col = static_cast<int>(B.index(n, a, c));
        const int b = n - a;  // ket cold occupation
        const int d = n - c;  // bra cold occupation
        // -i [H, rho], H = g (a_h^+ a_c + a_c^+ a_h).
        if (b > 0 && a < n_max) {
          t.emplace_back(static_cast<int>(B.index(n, a + 1, c)), col,
                         -kI * g * std::sqrt(double(b) * (a + 1)));
        }
        if (a > 0 && b < n_max) {
          t.emplace_back(static_cast<int>(B.index(n, a - 1, c)), col,
                         -kI * g * std::sqrt(double(a) * (b + 1)));
        }
        if (d > 0 && c < n_max) {
          t.emplace_back(static_cast<int>(B.index(n, a, c + 1)), col,
                         kI * g * std::sqrt(double(d) * (c + 1)));
        }
        if (c > 0 && d < n_max) {
          t.emplace_back(static_cast<int>(B.index(n, a, c - 1)), col,
                         kI * g * std::sqrt(double(c) * (d + 1)));
        }

        // Loss: rate kappa (nbar + 1), jump a rho a^+ into block N - 1.
        double diag = 0.0;
        const double loss_h = kh * (nh + 1.0);
        const double loss_c = kc * (nc + 1.0);
        if (a > 0 && c > 0) {
          t.emplace_back(static_cast<int>(B.index(n - 1, a - 1, c - 1)), col,
                         loss_h * std::sqrt(double(a) * c));
        }
        if (b > 0 && d > 0) {
          t.emplace_back(static_cast<int>(B.index(n - 1, a, c)), col,
                         loss_c * std::sqrt(double(b) * d));
        }
        diag -= 0.5 * loss_h * (a + c) + 0.5 * loss_c * (b + d);

        // Gain: rate kappa nbar, jump a^+ rho a into block N + 1.
        const double gain_h = kh * nh;
        const double gain_c = kc * nc;
        auto up = [nm](int k) { return k < nm ? k + 1.0 : 0.0; };
        if (gain_h > 0.0 && a < n_max && c < n_max) {
          t.emplace_back(static_cast<int>(B.index(n + 1, a + 1, c + 1)), col,
                         gain_h * std::sqrt((a + 1.0) * (c + 1.0)));
        }
        if (gain_c > 0.0 && b < n_max && d < n_max) {
          t.emplace_back(static_cast<int>(B.index(n + 1, a, c)), col,
                         gain_c * std::sqrt((b + 1.0) * (d + 1.0)));
        }
        diag -= 0.5 * gain_h * (up(a) + up(c)) + 0.5 * gain_c * (up(b) + up(d));
        t.emplace_back(col, col, diag);
      }
    }
  }
  const auto dim = static_cast<Eigen::Index>(B.dimension());
  op.liouvillian.resize(dim, dim);
  op.liouvillian.setFromTriplets(t.begin(), t.end());
  op.liouvillian.makeCompressed();
  return op;
}

BlockMatrix hop_block(const BlockBasis& basis, int n, int mu, int nu) {
  const int m = basis.block_size(n);
  const int lo = basis.lo(n);
  const int n_max = basis.n_max();
  BlockMatrix out = BlockMatrix::Zero(m, m);
  for (int a = basis.lo(n); a <= basis.hi(n); ++a) {
    int occ[2] = {a, n - a};
    // a_nu then a_mu^+, with the truncated ladders.
    if (occ[nu] == 0) continue;
    double amp = std::sqrt(double(occ[nu]));
    occ[nu] -= 1;
    if (occ[mu] == n_max) continue;
    amp *= std::sqrt(occ[mu] + 1.0);
    occ[mu] += 1;
    out(occ[0] - lo, a - lo) += amp;
  }
  return out;
}

BlockMatrix current_block(const BlockBasis& basis, int n, double g) {
  return kI * g * (hop_block(basis, n, 0, 1) - hop_block(basis, n, 1, 0));
}

namespace {

using ConstBlock = Eigen::Map<const BlockMatrix>;
using MutBlock = Eigen::Map<BlockMatrix>;

ConstBlock block_of(const BlockBasis& b, const Eigen::VectorXcd& v, int n) {
  const int m = b.block_size(n);
  return ConstBlock(v.data() + b.offset(n), m, m);
}

MutBlock block_of(const BlockBasis& b, Eigen::VectorXcd& v, int n) {
  const int m = b.block_size(n);
  return MutBlock(v.data() + b.offset(n), m, m);
}

// O rho, block by block.
Eigen::VectorXcd left_multiply(const BlockBasis& b, const std::vector<BlockMatrix>& op,
                               const Eigen::VectorXcd& rho) {
  Eigen::VectorXcd out(rho.size());
  for (int n = 0; n < b.blocks(); ++n) {
    block_of(b, out, n) = op[static_cast<std::size_t>(n)] * block_of(b, rho, n);
  }
  return out;
}

std::vector<BlockMatrix> current_operator(const BlockBasis& b, double g) {
  std::vector<BlockMatrix> op;
  op.reserve(static_cast<std::size_t>(b.blocks()));
  for (int n = 0; n < b.blocks(); ++n) op.push_back(current_block(b, n, g));
  return op;
}

}  // namespace

struct SteadyStateSolver::Impl {
  SparseMatrix matrix;  // the factorised matrix must outlive the solver
  detail::SparseSolver<SparseMatrix> lu;
  Eigen::Index vacuum = 0;
  Eigen::VectorXcd rho;
};

namespace {

cd trace_of(const BlockBasis& b, const Eigen::VectorXcd& v) {
  cd t = 0.0;
  for (int n = 0; n < b.blocks(); ++n) {
    for (int a = b.lo(n); a <= b.hi(n); ++a) t += v(static_cast<Eigen::Index>(b.index(n, a, a)));
  }
  return t;
}

}  // namespace

// The vacuum row is replaced by rho_00 = const rather than the dense trace
// row, which keeps the lattice fill pattern; normalisation and the zero-trace
// projection are applied after each solve.
SteadyStateSolver::SteadyStateSolver(const FockSuperoperator& op)
    : impl_(std::make_unique<Impl>()), op_(&op) {
  const BlockBasis& b = op.basis;
  const auto vacuum = static_cast<Eigen::Index>(b.index(0, 0, 0));
  impl_->vacuum = vacuum;
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(op.liouvillian.nonZeros()) + 1);
  for (Eigen::Index col = 0; col < op.liouvillian.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(op.liouvillian, col); it; ++it) {
      if (it.row() != vacuum) t.emplace_back(static_cast<int>(it.row()), static_cast<int>(col), it.value());
    }
  }
  t.emplace_back(static_cast<int>(vacuum), static_cast<int>(vacuum), cd{1.0, 0.0});
  const auto dim = op.liouvillian.rows();
  SparseMatrix& m = impl_->matrix;
  m.resize(dim, dim);
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  impl_->lu.compute(m);
  if (impl_->lu.info() != Eigen::Success) {
    throw NumericalError("Fock Liouvillian factorisation failed");
  }
  Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(dim);
  rhs(vacuum) = 1.0;
  Eigen::VectorXcd rho = impl_->lu.solve(rhs);
  const cd tr = trace_of(b, rho);
  if (!rho.allFinite() || std::abs(tr) == 0.0) throw NumericalError("Fock steady-state solve failed");
  impl_->rho = rho / tr;
}

SteadyStateSolver::~SteadyStateSolver() = default;

Eigen::VectorXcd SteadyStateSolver::steady_state() const { return impl_->rho; }

Eigen::VectorXcd SteadyStateSolver::drazin_apply(const Eigen::VectorXcd& x) const {
  Eigen::VectorXcd rhs = x;
  rhs(impl_->vacuum) = 0.0;
  Eigen::VectorXcd y = impl_->lu.solve(rhs);
  if (!y.allFinite()) throw NumericalError("Fock Drazin solve failed");
  return y - trace_of(op_->basis, y) * impl_->rho;
}

cd expectation(const BlockBasis& basis, const Eigen::VectorXcd& rho,
               const std::vector<BlockMatrix>& op) {
  cd sum = 0.0;
  for (int n = 0; n < basis.blocks(); ++n) {
    sum += (op[static_cast<std::size_t>(n)] * block_of(basis, rho, n)).trace();
  }
  return sum;
}

cd four_point(const BlockBasis& basis, const Eigen::VectorXcd& rho, int mu, int nu, int gam,
              int sig) {
  std::vector<BlockMatrix> op;
  op.reserve(static_cast<std::size_t>(basis.blocks()));
  for (int n = 0; n < basis.blocks(); ++n) {
    op.push_back(hop_block(basis, n, mu, nu) * hop_block(basis, n, gam, sig));
  }
  return expectation(basis, rho, op);
}

StateChecks check_state(const FockSuperoperator& op, const Eigen::VectorXcd& rho) {
  const BlockBasis& b = op.basis;
  StateChecks c;
  c.min_eigenvalue = INFINITY;
  cd trace = 0.0;
  for (int n = 0; n < b.blocks(); ++n) {
    const BlockMatrix r = block_of(b, rho, n);
    trace += r.trace();
    c.hermiticity = std::max(c.hermiticity, (r - r.adjoint()).cwiseAbs().maxCoeff());
    const BlockMatrix h = 0.5 * (r + r.adjoint());
    Eigen::SelfAdjointEigenSolver<BlockMatrix> es(h, Eigen::EigenvaluesOnly);
    c.min_eigenvalue = std::min(c.min_eigenvalue, es.eigenvalues().minCoeff());
  }
  c.trace = trace.real();
  // Left action of the vectorised identity.
  Eigen::VectorXcd identity = Eigen::VectorXcd::Zero(op.liouvillian.rows());
  for (int n = 0; n < b.blocks(); ++n) {
    for (int a = b.lo(n); a <= b.hi(n); ++a) identity(static_cast<Eigen::Index>(b.index(n, a, a))) = 1.0;
  }
  const Eigen::RowVectorXcd left = identity.transpose() * op.liouvillian;
  c.trace_preservation = left.cwiseAbs().maxCoeff();
  return c;
}

double top_shell_mass(const BlockBasis& basis, const Eigen::VectorXcd& rho) {
  double mass = 0.0;
  const int m = basis.n_max();
  for (int n = 0; n < basis.blocks(); ++n) {
    for (int a = basis.lo(n); a <= basis.hi(n); ++a) {
      if (a == m || n - a == m) mass += rho(static_cast<Eigen::Index>(basis.index(n, a, a))).real();
    }
  }
  return mass;
}

OracleResult evaluate(const EngineParams& params, int n_max) {
  const FockSuperoperator op = build_superoperator(params, n_max);
  const SteadyStateSolver solver(op);
  const Eigen::VectorXcd rho = solver.steady_state();
  const auto current = current_operator(op.basis, op.params.g);

  const Eigen::VectorXcd i_rho = left_multiply(op.basis, current, rho);
  cd mean_i = 0.0;
  for (int n = 0; n < op.basis.blocks(); ++n) mean_i += block_of(op.basis, i_rho, n).trace();
  const Eigen::VectorXcd x = i_rho - mean_i * rho;
  const Eigen::VectorXcd y = solver.drazin_apply(x);
  const double noise_i = -2.0 * expectation(op.basis, y, current).real();

  const double d = op.params.delta();
  OracleResult r;
  r.stats = make_power_stats(d * mean_i.real(), d * d * noise_i, d);
  r.top_shell_mass = top_shell_mass(op.basis, rho);
  r.checks = check_state(op, rho);
  r.dimension = op.basis.dimension();
  return r;
}

namespace {

double aitken_error(double x0, double x1, double x2) {
  const double d1 = x1 - x0;
  const double d2 = x2 - x1;
  const double denom = d2 - d1;
  if (denom == 0.0 || std::abs(d2) >= std::abs(d1)) return 2.0 * std::abs(d2);
  const double limit = x2 - d2 * d2 / denom;
  return 2.0 * std::abs(x2 - limit);
}

}  // namespace

OracleResult oracle_power_stats(const EngineParams& params, int n_max, const OracleOptions& opts) {
  OracleResult r = evaluate(params, n_max);
  if (r.top_shell_mass > opts.top_shell_threshold) {
    std::ostringstream os;
    os << "Fock truncation n_max = " << n_max << " too small: top-shell mass " << r.top_shell_mass
       << " exceeds " << opts.top_shell_threshold;
    throw NumericalError(os.str());
  }
  if (opts.estimate_truncation_error) {
    if (n_max >= 7) {
      const OracleResult a = evaluate(params, n_max - 6);
      const OracleResult b = evaluate(params, n_max - 3);
      r.mean_truncation_error =
          aitken_error(a.stats.mean_power, b.stats.mean_power, r.stats.mean_power);
      r.noise_truncation_error =
          aitken_error(a.stats.zero_freq_noise, b.stats.zero_freq_noise, r.stats.zero_freq_noise);
      r.sequence = {{n_max - 6, a.stats}, {n_max - 3, b.stats}, {n_max, r.stats}};
    } else if (n_max >= 2) {
      const OracleResult b = evaluate(params, n_max - 1);
      r.mean_truncation_error = std::abs(r.stats.mean_power - b.stats.mean_power);
      r.noise_truncation_error = std::abs(r.stats.zero_freq_noise - b.stats.zero_freq_noise);
      r.sequence = {{n_max - 1, b.stats}, {n_max, r.stats}};
    }
  }
  return r;
}

}  // namespace bhe::fock
