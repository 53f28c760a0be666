#include "bhe/particle_engine.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "bhe/closed_form.hpp"
#include "sparse_solver.hpp"

namespace bhe::particle {

TruncatedStateSpace::TruncatedStateSpace(int n_max_h, int n_max_c)
    : n_max_h_(n_max_h), n_max_c_(n_max_c) {
  if (n_max_h < 1 || n_max_c < 1) throw ParameterError("truncation cutoffs must be >= 1");
  if (dimension() > kMaxStates) {
    std::ostringstream os;
    os << "truncated state space (" << n_max_h << ", " << n_max_c << ") has " << dimension()
       << " states, above the limit of " << kMaxStates;
    throw ParameterError(os.str());
  }
}

RateMatrix build_generator(const EngineParams& params, const TruncatedStateSpace& space) {
  const EngineParams p = validate(params).params;
  const double kh = p.kappa_h;
  const double kc = p.kappa_c;
  const double nh = p.nbar_h();
  const double nc = p.nbar_c();

  RateMatrix r;
  r.space = space;
  r.gamma_i = closed_form::transfer_rate(p);
  const auto dim = static_cast<Eigen::Index>(space.dimension());
  r.escape = Eigen::VectorXd::Zero(dim);

  using T = Eigen::Triplet<double>;
  std::vector<T> plus;
  std::vector<T> minus;
  std::vector<T> bath;
  plus.reserve(space.dimension());
  minus.reserve(space.dimension());
  bath.reserve(4 * space.dimension());

  const int mh = space.n_max_h();
  const int mc = space.n_max_c();
  for (int a = 0; a <= mh; ++a) {
    for (int b = 0; b <= mc; ++b) {
      const auto i = static_cast<int>(space.index(a, b));
      double out = 0.0;
      auto add = [&](std::vector<T>& v, int a2, int b2, double rate) {
        if (rate == 0.0) return;
        v.emplace_back(static_cast<int>(space.index(a2, b2)), i, rate);
        out += rate;
      };
      if (a < mh) add(bath, a + 1, b, kh * nh * (a + 1));
      if (a > 0) add(bath, a - 1, b, kh * (nh + 1.0) * a);
      if (b < mc) add(bath, a, b + 1, kc * nc * (b + 1));
      if (b > 0) add(bath, a, b - 1, kc * (nc + 1.0) * b);
      if (a > 0 && b < mc) add(plus, a - 1, b + 1, r.gamma_i * a * (b + 1));
      if (b > 0 && a < mh) add(minus, a + 1, b - 1, r.gamma_i * b * (a + 1));
      r.escape(i) = out;
    }
  }

  r.jump_plus.resize(dim, dim);
  r.jump_plus.setFromTriplets(plus.begin(), plus.end());
  r.jump_minus.resize(dim, dim);
  r.jump_minus.setFromTriplets(minus.begin(), minus.end());
  r.bath.resize(dim, dim);
  r.bath.setFromTriplets(bath.begin(), bath.end());

  std::vector<T> all;
  all.reserve(plus.size() + minus.size() + bath.size() + space.dimension());
  all.insert(all.end(), plus.begin(), plus.end());
  all.insert(all.end(), minus.begin(), minus.end());
  all.insert(all.end(), bath.begin(), bath.end());
  for (Eigen::Index i = 0; i < dim; ++i) {
    all.emplace_back(static_cast<int>(i), static_cast<int>(i), -r.escape(i));
  }
  r.generator.resize(dim, dim);
  r.generator.setFromTriplets(all.begin(), all.end());
  r.generator.makeCompressed();
  return r;
}

struct ProjectedSolver::Impl {
  SparseMatrix matrix;  // the factorised matrix must outlive the solver
  detail::SparseSolver<SparseMatrix> lu;
  Eigen::Index dim = 0;
};

namespace {

// Row of the generator replaced by the pin p_0 = 1. A dense normalisation
// row would destroy the lattice fill pattern, so normalisation and the
// zero-sum constraint are imposed after each solve instead.
constexpr Eigen::Index kReplacedRow = 0;

}  // namespace

ProjectedSolver::ProjectedSolver(const SparseMatrix& generator) : impl_(std::make_unique<Impl>()) {
  const Eigen::Index dim = generator.rows();
  impl_->dim = dim;
  using T = Eigen::Triplet<double>;
  std::vector<T> t;
  t.reserve(static_cast<std::size_t>(generator.nonZeros() + 1));
  for (Eigen::Index col = 0; col < generator.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(generator, col); it; ++it) {
      if (it.row() != kReplacedRow) {
        t.emplace_back(static_cast<int>(it.row()), static_cast<int>(col), it.value());
      }
    }
  }
  t.emplace_back(static_cast<int>(kReplacedRow), static_cast<int>(kReplacedRow), 1.0);
  SparseMatrix& a = impl_->matrix;
  a.resize(dim, dim);
  a.setFromTriplets(t.begin(), t.end());
  a.makeCompressed();
  impl_->lu.compute(a);
  if (impl_->lu.info() != Eigen::Success) {
    throw NumericalError("projected generator factorisation failed");
  }
}

ProjectedSolver::~ProjectedSolver() = default;
ProjectedSolver::ProjectedSolver(ProjectedSolver&&) noexcept = default;
ProjectedSolver& ProjectedSolver::operator=(ProjectedSolver&&) noexcept = default;

Eigen::VectorXd ProjectedSolver::steady_state() const {
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(impl_->dim);
  rhs(kReplacedRow) = 1.0;
  Eigen::VectorXd p = impl_->lu.solve(rhs);
  if (impl_->lu.info() != Eigen::Success || !p.allFinite() || !(p.sum() > 0.0)) {
    throw NumericalError("steady-state solve failed");
  }
  p /= p.sum();
  const double lowest = p.minCoeff();
  if (lowest < -1e-8) {
    std::ostringstream os;
    os << "steady state has a negative entry " << lowest << "; generator is rank deficient";
    throw NumericalError(os.str());
  }
  p = p.cwiseMax(0.0);
  p /= p.sum();
  return p;
}

Eigen::VectorXd ProjectedSolver::drazin_apply(const Eigen::VectorXd& p,
                                              const Eigen::VectorXd& y) const {
  Eigen::VectorXd rhs = y - p * y.sum();
  rhs(kReplacedRow) = 0.0;
  Eigen::VectorXd x = impl_->lu.solve(rhs);
  if (impl_->lu.info() != Eigen::Success || !x.allFinite()) {
    throw NumericalError("projected Drazin solve failed");
  }
  // Remove the stationary component so that 1^T x = 0.
  x -= p * x.sum();
  return x;
}

Eigen::VectorXd steady_state(const RateMatrix& rates) {
  return ProjectedSolver(rates.generator).steady_state();
}

double boundary_mass(const TruncatedStateSpace& space, const Eigen::VectorXd& p) {
  double mass = 0.0;
  for (int a = 0; a <= space.n_max_h(); ++a) {
    for (int b = 0; b <= space.n_max_c(); ++b) {
      if (a == space.n_max_h() || b == space.n_max_c()) {
        mass += p(static_cast<Eigen::Index>(space.index(a, b)));
      }
    }
  }
  return mass;
}

namespace {

Cumulants drazin_with(const RateMatrix& rates, const ProjectedSolver& solver,
                      const Eigen::VectorXd& p) {
  const SparseMatrix w1 = rates.jump_plus - rates.jump_minus;
  const SparseMatrix w2 = rates.jump_plus + rates.jump_minus;
  const Eigen::VectorXd w1p = w1 * p;
  Cumulants c;
  c.mean = w1p.sum();
  const Eigen::VectorXd x = solver.drazin_apply(p, w1p);
  const Eigen::VectorXd w1x = w1 * x;
  c.noise = (w2 * p).sum() - 2.0 * w1x.sum();
  return c;
}

}  // namespace

Cumulants fcs_cumulants_drazin(const RateMatrix& rates, const Eigen::VectorXd& p) {
  return drazin_with(rates, ProjectedSolver(rates.generator), p);
}

namespace {

// The noise is a small difference of O(Gamma_I n^2) terms at strong
// coupling, so the closure is solved in extended precision.
using ld = long double;
using Matrix5l = Eigen::Matrix<ld, 5, 5>;
using Vector5l = Eigen::Matrix<ld, 5, 1>;

void fill_closure(const EngineParams& p, Matrix5l& a, Vector5l& b) {
  const ld kh = p.kappa_h;
  const ld kc = p.kappa_c;
  const ld nh = p.nbar_h();
  const ld nc = p.nbar_c();
  const ld gm = 4.0L * static_cast<ld>(p.g) * static_cast<ld>(p.g) / (kh + kc);

  // m = (<n_h>, <n_c>, <n_h^2>, <n_c^2>, <n_h n_c>)
  a << -(gm + kh), gm, 0.0L, 0.0L, 0.0L,
       gm, -(gm + kc), 0.0L, 0.0L, 0.0L,
       gm + kh + 4.0L * kh * nh, gm, -2.0L * (gm + kh), 0.0L, 4.0L * gm,
       gm, gm + kc + 4.0L * kc * nc, 0.0L, -2.0L * (gm + kc), 4.0L * gm,
       kc * nc - gm, kh * nh - gm, gm, gm, -(4.0L * gm + kh + kc);
  b << kh * nh, kc * nc, kh * nh, kc * nc, 0.0L;
}

Vector5l solve_closure(const EngineParams& p) {
  Matrix5l a;
  Vector5l b;
  fill_closure(p, a, b);
  Eigen::FullPivLU<Matrix5l> lu(a);
  if (!lu.isInvertible()) throw NumericalError("particle moment system is singular");
  return lu.solve(-b);
}

}  // namespace

MomentClosure build_moment_closure(const EngineParams& params) {
  Matrix5l a;
  Vector5l b;
  fill_closure(validate(params).params, a, b);
  return {a.cast<double>(), b.cast<double>()};
}

Eigen::Matrix<double, 5, 1> steady_moments(const EngineParams& params) {
  return solve_closure(validate(params).params).cast<double>();
}

Cumulants fcs_cumulants_moments(const EngineParams& params) {
  const EngineParams p = validate(params).params;
  if (closed_form::transfer_rate(p) == 0.0) return {};
  const ld gm = 4.0L * static_cast<ld>(p.g) * static_cast<ld>(p.g) /
                (static_cast<ld>(p.kappa_h) + static_cast<ld>(p.kappa_c));
  const Vector5l m = solve_closure(p);
  const ld nh = m(0);
  const ld nc = m(1);
  const ld nh2 = m(2);
  const ld nc2 = m(3);
  const ld nhc = m(4);

  const ld mean = gm * (nh - nc);
  const ld w2 = gm * (nh + nc + 2.0L * nhc);
  // Occupations measured just after a transfer, weighted by its sign.
  const ld nh_w1 = gm * (nh2 - nh - 3.0L * nhc - nc);
  const ld nc_w1 = gm * (3.0L * nhc + nh - nc2 + nc);
  const ld m0h = nh_w1 - nh * mean;
  const ld m0c = nc_w1 - nc * mean;
  // Inverse of [[-kh - gm, gm], [gm, -kc - gm]] applied to m0.
  const ld a = -static_cast<ld>(p.kappa_h) - gm;
  const ld d = -static_cast<ld>(p.kappa_c) - gm;
  const ld det = a * d - gm * gm;
  const ld v0 = (d * m0h - gm * m0c) / det;
  const ld v1 = (a * m0c - gm * m0h) / det;
  Cumulants c;
  c.mean = static_cast<double>(mean);
  c.noise = static_cast<double>(w2 - 2.0L * gm * (v0 - v1));
  return c;
}

TruncatedSolution solve_truncated(const EngineParams& params, const TruncatedStateSpace& space) {
  TruncatedSolution s;
  s.rates = build_generator(params, space);
  const ProjectedSolver solver(s.rates.generator);
  s.p = solver.steady_state();
  s.boundary_mass = boundary_mass(space, s.p);
  s.cumulants = drazin_with(s.rates, solver, s.p);
  return s;
}

namespace {

// Smallest N with (1 - q) q^N < tolerance / 4 for a geometric law of mean
// `mean`; a first guess for the cutoff of one mode.
int geometric_cutoff(double mean, double tolerance) {
  if (!(mean > 0.0)) return 1;
  const double q = mean / (mean + 1.0);
  const double n = std::log(0.25 * tolerance * (mean + 1.0)) / std::log(q);
  return static_cast<int>(std::min(std::ceil(n), 1e6));
}

double shell_mass(const TruncatedStateSpace& space, const Eigen::VectorXd& p, bool hot) {
  double mass = 0.0;
  if (hot) {
    for (int b = 0; b <= space.n_max_c(); ++b) {
      mass += p(static_cast<Eigen::Index>(space.index(space.n_max_h(), b)));
    }
  } else {
    for (int a = 0; a <= space.n_max_h(); ++a) {
      mass += p(static_cast<Eigen::Index>(space.index(a, space.n_max_c())));
    }
  }
  return mass;
}

}  // namespace

TruncatedSolution solve_adaptive(const EngineParams& params, double tolerance) {
  const EngineParams p = validate(params).params;
  const auto m = steady_moments(p);
  int mh = std::max(static_cast<int>(std::ceil(10.0 * (p.nbar_h() + 1.0))), geometric_cutoff(m(0), tolerance));
  int mc = std::max(static_cast<int>(std::ceil(10.0 * (p.nbar_c() + 1.0))), geometric_cutoff(m(1), tolerance));
  for (;;) {
    const TruncatedStateSpace space(mh, mc);
    TruncatedSolution s = solve_truncated(p, space);
    if (s.boundary_mass < tolerance) return s;
    const bool grow_h = shell_mass(space, s.p, true) > 0.5 * tolerance;
    const bool grow_c = shell_mass(space, s.p, false) > 0.5 * tolerance;
    if (grow_h) mh *= 2;
    if (grow_c) mc *= 2;
    if (!grow_h && !grow_c) mh *= 2;
  }
}

PowerStats drazin_stats(const EngineParams& params, double tolerance) {
  const EngineParams p = validate(params).params;
  const double d = p.delta();
  if (p.g == 0.0) return make_power_stats(0.0, 0.0, d);
  const auto s = solve_adaptive(p, tolerance);
  return make_power_stats(d * s.cumulants.mean, d * d * s.cumulants.noise, d);
}

PowerStats moment_stats(const EngineParams& params) {
  const EngineParams p = validate(params).params;
  const double d = p.delta();
  const auto c = fcs_cumulants_moments(p);
  return make_power_stats(d * c.mean, d * d * c.noise, d);
}

}  // namespace bhe::particle
