#include "bhe/moment_engine.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <sstream>

namespace bhe::moments {

namespace {

using cd = std::complex<double>;
constexpr cd kI{0.0, 1.0};

// <a_mu^+ a_sig> from the packed covariance vector.
cd two_point(const Eigen::Vector4cd& theta, int mu, int sig) {
  if (mu == 0 && sig == 0) return theta(0);
  if (mu == 1 && sig == 1) return theta(1);
  if (mu == 0 && sig == 1) return theta(2);
  return theta(3);
}

}  // namespace

Systems build_systems(const EngineParams& p, const ModelSpec& spec) {
  const double g = p.g;
  const double kh = p.kappa_h;
  const double kc = p.kappa_c;
  const double kbar = 0.5 * (kh + kc);
  const cd ig = kI * g;

  double occ_h = p.nbar_h();
  double occ_c = p.nbar_c();
  if (spec.model == Model::wave) {
    occ_h += spec.offset_c;
    occ_c += spec.offset_c;
  } else if (spec.model != Model::quantum) {
    throw ParameterError("moment engine handles the quantum and wave models only");
  }

  Systems s;
  // Adjoint-Liouvillian equations for H = g (a_h^+ a_c + a_c^+ a_h):
  // d<a_h^+ a_c>/dt = -ig (N_h - N_c) - kbar <a_h^+ a_c>.
  s.moments.X << -kh, 0.0, -ig, ig,
                 0.0, -kc, ig, -ig,
                 -ig, ig, -kbar, 0.0,
                 ig, -ig, 0.0, -kbar;
  s.moments.Y << kh * occ_h, kc * occ_c, 0.0, 0.0;

  const double g2 = 2.0 * g * g;
  s.sigma.G << -kbar, 0.0, g2, -g2,
               0.0, -kbar, 0.0, 0.0,
               -1.0, 0.0, -kh, 0.0,
               1.0, 0.0, 0.0, -kc;
  s.sigma.F << 0.0, 0.0, occ_h * kh, occ_c * kc;
  return s;
}

double spectral_abscissa(const MomentSystem& sys) {
  Eigen::ComplexEigenSolver<Eigen::Matrix4cd> es(sys.X, false);
  return es.eigenvalues().real().maxCoeff();
}

Eigen::Vector4cd steady_covariances(const MomentSystem& sys) {
  Eigen::FullPivLU<Eigen::Matrix4cd> lu(sys.X);
  if (!lu.isInvertible()) throw NumericalError("covariance system X is singular");
  return lu.solve(-sys.Y.cast<cd>());
}

cd four_point(const Eigen::Vector4cd& theta, Model model, int mu, int nu, int gam, int sig) {
  const double commutator = (model == Model::quantum && nu == gam) ? 1.0 : 0.0;
  return two_point(theta, mu, nu) * two_point(theta, gam, sig) +
         two_point(theta, mu, sig) * (two_point(theta, gam, nu) + commutator);
}

std::array<cd, 8> contraction_table(const Eigen::Vector4cd& theta, Model model) {
  constexpr int h = 0;
  constexpr int c = 1;
  auto f = [&](int a, int b, int d, int e) { return four_point(theta, model, a, b, d, e); };
  return {f(h, c, h, c), f(c, h, c, h), f(h, c, c, h), f(c, h, h, c),
          f(h, h, h, c), f(c, c, c, h), f(h, h, c, h), f(c, c, h, c)};
}

Eigen::Vector4cd initial_conditions(const Eigen::Vector4cd& theta, double g, Model model) {
  const auto t = contraction_table(theta, model);
  const cd& hchc = t[0];
  const cd& chch = t[1];
  const cd& hcch = t[2];
  const cd& chhc = t[3];
  const cd& hhhc = t[4];
  const cd& ccch = t[5];
  const cd& hhch = t[6];
  const cd& cchc = t[7];

  const cd ig = kI * g;
  const cd mean_i = ig * (theta(2) - theta(3));
  const cd mean_h = g * (theta(2) + theta(3));

  // I = ig (a_h^+ a_c - a_c^+ a_h), H = g (a_h^+ a_c + a_c^+ a_h).
  const cd ii = -g * g * (hchc + chch - hcch - chhc);
  const cd hi = kI * g * g * (hchc - hcch + chhc - chch);
  const cd nhi = ig * (hhhc - hhch);
  const cd nci = ig * (cchc - ccch);

  Eigen::Vector4cd out;
  out << ii - mean_i * mean_i, hi - mean_h * mean_i, nhi - theta(0) * mean_i,
      nci - theta(1) * mean_i;
  return out;
}

double regression_noise(const SigmaSystem& sys, const Eigen::Vector4cd& initial) {
  Eigen::FullPivLU<Eigen::Matrix4d> lu(sys.G);
  if (!lu.isInvertible()) throw NumericalError("current-basis propagator G is singular");
  const Eigen::Matrix4cd g_inv = lu.inverse().cast<cd>();
  const cd first = (-2.0 * g_inv * initial)(0);
  const double scale = std::max(1.0, std::abs(first.real()));
  if (std::abs(first.imag()) > kImaginaryResidueTolerance * scale) {
    std::ostringstream os;
    os << "regression noise has imaginary residue " << first.imag();
    throw NumericalError(os.str());
  }
  return first.real();
}

Eigen::Vector4d steady_sigma(const SigmaSystem& sys) {
  return sys.G.fullPivLu().solve(-sys.F);
}

MomentResult evaluate(const EngineParams& p, const ModelSpec& spec) {
  const Systems sys = build_systems(p, spec);
  MomentResult r;
  r.theta = steady_covariances(sys.moments);
  r.initial = initial_conditions(r.theta, p.g, spec.model);
  const double d = p.delta();
  const double mean_current = (kI * p.g * (r.theta(2) - r.theta(3))).real();
  const double noise = d * d * regression_noise(sys.sigma, r.initial);
  r.stats = make_power_stats(d * mean_current, noise, d);
  r.mean_power_sigma = d * steady_sigma(sys.sigma)(0);
  return r;
}

}  // namespace bhe::moments
