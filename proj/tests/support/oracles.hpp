#pragma once

// Reference implementations used only by the tests. They share no code
// with the library beyond the parameter struct.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <utility>
#include <vector>

#include "bhe/params.hpp"

namespace oracle {

using bhe::EngineParams;
using cd = std::complex<double>;

inline double rel(double a, double b) {
  const double s = std::max(std::abs(a), std::abs(b));
  return s == 0.0 ? 0.0 : std::abs(a - b) / s;
}

inline EngineParams fig2(double g_over_kappa = 1.0) {
  return EngineParams::from_occupations(g_over_kappa, 1.0, 1.0, 1.0, 2.0, 0.1);
}

// Frozen reference values at g = kappa = Delta = 1, nbar = (2, 0.1).
inline constexpr double kMeanPower = 0.76;
inline constexpr double kQuantumNoise = 2.03968;
inline constexpr double kWaveNoise = 1.19968;
inline constexpr double kParticleNoise = 1.8416457142857;
inline constexpr double kParticleNoiseKappaH2 = 2.0630755686588;

inline double mean_power(const EngineParams& p) {
  const double g2 = p.g * p.g;
  const double kh = p.kappa_h;
  const double kc = p.kappa_c;
  return 4.0 * g2 * kh * kc * p.delta() * (p.nbar_h() - p.nbar_c()) / ((4.0 * g2 + kh * kc) * (kh + kc));
}

struct Coefficients {
  double e;   // equilibrium
  double s;   // quantum / wave shot
  double sp;  // particle shot
};

// Equal-rate forms: E = 2 g^2 kappa Delta^2 / (4 g^2 + kappa^2),
// S = E [1 - 2 g^2 (4 g^2 + 5 kappa^2) / (4 g^2 + kappa^2)^2],
// S_p = S + E 24 g^4 kappa^2 / ((6 g^2 + kappa^2)(4 g^2 + kappa^2)^2).
inline Coefficients equal_kappa(double g, double kappa, double delta) {
  const double g2 = g * g;
  const double k2 = kappa * kappa;
  const double a = 4.0 * g2 + k2;
  const double e = 2.0 * g2 * kappa * delta * delta / a;
  const double s = e * (1.0 - 2.0 * g2 * (4.0 * g2 + 5.0 * k2) / (a * a));
  const double sp = s + e * 24.0 * g2 * g2 * k2 / ((6.0 * g2 + k2) * a * a);
  return {e, s, sp};
}

inline double quantum_noise_equal(const EngineParams& p) {
  const auto c = equal_kappa(p.g, p.kappa_h, p.delta());
  const double nh = p.nbar_h();
  const double nc = p.nbar_c();
  return c.e * (nh * (nh + 1) + nc * (nc + 1)) - c.s * (nh - nc) * (nh - nc);
}

inline double wave_noise_equal(const EngineParams& p, double offset = 0.0) {
  const auto c = equal_kappa(p.g, p.kappa_h, p.delta());
  const double ph = p.nbar_h() + offset;
  const double pc = p.nbar_c() + offset;
  return c.e * (ph * ph + pc * pc) - c.s * (ph - pc) * (ph - pc);
}

inline double particle_noise_equal(const EngineParams& p) {
  const auto c = equal_kappa(p.g, p.kappa_h, p.delta());
  const double nh = p.nbar_h();
  const double nc = p.nbar_c();
  return c.e * (nh * (nh + 1) + nc * (nc + 1)) - c.sp * (nh - nc) * (nh - nc);
}

// Unequal rates, with k = kh kc and X = [(kh + kc)(4 g^2 + k)]^-1:
// E = 4 g^2 k Delta^2 X,
// S = 4 g^2 k [k^2 ((kh + kc)^2 - 8 g^2) + 16 g^4 (kh^2 + kc^2)] Delta^2 X^3,
// S_p - S = 256 g^6 k^3 (12 g^2 + kh^2 + kc^2 + 4 k) Delta^2 X^3
//           / [48 g^4 + k (kh + kc)^2 + 4 g^2 (kh^2 + kc^2 + 6 k)].
inline Coefficients general(const EngineParams& p) {
  const double g2 = p.g * p.g;
  const double kh = p.kappa_h;
  const double kc = p.kappa_c;
  const double k = kh * kc;
  const double ks = kh + kc;
  const double d2 = p.delta() * p.delta();
  const double x = 1.0 / (ks * (4.0 * g2 + k));
  const double x3 = x * x * x;
  const double e = 4.0 * g2 * k * d2 * x;
  const double s = 4.0 * g2 * k * (k * k * (ks * ks - 8.0 * g2) + 16.0 * g2 * g2 * (kh * kh + kc * kc)) * d2 * x3;
  const double num = 256.0 * g2 * g2 * g2 * k * k * k * (12.0 * g2 + kh * kh + kc * kc + 4.0 * k);
  const double den = 48.0 * g2 * g2 + k * ks * ks + 4.0 * g2 * (kh * kh + kc * kc + 6.0 * k);
  return {e, s, s + num / den * d2 * x3};
}

inline double quantum_noise(const EngineParams& p) {
  const auto c = general(p);
  const double nh = p.nbar_h();
  const double nc = p.nbar_c();
  return c.e * (nh * (nh + 1) + nc * (nc + 1)) - c.s * (nh - nc) * (nh - nc);
}

inline double wave_noise(const EngineParams& p, double offset = 0.0) {
  const auto c = general(p);
  const double ph = p.nbar_h() + offset;
  const double pc = p.nbar_c() + offset;
  return c.e * (ph * ph + pc * pc) - c.s * (ph - pc) * (ph - pc);
}

inline double particle_noise(const EngineParams& p) {
  const auto c = general(p);
  const double nh = p.nbar_h();
  const double nc = p.nbar_c();
  return c.e * (nh * (nh + 1) + nc * (nc + 1)) - c.sp * (nh - nc) * (nh - nc);
}

// Weak coupling: Poisson transfers at G_hc = G nh (nc + 1), G_ch = G nc (nh + 1),
// G = 4 g^2 / (kh + kc).
inline std::pair<double, double> poisson(const EngineParams& p) {
  const double gi = 4.0 * p.g * p.g / (p.kappa_h + p.kappa_c);
  const double up = gi * p.nbar_h() * (p.nbar_c() + 1.0);
  const double down = gi * p.nbar_c() * (p.nbar_h() + 1.0);
  return {p.delta() * (up - down), p.delta() * p.delta() * (up + down)};
}

// Strong coupling: one oscillator between the two baths.
inline std::pair<double, double> hybridized(const EngineParams& p) {
  const double kh = p.kappa_h;
  const double kc = p.kappa_c;
  const double ks = kh + kc;
  const double nh = p.nbar_h();
  const double nc = p.nbar_c();
  const double d = p.delta();
  const double mean = kh * kc * d * (nh - nc) / ks;
  const double noise = kh * kc * d * d / (ks * ks * ks) *
                       (ks * ks * (nh * (nh + 1) + nc * (nc + 1)) - (nh - nc) * (nh - nc) * (kh * kh + kc * kc));
  return {mean, noise};
}

// ln(1 + 1/nc) - ln(1 + 1/nh)
inline double affinity(const EngineParams& p) {
  return std::log1p(1.0 / p.nbar_c()) - std::log1p(1.0 / p.nbar_h());
}

// <a_alpha^+ a_beta> of the linear quantum model from the Lyapunov equation
// A^* N + N A^T + D = 0 with da/dt = A a + noise, A = [[-kh/2, -ig], [-ig, -kc/2]].
inline Eigen::Matrix2cd covariance(const EngineParams& p) {
  const cd i(0.0, 1.0);
  Eigen::Matrix2cd a;
  a << -p.kappa_h / 2.0, -i * p.g, -i * p.g, -p.kappa_c / 2.0;
  Eigen::Matrix2cd d = Eigen::Matrix2cd::Zero();
  d(0, 0) = p.kappa_h * p.nbar_h();
  d(1, 1) = p.kappa_c * p.nbar_c();
  // vec(A^* N) = (I kron A^*) vec N, vec(N A^T) = (A kron I) vec N.
  const Eigen::Matrix2cd id = Eigen::Matrix2cd::Identity();
  Eigen::Matrix4cd m = Eigen::Matrix4cd::Zero();
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c) {
      m.block<2, 2>(2 * r, 2 * c) += id(r, c) * a.conjugate();
      m.block<2, 2>(2 * r, 2 * c) += a(r, c) * id;
    }
  const Eigen::Vector4cd rhs = -Eigen::Map<const Eigen::Vector4cd>(d.data());
  const Eigen::Vector4cd v = m.fullPivLu().solve(rhs);
  return Eigen::Map<const Eigen::Matrix2cd>(v.data());
}

// Brute-force quantum model: dense Liouvillian on the full two-mode space
// with n <= n_max per mode. Returns (mean power, noise).
inline std::pair<double, double> dense_quantum(const EngineParams& p, int n_max) {
  using Mat = Eigen::MatrixXcd;
  const int m = n_max + 1;
  Mat a = Mat::Zero(m, m);
  for (int n = 1; n < m; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  const Mat id1 = Mat::Identity(m, m);
  auto kron = [](const Mat& x, const Mat& y) {
    Mat out(x.rows() * y.rows(), x.cols() * y.cols());
    for (int r = 0; r < x.rows(); ++r)
      for (int c = 0; c < x.cols(); ++c) out.block(r * y.rows(), c * y.cols(), y.rows(), y.cols()) = x(r, c) * y;
    return out;
  };
  const Mat ah = kron(a, id1);
  const Mat ac = kron(id1, a);
  const int d = m * m;
  const Mat id = Mat::Identity(d, d);
  const cd i(0.0, 1.0);
  const Mat h = p.g * (ah.adjoint() * ac + ac.adjoint() * ah);
  Mat l = -i * (kron(id, h) - kron(h.transpose(), id));
  auto dissipator = [&](const Mat& j, double rate) {
    const Mat jj = j.adjoint() * j;
    l += rate * (kron(j.conjugate(), j) - 0.5 * kron(id, jj) - 0.5 * kron(jj.transpose(), id));
  };
  dissipator(ah, p.kappa_h * (p.nbar_h() + 1.0));
  dissipator(ah.adjoint(), p.kappa_h * p.nbar_h());
  dissipator(ac, p.kappa_c * (p.nbar_c() + 1.0));
  dissipator(ac.adjoint(), p.kappa_c * p.nbar_c());

  const int big = d * d;
  Eigen::VectorXcd tr = Eigen::VectorXcd::Zero(big);
  for (int k = 0; k < d; ++k) tr(k * d + k) = 1.0;
  Mat pinned = l;
  pinned.row(0) = tr.transpose();
  Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(big);
  rhs(0) = 1.0;
  const Eigen::VectorXcd rho = pinned.partialPivLu().solve(rhs);
  const Mat rho_m = Eigen::Map<const Mat>(rho.data(), d, d);

  const Mat cur = i * p.g * (ah.adjoint() * ac - ac.adjoint() * ah);
  const double mean = (cur * rho_m).trace().real();
  // L^D = (L - rho tr^T)^-1 + rho tr^T
  const Mat proj = rho * tr.transpose();
  const Mat x = cur * rho_m;
  const Eigen::VectorXcd xv = Eigen::Map<const Eigen::VectorXcd>(x.data(), big);
  const Eigen::VectorXcd y = (l - proj).partialPivLu().solve(xv) + proj * xv;
  const Mat y_m = Eigen::Map<const Mat>(y.data(), d, d);
  const double noise = -2.0 * (cur * y_m).trace().real();
  const double dl = p.delta();
  return {dl * mean, dl * dl * noise};
}

// Group inverse of a generator with stationary vector p.
inline Eigen::MatrixXd dense_drazin(const Eigen::MatrixXd& l, const Eigen::VectorXd& p) {
  const Eigen::MatrixXd proj = p * Eigen::RowVectorXd::Ones(l.cols());
  return (l - proj).inverse() + proj;
}

// Stationary vector of a dense generator.
inline Eigen::VectorXd dense_stationary(const Eigen::MatrixXd& l) {
  Eigen::MatrixXd m = l;
  m.row(0).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(l.rows());
  rhs(0) = 1.0;
  return m.fullPivLu().solve(rhs);
}

// Geometric occupation law truncated to n <= n_max.
inline std::vector<double> truncated_geometric(double nbar, int n_max) {
  std::vector<double> w(static_cast<std::size_t>(n_max) + 1);
  const double q = nbar / (nbar + 1.0);
  double total = 0.0;
  for (int n = 0; n <= n_max; ++n) total += (w[static_cast<std::size_t>(n)] = std::pow(q, n));
  for (double& x : w) x /= total;
  return w;
}

// Independent random grid for the acceptance checks.
inline std::vector<EngineParams> grid(unsigned seed, std::size_t n) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto logu = [&](double lo, double hi) { return lo * std::pow(hi / lo, u(rng)); };
  std::vector<EngineParams> out;
  while (out.size() < n) {
    const double x = logu(1e-2, 1e2);
    const double kc = logu(0.5, 2.0);
    const double kh = kc * logu(0.2, 5.0);
    const double nh = 10.0 * u(rng);
    const double nc = 10.0 * u(rng);
    const double delta = 0.5 + 1.5 * u(rng);
    if (std::abs(nh - nc) < 1e-3) continue;
    out.push_back(EngineParams::from_occupations(x * std::sqrt(kh * kc), kh, kc, delta, nh, nc));
  }
  return out;
}

inline EngineParams forward(const EngineParams& p) {
  EngineParams q = p;
  q.occupation = bhe::Occupations{std::max(p.nbar_h(), p.nbar_c()), std::min(p.nbar_h(), p.nbar_c())};
  return q;
}

}  // namespace oracle
