#pragma once

// Linear-algebra route to the mean power and zero-frequency noise of the
// quantum and wave models: steady second moments from the covariance
// equations of motion, then the regression theorem in the current basis
// sigma = (I, H, N_h, N_c) with Gaussian (Wick / Isserlis) initial
// correlators.

#include <Eigen/Dense>
#include <array>

#include "bhe/params.hpp"

namespace bhe::moments {

/// Which Gaussian model to evaluate. `offset_c` only applies to the wave
/// model (white-noise strength nbar + C).
struct ModelSpec {
  Model model = Model::quantum;
  double offset_c = 0.0;

  static ModelSpec quantum() { return {Model::quantum, 0.0}; }
  static ModelSpec wave(double c = 0.0) { return {Model::wave, c}; }
};

/// d<Theta>/dt = X <Theta> + Y with
/// Theta = (<a_h^+ a_h>, <a_c^+ a_c>, <a_h^+ a_c>, <a_c^+ a_h>).
struct MomentSystem {
  Eigen::Matrix4cd X;
  Eigen::Vector4d Y;
};

/// d<sigma>/dt = G <sigma> + F in the current basis (I, H, N_h, N_c).
struct SigmaSystem {
  Eigen::Matrix4d G;
  Eigen::Vector4d F;
};

struct Systems {
  MomentSystem moments;
  SigmaSystem sigma;
};

Systems build_systems(const EngineParams& p, const ModelSpec& spec);

/// Largest real part among the eigenvalues of X.
double spectral_abscissa(const MomentSystem& sys);

/// Solves X Theta = -Y. Throws NumericalError if X is singular.
Eigen::Vector4cd steady_covariances(const MomentSystem& sys);

/// Four-point functions <a_mu^+ a_nu a_gam^+ a_sig> (mode index 0 = hot,
/// 1 = cold) of a zero-mean Gaussian state with two-point functions Theta.
/// The quantum model keeps the commutator term delta_{nu gam}; the wave
/// (c-number) model drops it.
std::complex<double> four_point(const Eigen::Vector4cd& theta, Model model, int mu, int nu,
                                int gam, int sig);

/// The eight contractions needed for the initial correlators, in the order
/// hchc, chch, hcch, chhc, hhhc, ccch, hhch, cchc (letters give the mode of
/// each operator in a_mu^+ a_nu a_gam^+ a_sig).
std::array<std::complex<double>, 8> contraction_table(const Eigen::Vector4cd& theta, Model model);

/// Initial correlators (<dI dI>, <dH dI>, <dN_h dI>, <dN_c dI>).
Eigen::Vector4cd initial_conditions(const Eigen::Vector4cd& theta, double g, Model model);

/// Imaginary residue tolerated in the regression result before it is
/// declared inconsistent.
inline constexpr double kImaginaryResidueTolerance = 1e-10;

/// Zero-frequency current noise: first entry of -2 G^-1 <d sigma dI>.
/// Multiply by Delta^2 for power noise. Throws NumericalError if the result
/// carries an imaginary part above tolerance.
double regression_noise(const SigmaSystem& sys, const Eigen::Vector4cd& initial);

/// Steady-state <sigma> = -G^-1 F.
Eigen::Vector4d steady_sigma(const SigmaSystem& sys);

struct MomentResult {
  PowerStats stats;
  Eigen::Vector4cd theta;
  Eigen::Vector4cd initial;
  double mean_power_sigma = 0.0;  // Delta x first entry of -G^-1 F
};

/// End-to-end evaluation for one model.
MomentResult evaluate(const EngineParams& p, const ModelSpec& spec);

}  // namespace bhe::moments
