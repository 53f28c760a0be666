#pragma once

// Direct evaluation of the analytic power and noise expressions of the
// quantum, wave and particle engines, for arbitrary kappa_h, kappa_c.
//
// Noise is reported in power units (Delta^2 x rate); divide by Delta^2 for
// the current noise.

#include "bhe/params.hpp"

namespace bhe::closed_form {

/// Incoherent intra-system transfer rate Gamma_I = 4 g^2 / (kappa_h + kappa_c).
double transfer_rate(const EngineParams& p);

/// chi = [(kappa_h + kappa_c)(4 g^2 + kappa_h kappa_c)]^-1.
double chi(const EngineParams& p);

/// Average power, identical for all three models.
double mean_power(const EngineParams& p);

/// Same quantity written as three conductances in series:
/// Delta (nh - nc) / (1/kappa_h + 1/kappa_c + 1/Gamma_I).
double mean_power_series(const EngineParams& p);

/// E = 4 g^2 kappa_h kappa_c Delta^2 chi.
double equilibrium_coefficient(const EngineParams& p);

/// Shot coefficient S shared by the quantum and wave models.
double shot_coefficient(const EngineParams& p);

/// S_p - S, the extra shot noise suppression of the particle model (>= 0).
double particle_shot_excess(const EngineParams& p);

struct ModelNoise {
  NoiseDecomposition decomposition;
  double noise = 0.0;
};

ModelNoise quantum_noise(const EngineParams& p);
ModelNoise wave_noise(const WaveParams& p);
ModelNoise particle_noise(const EngineParams& p);

PowerStats quantum_stats(const EngineParams& p);
PowerStats wave_stats(const WaveParams& p);
PowerStats particle_stats(const EngineParams& p);

/// Weak-coupling limit: bi-directional Poisson transport with rates
/// Gamma_ab = Gamma_I nbar_a (nbar_b + 1).
PowerStats poisson_limit(const EngineParams& p);

/// Strong-coupling limit: the hybridised modes act as one oscillator
/// between two baths.
PowerStats hybridized_limit(const EngineParams& p);

/// Leading small-g behaviour of S_p - S (order g^6).
double particle_shot_excess_small_g(const EngineParams& p);

/// Leading large-g behaviour of S_p - S (order 1/g^2).
double particle_shot_excess_large_g(const EngineParams& p);

/// Equal-rate (kappa_h = kappa_c = kappa) specialisations of S and S_p.
namespace equal_kappa {
double shot_coefficient(double g, double kappa, double delta);
double particle_shot_coefficient(double g, double kappa, double delta);
}  // namespace equal_kappa

}  // namespace bhe::closed_form
