#pragma once

// Shared parameter and result types for the two-mode bosonic heat engine.
// Natural units: hbar = k_B = 1. All rates are in units of a caller-chosen
// reference rate.

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace bhe {

enum class Model { quantum, wave, particle };

std::string_view to_string(Model m);

/// Thrown for parameters outside the physical domain.
class ParameterError : public std::invalid_argument {
 public:
  explicit ParameterError(const std::string& what) : std::invalid_argument(what) {}
};

/// Thrown when a numerical route fails an internal consistency check.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// Mean bath occupations given directly.
struct Occupations {
  double hot = 0.0;
  double cold = 0.0;
  friend bool operator==(const Occupations&, const Occupations&) = default;
};

/// Bath temperatures; occupations follow from the Bose-Einstein law.
struct Temperatures {
  double hot = 1.0;
  double cold = 1.0;
  friend bool operator==(const Temperatures&, const Temperatures&) = default;
};

using OccupationSpec = std::variant<Occupations, Temperatures>;

struct EngineParams {
  double g = 0.0;        // inter-mode coupling
  double kappa_h = 1.0;  // hot bath coupling rate
  double kappa_c = 1.0;  // cold bath coupling rate
  double omega_h = 2.0;
  double omega_c = 1.0;
  OccupationSpec occupation = Occupations{};

  double delta() const { return omega_h - omega_c; }
  double nbar_h() const;
  double nbar_c() const;

  /// Convenience for the (Delta, nbar_h, nbar_c) parameterisation. Only the
  /// frequency difference enters any observable when occupations are given
  /// directly, so omega_c is pinned to 1.
  static EngineParams from_occupations(double g, double kappa_h, double kappa_c,
                                       double delta, double nbar_h, double nbar_c);
  static EngineParams from_temperatures(double g, double kappa_h, double kappa_c,
                                        double omega_h, double omega_c, double t_h,
                                        double t_c);

  friend bool operator==(const EngineParams&, const EngineParams&) = default;
};

/// Wave model with white-noise strength Phi_alpha = nbar_alpha + offset_c.
struct WaveParams {
  EngineParams base;
  double offset_c = 0.0;

  double phi_h() const { return base.nbar_h() + offset_c; }
  double phi_c() const { return base.nbar_c() + offset_c; }
};

/// 1 / (exp(omega/T) - 1). Throws ParameterError on non-finite or
/// non-positive input.
double bose_occupation(double omega, double temperature);

/// Inverse of bose_occupation in the combination omega/T = ln(1 + 1/nbar).
/// Returns +inf for nbar = 0.
double inverse_temperature_ratio(double nbar);

struct ValidationReport {
  EngineParams params;  // normalised: occupations always in direct form
  std::vector<std::string> warnings;
};

/// Checks the physical domain and resolves thermal occupations. Throws
/// ParameterError listing every violated constraint.
ValidationReport validate(const EngineParams& params);

inline constexpr double kDefaultFanoFloor = 1e-14;

/// Power statistics of one model. `fano` is empty when |mean_power| is
/// below the configured floor (equilibrium).
struct PowerStats {
  double mean_power = 0.0;
  double zero_freq_noise = 0.0;
  std::optional<double> fano;
};

PowerStats make_power_stats(double mean_power, double noise, double delta,
                            double fano_floor = kDefaultFanoFloor);

/// Equilibrium coefficient E and shot coefficient S (or S_p) of a model's
/// zero-frequency power noise.
struct NoiseDecomposition {
  double equilibrium = 0.0;
  double shot = 0.0;
  Model model = Model::quantum;

  /// Quantum/particle: E[nh(nh+1) + nc(nc+1)] - shot (nh-nc)^2.
  /// Wave: E[phi_h^2 + phi_c^2] - shot (phi_h - phi_c)^2.
  double assemble(double occ_h, double occ_c) const;
};

}  // namespace bhe
