#pragma once

// Derived quantities: Fano factors and gaps, entropy production and TUR
// bounds, mismatch maximisers, and parameter sweeps.

#include <functional>
#include <optional>
#include <string_view>
#include <string>
#include <vector>

#include "bhe/gillespie.hpp"
#include "bhe/params.hpp"
#include "bhe/wave_trajectory.hpp"

namespace bhe::analysis {

/// noise / (mean Delta); empty at equilibrium.
std::optional<double> fano(const PowerStats& stats);

struct FanoGaps {
  std::optional<double> quantum_wave;      // (nh + nc) / (nh - nc)
  std::optional<double> quantum_particle;  // (S_p - S)(nh - nc) / E
};

FanoGaps fano_gaps(const EngineParams& params);

/// Omega_c/T_c - Omega_h/T_h, from ln(1 + 1/nbar) when occupations are given.
double affinity(const EngineParams& params);

/// Entropy production rate <I> (Omega_c/T_c - Omega_h/T_h).
double entropy_rate(const EngineParams& params, double mean_current);

/// 2 / affinity: lower bound on the Fano factor.
double tur_bound(const EngineParams& params);

/// 2 / (1/nbar_c - 1/nbar_h): the wave model's modified bound.
double modified_tur_bound(const EngineParams& params);

struct TurReport {
  std::optional<double> fano;
  double standard_bound = 0.0;
  double modified_bound = 0.0;
  bool satisfies_standard = false;
  bool satisfies_modified = false;
  /// Standard bound for quantum and particle, modified bound for wave.
  bool satisfied = false;
};

TurReport tur_check(const EngineParams& params, const PowerStats& stats, Model model);

/// Wave noise at offset C minus quantum noise: E[(2C - 1)(nh + nc) + 2C^2].
double wave_quantum_noise_difference(const EngineParams& params, double offset_c);

struct MismatchMaxima {
  double noise_mismatch = 0.0;  // argmax over g/kappa of (S_p - S)(nh - nc)^2
  double fano_gap = 0.0;        // argmax over g/kappa of |quantum-particle Fano gap|
};

/// Requires kappa_h == kappa_c and nbar_h != nbar_c. Scans g/kappa over [1e-2, 1e2] on 200 log
/// points, then refines with golden section on the log axis to 1e-6.
MismatchMaxima find_mismatch_maxima(const EngineParams& params);

/// Golden-section maximisation of f over ln x in [lo, hi] after a coarse
/// log-spaced scan with `scan_points` points.
double log_argmax(const std::function<double(double)>& f, double lo, double hi,
                  int scan_points = 200, double tolerance = 1e-6);

enum class Route { closed_form, moment, fcs, monte_carlo };

std::string_view to_string(Route r);
std::optional<Route> parse_route(std::string_view s);

/// Throws ParameterError for combinations that have no implementation.
void check_route(Model model, Route route);

enum class Axis { coupling, hot_occupation };

std::string_view to_string(Axis a);

struct ModelRoute {
  Model model;
  Route route;
};

struct SweepSpec {
  Axis axis = Axis::coupling;  // coupling sweeps g / kappa_h
  std::vector<double> grid;
  EngineParams base;
  double wave_offset = 0.0;
  std::vector<ModelRoute> models = {{Model::quantum, Route::closed_form},
                                    {Model::wave, Route::closed_form},
                                    {Model::particle, Route::closed_form}};
  unsigned workers = 0;
  wave::TrajectoryConfig wave_mc;
  particle::GillespieConfig particle_mc;
};

/// Log-spaced grid of n points in [lo, hi].
std::vector<double> log_grid(double lo, double hi, std::size_t n);

struct SweepCell {
  std::optional<PowerStats> stats;
};

struct SweepRow {
  double x = 0.0;
  std::vector<SweepCell> cells;  // aligned with SweepSpec::models
  double tur_bound = 0.0;
  double tur_bound_wave = 0.0;
  std::string error;  // empty unless the point failed
};

struct SweepTable {
  std::string x_name;
  std::vector<ModelRoute> models;
  std::vector<SweepRow> rows;
};

/// Parameters at one grid point.
EngineParams sweep_point(const SweepSpec& spec, double x);

/// Evaluates one model by the requested route. The wave Monte Carlo step is
/// clamped to the stability limit of the point.
PowerStats evaluate_route(const EngineParams& params, Model model, Route route,
                          const SweepSpec& spec);

/// Rows in grid order; points evaluate concurrently. A failing point keeps
/// its row with the error message and empty cells.
SweepTable run_sweep(const SweepSpec& spec);

}  // namespace bhe::analysis
