#pragma once

// Monte Carlo for the classical wave engine: Euler-Maruyama integration of
// the rotating-frame Langevin equations
//   dA_h = (-kappa_h/2 A_h - i g A_c) dt - sqrt(kappa_h) dxi_h
//   dA_c = (-kappa_c/2 A_c - i g A_h) dt - sqrt(kappa_c) dxi_c
// with independent complex Gaussian increments, <|dxi_a|^2> = Phi_a dt.
// Power is Delta I(t) with I = i g (A_h^* A_c - A_c^* A_h).

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "bhe/estimate.hpp"
#include "bhe/params.hpp"
#include "bhe/rng.hpp"

namespace bhe::wave {

struct TrajectoryConfig {
  double dt = 0.01;
  double t_burn = 20.0;
  double t_total = 2000.0;  // includes the burn-in
  int n_traj = 512;
  std::uint64_t seed = 1;
  unsigned workers = 0;  // 0: hardware concurrency
  // Work-variance estimator: segment length (0: 20 / min kappa) and
  // checkpoints per segment.
  double segment_length = 0.0;
  int checkpoints = 20;
  // Batch-means cross-check: number of batches per trajectory.
  int batches = 10;
};

/// Throws ParameterError unless dt <= 0.01 min(1/kappa_h, 1/kappa_c, 1/g),
/// t_burn >= 10 / min(kappa), and the windows fit inside the run.
void validate_config(const WaveParams& params, const TrajectoryConfig& config);

/// One integrator instance; state is the pair of complex amplitudes.
class Integrator {
 public:
  Integrator(const WaveParams& params, double dt);

  /// Draws the amplitudes from the uncoupled stationary state.
  void reset_stationary(Rng& rng);
  void set_state(std::complex<double> a_h, std::complex<double> a_c);

  /// One Euler-Maruyama step with increments drawn from rng.
  void step(Rng& rng);
  /// One step with caller-supplied unit-variance normals (re_h, im_h, re_c, im_c),
  /// scaled internally by sqrt(Phi dt / 2).
  void step_with(const double (&normals)[4]);

  double current() const;
  /// Gamma_I (|A_h|^2 - |A_c|^2), the steady-state equivalent of current().
  double population_current() const;

  std::complex<double> a_h() const { return a_h_; }
  std::complex<double> a_c() const { return a_c_; }
  double dt() const { return dt_; }

  /// Throws NumericalError if the amplitudes overflowed.
  void check_finite(double t) const;

 private:
  double g_;
  double decay_h_;
  double decay_c_;
  double noise_h_;  // sqrt(kappa_h) sqrt(Phi_h dt / 2)
  double noise_c_;
  double gamma_i_;
  double dt_;
  std::complex<double> a_h_{};
  std::complex<double> a_c_{};
};

struct TracePoint {
  double t;
  std::complex<double> a_h;
  std::complex<double> a_c;
  double current;
};

/// Time series of one trajectory (index `traj` of the seeded ensemble),
/// sampled every `stride` steps from t = 0. Burn-in is included.
std::vector<TracePoint> simulate_wave(const WaveParams& params, const TrajectoryConfig& config,
                                      std::size_t traj = 0, std::size_t stride = 1);

/// CSV with header t,re_a_h,im_a_h,re_a_c,im_a_c,current.
void write_trace_csv(std::ostream& out, const std::vector<TracePoint>& trace);

struct PowerEstimate {
  TrajectoryEstimate mean_power;             // Delta x time-averaged I(t)
  TrajectoryEstimate population_mean_power;  // Delta Gamma_I (|A_h|^2 - |A_c|^2)
  std::optional<TrajectoryEstimate> noise;   // slope of Var[W(t)]
  std::optional<TrajectoryEstimate> noise_batch_means;
};

/// Ensemble estimate after burn-in. The noise is absent when fewer than
/// kMinTrajectoriesForNoise trajectories are run.
PowerEstimate estimate_power_stats(const WaveParams& params, const TrajectoryConfig& config);

struct StepHalvingReport {
  PowerEstimate coarse;  // step dt
  PowerEstimate fine;    // step dt/2 driven by the same Brownian path
  double mean_z = 0.0;   // (coarse - fine) / sqrt(se_c^2 + se_f^2)
  double noise_z = 0.0;
  bool passed = false;   // both |z| <= 2
};

StepHalvingReport step_halving_check(const WaveParams& params, const TrajectoryConfig& config);

}  // namespace bhe::wave
