#pragma once

// Exact-jump simulation of the particle model. The net count N(t) goes up
// by one for every hot -> cold transfer and down by one for every
// cold -> hot transfer.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "bhe/estimate.hpp"
#include "bhe/params.hpp"

namespace bhe::particle {

struct GillespieConfig {
  double t_burn = 20.0;
  double t_total = 5000.0;  // includes the burn-in
  int n_traj = 256;
  std::uint64_t seed = 1;
  unsigned workers = 0;
  double segment_length = 0.0;  // 0: 20 / min kappa
  int checkpoints = 20;
  int batches = 10;
  int occupancy_cap = 0;  // 0: max(1000, 200 (max nbar + 1))
};

void validate_config(const EngineParams& params, const GillespieConfig& config);

enum class Event { hot_up, hot_down, cold_up, cold_down, transfer_hc, transfer_ch };

const char* to_string(Event e);

struct JumpRecord {
  double t;
  int n_h;  // occupations after the jump
  int n_c;
  Event event;
  long long count;
};

/// Jump record of trajectory `traj`, from t = 0 up to t_total or
/// `max_events` jumps.
std::vector<JumpRecord> simulate_jumps(const EngineParams& params, const GillespieConfig& config,
                                       std::size_t traj = 0, std::size_t max_events = 100000);

/// CSV with header t,n_h,n_c,event,count.
void write_jump_csv(std::ostream& out, const std::vector<JumpRecord>& jumps);

/// Estimates in current units (counts per unit time); multiply by Delta
/// and Delta^2 for power.
struct CountEstimate {
  TrajectoryEstimate mean_rate;
  std::optional<TrajectoryEstimate> noise;  // slope of Var[N(t)]
  std::optional<TrajectoryEstimate> noise_batch_means;
};

CountEstimate gillespie_simulate(const EngineParams& params, const GillespieConfig& config);

}  // namespace bhe::particle
