#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>

namespace bhe {

struct Diagnostics {
  double effective_sample_size = 0.0;
  std::optional<double> step_halving_drift;  // (coarse - fine) / combined sigma
};

/// Monte Carlo estimate with its standard error and provenance seed.
struct TrajectoryEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t n_samples = 0;
  std::uint64_t seed = 0;
  Diagnostics diagnostics;
};

/// Below this many trajectories the variance-slope noise estimate is refused.
inline constexpr int kMinTrajectoriesForNoise = 8;

}  // namespace bhe
