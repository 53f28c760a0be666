#pragma once

// Estimators shared by the wave and particle Monte Carlo routes.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace bhe::stats {

struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t n_samples = 0;
};

/// Sample mean with standard error of the mean.
Estimate mean_with_error(std::span<const double> xs);

/// Least-squares slope of y against x.
double linear_slope(std::span<const double> x, std::span<const double> y);

/// Accumulated quantity (work or net count) sampled at K checkpoints inside
/// each of S consecutive segments of every trajectory. Values restart at
/// zero at each segment start, so each segment is one stationary sample of
/// the accumulation process W(t), t in (0, segment length].
class SegmentedAccumulation {
 public:
  SegmentedAccumulation(std::size_t n_traj, std::size_t segments, std::vector<double> times);

  std::size_t trajectories() const { return n_traj_; }
  std::size_t segments() const { return segments_; }
  std::size_t checkpoints() const { return times_.size(); }
  const std::vector<double>& times() const { return times_; }

  double& at(std::size_t traj, std::size_t segment, std::size_t k) {
    return data_[(traj * segments_ + segment) * times_.size() + k];
  }
  double at(std::size_t traj, std::size_t segment, std::size_t k) const {
    return data_[(traj * segments_ + segment) * times_.size() + k];
  }

  /// Slope of the ensemble variance Var[W(t)] over the final half of the
  /// checkpoints; equals the zero-frequency noise once t exceeds the
  /// correlation time. Error from a delete-one-group jackknife over
  /// trajectories.
  Estimate variance_slope(std::size_t max_groups = 64) const;

  /// Batch-means estimate Var[W(L)] / L with L the full segment length.
  Estimate batch_means(std::size_t max_groups = 64) const;

 private:
  std::size_t n_traj_;
  std::size_t segments_;
  std::vector<double> times_;
  std::vector<double> data_;
};

}  // namespace bhe::stats
