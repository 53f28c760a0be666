#include "bhe/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace bhe::stats {

Estimate mean_with_error(std::span<const double> xs) {
  Estimate e;
  e.n_samples = xs.size();
  if (xs.empty()) return e;
  const double n = static_cast<double>(xs.size());
  e.value = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - e.value) * (x - e.value);
    e.std_error = std::sqrt(ss / (n - 1.0) / n);
  }
  return e;
}

double linear_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw std::invalid_argument("linear_slope needs two or more paired points");
  }
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

SegmentedAccumulation::SegmentedAccumulation(std::size_t n_traj, std::size_t segments,
                                             std::vector<double> times)
    : n_traj_(n_traj),
      segments_(segments),
      times_(std::move(times)),
      data_(n_traj * segments * times_.size(), 0.0) {
  if (times_.empty() || segments == 0) {
    throw std::invalid_argument("SegmentedAccumulation needs checkpoints and segments");
  }
}

namespace {

struct Moments {
  double n = 0.0;
  double sum = 0.0;
  double sumsq = 0.0;

  Moments& operator+=(const Moments& o) {
    n += o.n;
    sum += o.sum;
    sumsq += o.sumsq;
    return *this;
  }
  Moments operator-(const Moments& o) const { return {n - o.n, sum - o.sum, sumsq - o.sumsq}; }

  double variance() const {
    const double mean = sum / n;
    return (sumsq - n * mean * mean) / (n - 1.0);
  }
};

// Per-group, per-checkpoint moments; groups are contiguous trajectory blocks.
std::vector<std::vector<Moments>> group_moments(const SegmentedAccumulation& acc,
                                                std::size_t groups,
                                                std::span<const std::size_t> ks) {
  std::vector<std::vector<Moments>> out(groups, std::vector<Moments>(ks.size()));
  for (std::size_t t = 0; t < acc.trajectories(); ++t) {
    const std::size_t gidx = t * groups / acc.trajectories();
    for (std::size_t s = 0; s < acc.segments(); ++s) {
      for (std::size_t j = 0; j < ks.size(); ++j) {
        const double w = acc.at(t, s, ks[j]);
        auto& m = out[gidx][j];
        m.n += 1.0;
        m.sum += w;
        m.sumsq += w * w;
      }
    }
  }
  return out;
}

template <typename Statistic>
Estimate jackknife(const std::vector<std::vector<Moments>>& per_group, Statistic stat,
                   std::size_t n_samples) {
  const std::size_t groups = per_group.size();
  const std::size_t width = per_group.front().size();
  std::vector<Moments> total(width);
  for (const auto& g : per_group) {
    for (std::size_t j = 0; j < width; ++j) total[j] += g[j];
  }
  Estimate e;
  e.value = stat(total);
  e.n_samples = n_samples;
  if (groups < 2) return e;
  std::vector<double> loo(groups);
  std::vector<Moments> reduced(width);
  for (std::size_t gi = 0; gi < groups; ++gi) {
    for (std::size_t j = 0; j < width; ++j) reduced[j] = total[j] - per_group[gi][j];
    loo[gi] = stat(reduced);
  }
  const double mean = std::accumulate(loo.begin(), loo.end(), 0.0) / static_cast<double>(groups);
  double ss = 0.0;
  for (double v : loo) ss += (v - mean) * (v - mean);
  e.std_error = std::sqrt(ss * static_cast<double>(groups - 1) / static_cast<double>(groups));
  return e;
}

}  // namespace

Estimate SegmentedAccumulation::variance_slope(std::size_t max_groups) const {
  const std::size_t k_total = times_.size();
  const std::size_t k_first = k_total / 2;
  std::vector<std::size_t> ks;
  std::vector<double> ts;
  for (std::size_t k = k_first; k < k_total; ++k) {
    ks.push_back(k);
    ts.push_back(times_[k]);
  }
  if (ks.size() < 2) throw std::invalid_argument("variance_slope needs at least 4 checkpoints");
  const std::size_t groups = std::max<std::size_t>(1, std::min(max_groups, n_traj_));
  const auto per_group = group_moments(*this, groups, ks);
  auto slope = [&ts](const std::vector<Moments>& m) {
    std::vector<double> vars(m.size());
    for (std::size_t j = 0; j < m.size(); ++j) vars[j] = m[j].variance();
    return linear_slope(ts, vars);
  };
  return jackknife(per_group, slope, n_traj_ * segments_);
}

Estimate SegmentedAccumulation::batch_means(std::size_t max_groups) const {
  const std::size_t last = times_.size() - 1;
  const double length = times_[last];
  const std::size_t groups = std::max<std::size_t>(1, std::min(max_groups, n_traj_));
  const std::size_t ks[] = {last};
  const auto per_group = group_moments(*this, groups, ks);
  auto rate = [length](const std::vector<Moments>& m) { return m[0].variance() / length; };
  return jackknife(per_group, rate, n_traj_ * segments_);
}

}  // namespace bhe::stats
