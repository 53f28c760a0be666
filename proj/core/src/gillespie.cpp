#include "bhe/gillespie.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <ostream>
#include <random>
#include <sstream>

#include "bhe/closed_form.hpp"
#include "bhe/parallel.hpp"
#include "bhe/rng.hpp"
#include "bhe/stats.hpp"

namespace bhe::particle {

const char* to_string(Event e) {
  switch (e) {
    case Event::hot_up: return "hot_up";
    case Event::hot_down: return "hot_down";
    case Event::cold_up: return "cold_up";
    case Event::cold_down: return "cold_down";
    case Event::transfer_hc: return "transfer_hc";
    case Event::transfer_ch: return "transfer_ch";
  }
  return "unknown";
}

namespace {

double resolved_segment_length(const EngineParams& p, const GillespieConfig& c) {
  if (c.segment_length > 0.0) return c.segment_length;
  return 20.0 / std::min(p.kappa_h, p.kappa_c);
}

int resolved_cap(const EngineParams& p, const GillespieConfig& c) {
  if (c.occupancy_cap > 0) return c.occupancy_cap;
  const double top = std::max(p.nbar_h(), p.nbar_c());
  return static_cast<int>(std::max(1000.0, std::ceil(200.0 * (top + 1.0))));
}

// Jump process state with rates for the six transition classes.
class Walker {
 public:
  Walker(const EngineParams& p, int cap)
      : kh_(p.kappa_h),
        kc_(p.kappa_c),
        nh_(p.nbar_h()),
        nc_(p.nbar_c()),
        gm_(closed_form::transfer_rate(p)),
        cap_(cap) {}

  void reset(Rng& rng) {
    // Product of geometric distributions with means nbar (uncoupled steady state).
    a_ = draw_geometric(rng, nh_);
    b_ = draw_geometric(rng, nc_);
    count_ = 0;
  }

  // Advances to the next jump. Returns the waiting time (inf if frozen).
  double next(Rng& rng, Event& ev) {
    const double ad = a_;
    const double bd = b_;
    rates_ = {kh_ * nh_ * (ad + 1.0), kh_ * (nh_ + 1.0) * ad, kc_ * nc_ * (bd + 1.0),
              kc_ * (nc_ + 1.0) * bd, gm_ * ad * (bd + 1.0), gm_ * bd * (ad + 1.0)};
    double total = 0.0;
    for (double r : rates_) total += r;
    if (total <= 0.0) return INFINITY;
    std::exponential_distribution<double> wait(total);
    const double tau = wait(rng);
    double u = std::uniform_real_distribution<double>(0.0, total)(rng);
    int k = 0;
    for (; k < 5; ++k) {
      if (u < rates_[k]) break;
      u -= rates_[k];
    }
    // Guard against rounding picking a zero-rate class.
    while (rates_[k] == 0.0) k = (k + 5) % 6;
    ev = static_cast<Event>(k);
    return tau;
  }

  void apply(Event ev, double t) {
    switch (ev) {
      case Event::hot_up: ++a_; break;
      case Event::hot_down: --a_; break;
      case Event::cold_up: ++b_; break;
      case Event::cold_down: --b_; break;
      case Event::transfer_hc: --a_; ++b_; ++count_; break;
      case Event::transfer_ch: ++a_; --b_; --count_; break;
    }
    if (a_ > cap_ || b_ > cap_) {
      std::ostringstream os;
      os << "particle occupation exceeded the safety cap " << cap_ << " at t = " << t
         << " (n_h = " << a_ << ", n_c = " << b_ << ")";
      throw NumericalError(os.str());
    }
  }

  int a() const { return a_; }
  int b() const { return b_; }
  long long count() const { return count_; }

 private:
  static int draw_geometric(Rng& rng, double mean) {
    if (mean <= 0.0) return 0;
    std::geometric_distribution<int> d(1.0 / (1.0 + mean));
    return d(rng);
  }

  double kh_, kc_, nh_, nc_, gm_;
  int cap_;
  int a_ = 0;
  int b_ = 0;
  long long count_ = 0;
  std::array<double, 6> rates_{};
};

}  // namespace

void validate_config(const EngineParams& params, const GillespieConfig& c) {
  std::vector<std::string> errors;
  if (!(c.t_burn >= 0.0)) errors.push_back("t_burn must be >= 0");
  if (!(c.t_total > c.t_burn)) errors.push_back("t_total must exceed t_burn");
  if (c.n_traj < 1) errors.push_back("n_traj must be at least 1");
  if (c.checkpoints < 4) errors.push_back("checkpoints must be at least 4");
  if (c.batches < 1) errors.push_back("batches must be at least 1");
  if (errors.empty() && resolved_segment_length(params, c) > c.t_total - c.t_burn) {
    errors.push_back("measurement window shorter than one segment");
  }
  if (!errors.empty()) {
    std::string msg = "invalid Gillespie config:";
    for (const auto& e : errors) msg += " " + e + ";";
    throw ParameterError(msg);
  }
}

std::vector<JumpRecord> simulate_jumps(const EngineParams& params, const GillespieConfig& config,
                                       std::size_t traj, std::size_t max_events) {
  const EngineParams p = validate(params).params;
  validate_config(p, config);
  Rng rng = make_rng(config.seed, traj);
  Walker w(p, resolved_cap(p, config));
  w.reset(rng);
  std::vector<JumpRecord> out;
  double t = 0.0;
  while (out.size() < max_events) {
    Event ev{};
    const double tau = w.next(rng, ev);
    if (t + tau > config.t_total) break;
    t += tau;
    w.apply(ev, t);
    out.push_back({t, w.a(), w.b(), ev, w.count()});
  }
  return out;
}

void write_jump_csv(std::ostream& out, const std::vector<JumpRecord>& jumps) {
  out << "t,n_h,n_c,event,count\n";
  char buf[160];
  for (const auto& j : jumps) {
    std::snprintf(buf, sizeof buf, "%.12g,%d,%d,%s,%lld\n", j.t, j.n_h, j.n_c, to_string(j.event),
                  j.count);
    out << buf;
  }
}

CountEstimate gillespie_simulate(const EngineParams& params, const GillespieConfig& config) {
  const EngineParams p = validate(params).params;
  validate_config(p, config);
  const auto n = static_cast<std::size_t>(config.n_traj);
  const double window = config.t_total - config.t_burn;
  const double seg_len = resolved_segment_length(p, config);
  const auto k_total = static_cast<std::size_t>(config.checkpoints);
  const auto segments = static_cast<std::size_t>(std::floor(window / seg_len + 1e-9));
  const auto batches = static_cast<std::size_t>(config.batches);
  const double batch_len = window / static_cast<double>(batches);

  std::vector<double> times(k_total);
  for (std::size_t k = 0; k < k_total; ++k) {
    times[k] = seg_len * static_cast<double>(k + 1) / static_cast<double>(k_total);
  }
  stats::SegmentedAccumulation seg_acc(n, segments, times);
  stats::SegmentedAccumulation batch_acc(n, batches, {batch_len});
  std::vector<double> rates(n);
  const int cap = resolved_cap(p, config);

  parallel_for(n, config.workers, [&](std::size_t traj) {
    Rng rng = make_rng(config.seed, traj);
    Walker w(p, cap);
    w.reset(rng);

    // Observation grid: segment checkpoints and batch ends, both relative to t_burn.
    std::size_t seg = 0;
    std::size_t k = 0;
    std::size_t batch = 0;
    long long seg_start = 0;
    long long batch_start = 0;
    bool measuring = false;
    auto seg_time = [&] { return config.t_burn + seg_len * static_cast<double>(seg) + times[k]; };
    auto batch_time = [&] { return config.t_burn + batch_len * static_cast<double>(batch + 1); };

    // Records every observation falling before time t with the count held
    // constant since the last jump.
    auto observe_until = [&](double t) {
      if (!measuring && config.t_burn < t) {
        measuring = true;
        seg_start = batch_start = w.count();
      }
      if (!measuring) return;
      while (seg < segments && seg_time() < t) {
        seg_acc.at(traj, seg, k) = static_cast<double>(w.count() - seg_start);
        if (++k == k_total) {
          k = 0;
          ++seg;
          seg_start = w.count();
        }
      }
      while (batch < batches && batch_time() < t) {
        batch_acc.at(traj, batch, 0) = static_cast<double>(w.count() - batch_start);
        batch_start = w.count();
        ++batch;
      }
    };

    double t = 0.0;
    for (;;) {
      Event ev{};
      const double tau = w.next(rng, ev);
      const double t_next = t + tau;
      if (t_next >= config.t_total) {
        observe_until(INFINITY);
        break;
      }
      observe_until(t_next);
      t = t_next;
      w.apply(ev, t);
    }
    // Batches tile the whole window, so their sum is the total net count.
    double total = 0.0;
    for (std::size_t b = 0; b < batches; ++b) total += batch_acc.at(traj, b, 0);
    rates[traj] = total / window;
  });

  CountEstimate out;
  const auto m = stats::mean_with_error(rates);
  out.mean_rate = {m.value, m.std_error, m.n_samples, config.seed, {}};
  out.mean_rate.diagnostics.effective_sample_size = static_cast<double>(n);
  if (config.n_traj >= kMinTrajectoriesForNoise) {
    auto wrap = [&](const stats::Estimate& e) {
      TrajectoryEstimate t{e.value, e.std_error, e.n_samples, config.seed, {}};
      t.diagnostics.effective_sample_size =
          e.std_error > 0.0 ? 2.0 * (e.value / e.std_error) * (e.value / e.std_error) : 0.0;
      return t;
    };
    out.noise = wrap(seg_acc.variance_slope());
    out.noise_batch_means = wrap(batch_acc.batch_means());
  }
  return out;
}

}  // namespace bhe::particle
