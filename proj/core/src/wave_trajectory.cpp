#include "bhe/wave_trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "bhe/closed_form.hpp"
#include "bhe/parallel.hpp"
#include "bhe/stats.hpp"

namespace bhe::wave {

namespace {

struct Layout {
  std::size_t burn_steps;
  std::size_t measure_steps;
  std::size_t checkpoint_steps;
  std::size_t checkpoints;
  std::size_t segment_steps;
  std::size_t segments;
  std::size_t batch_steps;
  std::size_t batches;
};

std::size_t steps_for(double t, double dt) {
  return static_cast<std::size_t>(std::floor(t / dt + 1e-9));
}

double resolved_segment_length(const WaveParams& p, const TrajectoryConfig& c) {
  if (c.segment_length > 0.0) return c.segment_length;
  return 20.0 / std::min(p.base.kappa_h, p.base.kappa_c);
}

Layout make_layout(const WaveParams& p, const TrajectoryConfig& c) {
  Layout l{};
  l.burn_steps = static_cast<std::size_t>(std::ceil(c.t_burn / c.dt - 1e-9));
  l.measure_steps = steps_for(c.t_total - c.t_burn, c.dt);
  l.checkpoints = static_cast<std::size_t>(c.checkpoints);
  l.checkpoint_steps =
      std::max<std::size_t>(1, steps_for(resolved_segment_length(p, c), c.dt) / l.checkpoints);
  l.segment_steps = l.checkpoint_steps * l.checkpoints;
  l.segments = l.measure_steps / l.segment_steps;
  l.batches = static_cast<std::size_t>(c.batches);
  l.batch_steps = l.measure_steps / l.batches;
  return l;
}

std::normal_distribution<double> unit_normal() { return std::normal_distribution<double>(0.0, 1.0); }

}  // namespace

void validate_config(const WaveParams& params, const TrajectoryConfig& c) {
  const auto& p = params.base;
  std::vector<std::string> errors;
  if (!(c.dt > 0.0)) errors.push_back("dt must be positive");
  double limit = std::min(1.0 / p.kappa_h, 1.0 / p.kappa_c);
  if (p.g > 0.0) limit = std::min(limit, 1.0 / p.g);
  if (c.dt > 0.01 * limit * (1.0 + 1e-12)) {
    errors.push_back("dt must not exceed 0.01 min(1/kappa_h, 1/kappa_c, 1/g)");
  }
  const double burn_min = 10.0 / std::min(p.kappa_h, p.kappa_c);
  if (c.t_burn < burn_min * (1.0 - 1e-12)) errors.push_back("t_burn must be at least 10/min(kappa)");
  if (!(c.t_total > c.t_burn)) errors.push_back("t_total must exceed t_burn");
  if (c.n_traj < 1) errors.push_back("n_traj must be at least 1");
  if (c.checkpoints < 4) errors.push_back("checkpoints must be at least 4");
  if (c.batches < 1) errors.push_back("batches must be at least 1");
  if (params.offset_c < 0.0) errors.push_back("offset_c must be non-negative");
  if (errors.empty()) {
    const Layout l = make_layout(params, c);
    if (l.segments < 1) errors.push_back("measurement window shorter than one segment");
    if (l.batch_steps < 1) errors.push_back("measurement window shorter than the batch count");
  }
  if (!errors.empty()) {
    std::string msg = "invalid trajectory config:";
    for (const auto& e : errors) msg += " " + e + ";";
    throw ParameterError(msg);
  }
}

Integrator::Integrator(const WaveParams& params, double dt)
    : g_(params.base.g),
      decay_h_(0.5 * params.base.kappa_h),
      decay_c_(0.5 * params.base.kappa_c),
      noise_h_(std::sqrt(params.base.kappa_h * params.phi_h() * dt / 2.0)),
      noise_c_(std::sqrt(params.base.kappa_c * params.phi_c() * dt / 2.0)),
      gamma_i_(closed_form::transfer_rate(params.base)),
      dt_(dt) {}

void Integrator::reset_stationary(Rng& rng) {
  // Uncoupled stationary state: each quadrature has variance Phi / 2.
  auto n = unit_normal();
  const double sh = noise_h_ / std::sqrt(decay_h_ * 2.0 * dt_);
  const double sc = noise_c_ / std::sqrt(decay_c_ * 2.0 * dt_);
  const double hr = n(rng);
  const double hi = n(rng);
  const double cr = n(rng);
  const double ci = n(rng);
  a_h_ = {sh * hr, sh * hi};
  a_c_ = {sc * cr, sc * ci};
}

void Integrator::set_state(std::complex<double> a_h, std::complex<double> a_c) {
  a_h_ = a_h;
  a_c_ = a_c;
}

void Integrator::step_with(const double (&n)[4]) {
  const double hr = a_h_.real();
  const double hi = a_h_.imag();
  const double cr = a_c_.real();
  const double ci = a_c_.imag();
  // -i g A_c = g Im(A_c) - i g Re(A_c)
  a_h_ = {hr + (-decay_h_ * hr + g_ * ci) * dt_ - noise_h_ * n[0],
          hi + (-decay_h_ * hi - g_ * cr) * dt_ - noise_h_ * n[1]};
  a_c_ = {cr + (-decay_c_ * cr + g_ * hi) * dt_ - noise_c_ * n[2],
          ci + (-decay_c_ * ci - g_ * hr) * dt_ - noise_c_ * n[3]};
}

void Integrator::step(Rng& rng) {
  auto dist = unit_normal();
  const double n[4] = {dist(rng), dist(rng), dist(rng), dist(rng)};
  step_with(n);
}

double Integrator::current() const {
  return -2.0 * g_ * (a_h_.real() * a_c_.imag() - a_h_.imag() * a_c_.real());
}

double Integrator::population_current() const {
  return gamma_i_ * (std::norm(a_h_) - std::norm(a_c_));
}

void Integrator::check_finite(double t) const {
  const double s = std::norm(a_h_) + std::norm(a_c_);
  if (!std::isfinite(s) || s > 1e200) {
    std::ostringstream os;
    os << "wave amplitudes overflowed at t = " << t << " (|A|^2 = " << s << ", dt = " << dt_
       << ")";
    throw NumericalError(os.str());
  }
}

std::vector<TracePoint> simulate_wave(const WaveParams& params, const TrajectoryConfig& config,
                                      std::size_t traj, std::size_t stride) {
  validate_config(params, config);
  if (stride == 0) stride = 1;
  Rng rng = make_rng(config.seed, traj);
  Integrator in(params, config.dt);
  in.reset_stationary(rng);
  const std::size_t n = steps_for(config.t_total, config.dt);
  std::vector<TracePoint> out;
  out.reserve(n / stride + 1);
  for (std::size_t s = 0; s <= n; ++s) {
    const double t = static_cast<double>(s) * config.dt;
    if (s % stride == 0) out.push_back({t, in.a_h(), in.a_c(), in.current()});
    if (s % 1024 == 0) in.check_finite(t);
    if (s < n) in.step(rng);
  }
  in.check_finite(static_cast<double>(n) * config.dt);
  return out;
}

void write_trace_csv(std::ostream& out, const std::vector<TracePoint>& trace) {
  out << "t,re_a_h,im_a_h,re_a_c,im_a_c,current\n";
  char buf[256];
  for (const auto& p : trace) {
    std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g,%.12g,%.12g,%.12g\n", p.t, p.a_h.real(),
                  p.a_h.imag(), p.a_c.real(), p.a_c.imag(), p.current);
    out << buf;
  }
}

namespace {

// Running per-trajectory tallies for one integrator.
struct Tally {
  double sum_p = 0.0;
  double sum_p2 = 0.0;
  double sum_pop = 0.0;
  double seg_work = 0.0;
  double batch_work = 0.0;

  void add(double p, double pop, double dt) {
    sum_p += p;
    sum_p2 += p * p;
    sum_pop += pop;
    seg_work += p * dt;
    batch_work += p * dt;
  }
};

struct EnsembleData {
  std::vector<double> mean_p;
  std::vector<double> mean_p2;
  std::vector<double> mean_pop;
  stats::SegmentedAccumulation segments;
  stats::SegmentedAccumulation batches;

  EnsembleData(std::size_t n, const Layout& l, double dt)
      : mean_p(n),
        mean_p2(n),
        mean_pop(n),
        segments(n, l.segments, checkpoint_times(l, dt)),
        batches(n, l.batches, {static_cast<double>(l.batch_steps) * dt}) {}

  static std::vector<double> checkpoint_times(const Layout& l, double dt) {
    std::vector<double> t(l.checkpoints);
    for (std::size_t k = 0; k < l.checkpoints; ++k) {
      t[k] = static_cast<double>((k + 1) * l.checkpoint_steps) * dt;
    }
    return t;
  }
};

// Advances one coarse step. With `fine` present, the fine integrator takes
// two half steps whose Brownian increments sum to the coarse increment.
void advance(Integrator& coarse, Integrator* fine, Rng& rng, Tally& tc, Tally* tf, double dt,
             bool record) {
  auto dist = unit_normal();
  if (!fine) {
    const double n[4] = {dist(rng), dist(rng), dist(rng), dist(rng)};
    if (record) tc.add(coarse.current(), coarse.population_current(), dt);
    coarse.step_with(n);
    return;
  }
  const double a[4] = {dist(rng), dist(rng), dist(rng), dist(rng)};
  const double b[4] = {dist(rng), dist(rng), dist(rng), dist(rng)};
  const double r = 1.0 / std::sqrt(2.0);
  const double c[4] = {(a[0] + b[0]) * r, (a[1] + b[1]) * r, (a[2] + b[2]) * r,
                       (a[3] + b[3]) * r};
  if (record) {
    tc.add(coarse.current(), coarse.population_current(), dt);
    tf->add(fine->current(), fine->population_current(), 0.5 * dt);
  }
  coarse.step_with(c);
  fine->step_with(a);
  if (record) tf->add(fine->current(), fine->population_current(), 0.5 * dt);
  fine->step_with(b);
}

void run_trajectory(const WaveParams& params, const TrajectoryConfig& config, const Layout& l,
                    std::size_t traj, EnsembleData& dc, EnsembleData* df) {
  Rng rng = make_rng(config.seed, traj);
  Integrator coarse(params, config.dt);
  coarse.reset_stationary(rng);
  std::optional<Integrator> fine;
  if (df) {
    fine.emplace(params, 0.5 * config.dt);
    fine->set_state(coarse.a_h(), coarse.a_c());
  }
  Integrator* fp = fine ? &*fine : nullptr;
  Tally tc;
  Tally tf;
  Tally* tfp = df ? &tf : nullptr;
  const double dt = config.dt;

  for (std::size_t s = 0; s < l.burn_steps; ++s) {
    if (s % 1024 == 0) coarse.check_finite(static_cast<double>(s) * dt);
    advance(coarse, fp, rng, tc, tfp, dt, false);
  }
  const double delta = params.base.delta();
  for (std::size_t s = 0; s < l.measure_steps; ++s) {
    if (s % 1024 == 0) {
      const double t = static_cast<double>(l.burn_steps + s) * dt;
      coarse.check_finite(t);
      if (fp) fp->check_finite(t);
    }
    advance(coarse, fp, rng, tc, tfp, dt, true);
    const std::size_t done = s + 1;
    auto checkpoint = [&](Tally& t, EnsembleData& d) {
      if (done % l.checkpoint_steps == 0) {
        const std::size_t seg = (done - 1) / l.segment_steps;
        if (seg < l.segments) {
          const std::size_t k = ((done - 1) % l.segment_steps) / l.checkpoint_steps;
          d.segments.at(traj, seg, k) = delta * t.seg_work;
          if (k + 1 == l.checkpoints) t.seg_work = 0.0;
        }
      }
      if (done % l.batch_steps == 0) {
        const std::size_t b = done / l.batch_steps - 1;
        if (b < l.batches) d.batches.at(traj, b, 0) = delta * t.batch_work;
        t.batch_work = 0.0;
      }
    };
    checkpoint(tc, dc);
    if (df) checkpoint(tf, *df);
  }
  auto finish = [&](const Tally& t, EnsembleData& d, double weight) {
    const double n = static_cast<double>(l.measure_steps) * weight;
    d.mean_p[traj] = delta * t.sum_p / n;
    d.mean_p2[traj] = delta * delta * t.sum_p2 / n;
    d.mean_pop[traj] = delta * t.sum_pop / n;
  };
  finish(tc, dc, 1.0);
  if (df) finish(tf, *df, 2.0);
}

TrajectoryEstimate to_estimate(const stats::Estimate& e, std::uint64_t seed) {
  TrajectoryEstimate t;
  t.mean = e.value;
  t.std_error = e.std_error;
  t.n_samples = e.n_samples;
  t.seed = seed;
  return t;
}

PowerEstimate summarize(const EnsembleData& d, const TrajectoryConfig& config) {
  PowerEstimate out;
  out.mean_power = to_estimate(stats::mean_with_error(d.mean_p), config.seed);
  out.population_mean_power = to_estimate(stats::mean_with_error(d.mean_pop), config.seed);

  // Effective sample size of the mean: instantaneous variance over SE^2.
  const auto p2 = stats::mean_with_error(d.mean_p2);
  const double inst_var = p2.value - out.mean_power.mean * out.mean_power.mean;
  auto ess = [](double var, double se) {
    return se > 0.0 ? var / (se * se) : 0.0;
  };
  out.mean_power.diagnostics.effective_sample_size = ess(inst_var, out.mean_power.std_error);
  out.population_mean_power.diagnostics.effective_sample_size =
      static_cast<double>(d.mean_pop.size());

  if (config.n_traj >= kMinTrajectoriesForNoise) {
    auto noise_estimate = [&](const stats::Estimate& e) {
      TrajectoryEstimate t = to_estimate(e, config.seed);
      // A variance estimated from n Gaussian samples has relative error sqrt(2/n).
      t.diagnostics.effective_sample_size =
          t.std_error > 0.0 ? 2.0 * (t.mean / t.std_error) * (t.mean / t.std_error) : 0.0;
      return t;
    };
    out.noise = noise_estimate(d.segments.variance_slope());
    out.noise_batch_means = noise_estimate(d.batches.batch_means());
  }
  return out;
}

double z_score(double a, double sa, double b, double sb) {
  const double s = std::sqrt(sa * sa + sb * sb);
  if (s == 0.0) return a == b ? 0.0 : std::copysign(INFINITY, a - b);
  return (a - b) / s;
}

}  // namespace

PowerEstimate estimate_power_stats(const WaveParams& params, const TrajectoryConfig& config) {
  validate_config(params, config);
  const Layout l = make_layout(params, config);
  const auto n = static_cast<std::size_t>(config.n_traj);
  EnsembleData d(n, l, config.dt);
  parallel_for(n, config.workers, [&](std::size_t i) { run_trajectory(params, config, l, i, d, nullptr); });
  return summarize(d, config);
}

StepHalvingReport step_halving_check(const WaveParams& params, const TrajectoryConfig& config) {
  validate_config(params, config);
  const Layout l = make_layout(params, config);
  const auto n = static_cast<std::size_t>(config.n_traj);
  EnsembleData dc(n, l, config.dt);
  EnsembleData df(n, l, config.dt);
  parallel_for(n, config.workers, [&](std::size_t i) { run_trajectory(params, config, l, i, dc, &df); });

  StepHalvingReport r;
  r.coarse = summarize(dc, config);
  r.fine = summarize(df, config);
  r.mean_z = z_score(r.coarse.mean_power.mean, r.coarse.mean_power.std_error,
                     r.fine.mean_power.mean, r.fine.mean_power.std_error);
  r.coarse.mean_power.diagnostics.step_halving_drift = r.mean_z;
  r.passed = std::abs(r.mean_z) <= 2.0;
  if (r.coarse.noise && r.fine.noise) {
    r.noise_z = z_score(r.coarse.noise->mean, r.coarse.noise->std_error, r.fine.noise->mean,
                        r.fine.noise->std_error);
    r.coarse.noise->diagnostics.step_halving_drift = r.noise_z;
    r.passed = r.passed && std::abs(r.noise_z) <= 2.0;
  }
  return r;
}

}  // namespace bhe::wave
