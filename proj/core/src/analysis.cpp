#include "bhe/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "bhe/closed_form.hpp"
#include "bhe/moment_engine.hpp"
#include "bhe/parallel.hpp"
#include "bhe/particle_engine.hpp"

namespace bhe::analysis {

std::optional<double> fano(const PowerStats& stats) { return stats.fano; }

FanoGaps fano_gaps(const EngineParams& params) {
  const EngineParams p = validate(params).params;
  const double nh = p.nbar_h();
  const double nc = p.nbar_c();
  FanoGaps gaps;
  if (nh == nc) return gaps;
  gaps.quantum_wave = (nh + nc) / (nh - nc);
  const double e = closed_form::equilibrium_coefficient(p);
  if (e > 0.0) gaps.quantum_particle = closed_form::particle_shot_excess(p) * (nh - nc) / e;
  return gaps;
}

double affinity(const EngineParams& params) {
  const EngineParams p = validate(params).params;
  return inverse_temperature_ratio(p.nbar_c()) - inverse_temperature_ratio(p.nbar_h());
}

double entropy_rate(const EngineParams& params, double mean_current) {
  const double a = affinity(params);
  if (mean_current == 0.0) return 0.0;
  return mean_current * a;
}

double tur_bound(const EngineParams& params) { return 2.0 / affinity(params); }

double modified_tur_bound(const EngineParams& params) {
  const EngineParams p = validate(params).params;
  return 2.0 / (1.0 / p.nbar_c() - 1.0 / p.nbar_h());
}

TurReport tur_check(const EngineParams& params, const PowerStats& stats, Model model) {
  TurReport r;
  r.fano = stats.fano;
  r.standard_bound = tur_bound(params);
  r.modified_bound = modified_tur_bound(params);
  if (r.fano) {
    r.satisfies_standard = *r.fano >= r.standard_bound;
    r.satisfies_modified = *r.fano >= r.modified_bound;
  }
  r.satisfied = model == Model::wave ? r.satisfies_modified : r.satisfies_standard;
  return r;
}

double wave_quantum_noise_difference(const EngineParams& params, double offset_c) {
  const EngineParams p = validate(params).params;
  const double e = closed_form::equilibrium_coefficient(p);
  return e * ((2.0 * offset_c - 1.0) * (p.nbar_h() + p.nbar_c()) + 2.0 * offset_c * offset_c);
}

double log_argmax(const std::function<double(double)>& f, double lo, double hi, int scan_points,
                  double tolerance) {
  if (!(lo > 0.0 && hi > lo) || scan_points < 3) {
    throw ParameterError("log_argmax needs 0 < lo < hi and at least 3 scan points");
  }
  const double a = std::log(lo);
  const double b = std::log(hi);
  const double step = (b - a) / (scan_points - 1);
  int best = 0;
  double best_val = -INFINITY;
  for (int i = 0; i < scan_points; ++i) {
    const double v = f(std::exp(a + step * i));
    if (v > best_val) {
      best_val = v;
      best = i;
    }
  }
  double l = a + step * std::max(0, best - 1);
  double h = a + step * std::min(scan_points - 1, best + 1);
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = h - inv_phi * (h - l);
  double x2 = l + inv_phi * (h - l);
  double f1 = f(std::exp(x1));
  double f2 = f(std::exp(x2));
  // Stop once the bracket in x (not ln x) is below tolerance.
  while (std::exp(h) - std::exp(l) > tolerance) {
    if (f1 < f2) {
      l = x1;
      x1 = x2;
      f1 = f2;
      x2 = l + inv_phi * (h - l);
      f2 = f(std::exp(x2));
    } else {
      h = x2;
      x2 = x1;
      f2 = f1;
      x1 = h - inv_phi * (h - l);
      f1 = f(std::exp(x1));
    }
  }
  return std::exp(0.5 * (l + h));
}

MismatchMaxima find_mismatch_maxima(const EngineParams& params) {
  const EngineParams p = validate(params).params;
  if (p.kappa_h != p.kappa_c) throw ParameterError("mismatch maximisers need kappa_h == kappa_c");
  const double dn = std::abs(p.nbar_h() - p.nbar_c());
  if (dn == 0.0) throw ParameterError("mismatch maximisers are undefined at equilibrium");
  auto at = [&p](double x) {
    EngineParams q = p;
    q.g = x * p.kappa_h;
    return q;
  };
  MismatchMaxima m;
  m.noise_mismatch = log_argmax(
      [&](double x) { return closed_form::particle_shot_excess(at(x)) * dn * dn; }, 1e-2, 1e2);
  m.fano_gap = log_argmax(
      [&](double x) {
        const EngineParams q = at(x);
        return closed_form::particle_shot_excess(q) * dn / closed_form::equilibrium_coefficient(q);
      },
      1e-2, 1e2);
  return m;
}

std::string_view to_string(Route r) {
  switch (r) {
    case Route::closed_form: return "closed_form";
    case Route::moment: return "moment";
    case Route::fcs: return "fcs";
    case Route::monte_carlo: return "monte_carlo";
  }
  return "unknown";
}

std::optional<Route> parse_route(std::string_view s) {
  for (Route r : {Route::closed_form, Route::moment, Route::fcs, Route::monte_carlo}) {
    if (s == to_string(r)) return r;
  }
  return std::nullopt;
}

void check_route(Model model, Route route) {
  const bool ok = route == Route::closed_form || route == Route::moment ||
                  (route == Route::fcs && model == Model::particle) ||
                  (route == Route::monte_carlo && model != Model::quantum);
  if (!ok) {
    throw ParameterError("route " + std::string(to_string(route)) + " is not available for the " +
                         std::string(to_string(model)) + " model");
  }
}

std::string_view to_string(Axis a) { return a == Axis::coupling ? "g_over_kappa" : "nbar_h"; }

std::vector<double> log_grid(double lo, double hi, std::size_t n) {
  std::vector<double> out;
  if (n == 0) return out;
  if (n == 1) return {lo};
  if (!(lo > 0.0 && hi > lo)) throw ParameterError("log grid needs 0 < lo < hi");
  out.reserve(n);
  const double a = std::log(lo);
  const double step = (std::log(hi) - a) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) out.push_back(std::exp(a + step * static_cast<double>(i)));
  out.front() = lo;
  out.back() = hi;
  return out;
}

EngineParams sweep_point(const SweepSpec& spec, double x) {
  EngineParams p = validate(spec.base).params;
  if (spec.axis == Axis::coupling) {
    p.g = x * p.kappa_h;
  } else {
    p.occupation = Occupations{x, p.nbar_c()};
  }
  return p;
}

PowerStats evaluate_route(const EngineParams& params, Model model, Route route,
                          const SweepSpec& spec) {
  check_route(model, route);
  const WaveParams wp{params, spec.wave_offset};
  const double d = params.delta();
  switch (route) {
    case Route::closed_form:
      if (model == Model::quantum) return closed_form::quantum_stats(params);
      if (model == Model::wave) return closed_form::wave_stats(wp);
      return closed_form::particle_stats(params);
    case Route::moment:
      if (model == Model::quantum) return moments::evaluate(params, moments::ModelSpec::quantum()).stats;
      if (model == Model::wave) {
        return moments::evaluate(params, moments::ModelSpec::wave(spec.wave_offset)).stats;
      }
      return particle::moment_stats(params);
    case Route::fcs:
      return particle::drazin_stats(params);
    case Route::monte_carlo:
      if (model == Model::wave) {
        // The step limit moves with the sweep coordinate; clamp per point.
        wave::TrajectoryConfig c = spec.wave_mc;
        double limit = std::min(1.0 / params.kappa_h, 1.0 / params.kappa_c);
        if (params.g > 0.0) limit = std::min(limit, 1.0 / params.g);
        c.dt = std::min(c.dt, 0.01 * limit);
        const auto e = wave::estimate_power_stats(wp, c);
        return make_power_stats(e.mean_power.mean, e.noise ? e.noise->mean : NAN, d);
      } else {
        const auto e = particle::gillespie_simulate(params, spec.particle_mc);
        return make_power_stats(d * e.mean_rate.mean, e.noise ? d * d * e.noise->mean : NAN, d);
      }
  }
  throw ParameterError("unknown route");
}

SweepTable run_sweep(const SweepSpec& spec) {
  for (const auto& mr : spec.models) check_route(mr.model, mr.route);
  for (std::size_t i = 1; i < spec.grid.size(); ++i) {
    if (!(spec.grid[i] > spec.grid[i - 1])) throw ParameterError("sweep grid must be strictly increasing");
  }
  SweepTable table;
  table.x_name = std::string(to_string(spec.axis));
  table.models = spec.models;
  table.rows.resize(spec.grid.size());
  // Monte Carlo routes parallelise internally; keep sweep points serial then.
  const bool has_mc = std::any_of(spec.models.begin(), spec.models.end(),
                                  [](const ModelRoute& m) { return m.route == Route::monte_carlo; });
  parallel_for(spec.grid.size(), has_mc ? 1u : spec.workers, [&](std::size_t i) {
    SweepRow& row = table.rows[i];
    row.x = spec.grid[i];
    row.cells.resize(spec.models.size());
    try {
      const EngineParams p = sweep_point(spec, row.x);
      row.tur_bound = tur_bound(p);
      row.tur_bound_wave = modified_tur_bound(p);
      for (std::size_t m = 0; m < spec.models.size(); ++m) {
        row.cells[m].stats = evaluate_route(p, spec.models[m].model, spec.models[m].route, spec);
      }
    } catch (const std::exception& e) {
      row.error = e.what();
      for (auto& c : row.cells) c.stats.reset();
    }
  });
  return table;
}

}  // namespace bhe::analysis
