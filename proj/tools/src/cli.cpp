#include "bhe_cli/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "bhe/analysis.hpp"
#include "bhe/closed_form.hpp"
#include "bhe/gillespie.hpp"
#include "bhe/verify.hpp"
#include "bhe/wave_trajectory.hpp"

namespace bhe::cli {
namespace {

using json = nlohmann::json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Shortest text that reads back to the same double.
std::string exact(double x) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

json number_or_null(std::optional<double> x) {
  if (!x || !std::isfinite(*x)) return nullptr;
  return *x;
}

// Options of one subcommand, settable from the command line or a config
// file. Command-line values win.
class Bindings {
 public:
  explicit Bindings(CLI::App* app) : app_(app) {}

  template <typename T>
  CLI::Option* add(const std::string& name, T& target, const std::string& help) {
    setters_[name] = [&target, name](const std::string& v) {
      if (!CLI::detail::lexical_conversion<T, T>({v}, target)) {
        throw UsageError("config: bad value '" + v + "' for " + name);
      }
    };
    return app_->add_option("--" + name, target, help)->capture_default_str();
  }

  CLI::Option* flag(const std::string& name, bool& target, const std::string& help) {
    setters_[name] = [&target, name](const std::string& v) {
      if (v == "true" || v == "1") target = true;
      else if (v == "false" || v == "0") target = false;
      else throw UsageError("config: bad value '" + v + "' for " + name);
    };
    return app_->add_flag("--" + name, target, help);
  }

  void apply_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read config file " + path);
    std::map<std::string, std::string> entries;
    try {
      entries = parse_config(in);
    } catch (const std::exception& e) {
      throw UsageError(path + ": " + e.what());
    }
    for (const auto& [k, v] : entries) {
      auto it = setters_.find(k);
      if (it == setters_.end()) throw UsageError(path + ": unknown key '" + k + "'");
      if (app_->get_option("--" + k)->count() > 0) continue;
      it->second(v);
      from_config_.insert(k);
    }
  }

  bool given(const std::string& name) const {
    return from_config_.count(name) > 0 || app_->get_option("--" + name)->count() > 0;
  }

 private:
  CLI::App* app_;
  std::map<std::string, std::function<void(const std::string&)>> setters_;
  std::set<std::string> from_config_;
};

struct ParamFlags {
  double g = 1.0;
  double kappa = 1.0;
  double kappa_h = 1.0;
  double kappa_c = 1.0;
  double nh = 2.0;
  double nc = 0.1;
  double delta = 1.0;
  double omega_h = 2.0;
  double omega_c = 1.0;
  double th = 1.0;
  double tc = 1.0;
  double offset_c = 0.0;

  void add(Bindings& b) {
    b.add("g", g, "inter-mode coupling");
    b.add("kappa", kappa, "bath coupling for both modes");
    b.add("kappa-h", kappa_h, "hot bath coupling (overrides --kappa)");
    b.add("kappa-c", kappa_c, "cold bath coupling (overrides --kappa)");
    b.add("nh", nh, "hot bath occupation");
    b.add("nc", nc, "cold bath occupation");
    b.add("delta", delta, "Omega_h - Omega_c");
    b.add("omega-h", omega_h, "hot mode frequency (with --th/--tc)");
    b.add("omega-c", omega_c, "cold mode frequency (with --th/--tc)");
    b.add("th", th, "hot bath temperature");
    b.add("tc", tc, "cold bath temperature");
    b.add("offset-c", offset_c, "wave-model noise offset C");
  }

  EngineParams resolve(const Bindings& b) const {
    const double kh = b.given("kappa-h") ? kappa_h : kappa;
    const double kc = b.given("kappa-c") ? kappa_c : kappa;
    const bool thermal = b.given("th") || b.given("tc") || b.given("omega-h") || b.given("omega-c");
    const bool direct = b.given("nh") || b.given("nc") || b.given("delta");
    if (thermal && direct) {
      throw UsageError("give either --nh/--nc/--delta or --omega-h/--omega-c/--th/--tc, not both");
    }
    if (thermal && !(b.given("th") && b.given("tc"))) {
      throw UsageError("--th and --tc are both required for thermal parameters");
    }
    const EngineParams p = thermal
                               ? EngineParams::from_temperatures(g, kh, kc, omega_h, omega_c, th, tc)
                               : EngineParams::from_occupations(g, kh, kc, delta, nh, nc);
    try {
      return validate(p).params;
    } catch (const ParameterError& e) {
      throw UsageError(e.what());
    }
  }
};

// Canonical (Delta, nbar) form of the resolved parameters.
std::vector<std::pair<std::string, std::string>> echo_params(const EngineParams& p, double offset_c) {
  return {{"g", exact(p.g)},          {"kappa-h", exact(p.kappa_h)},
          {"kappa-c", exact(p.kappa_c)}, {"delta", exact(p.delta())},
          {"nh", exact(p.nbar_h())},    {"nc", exact(p.nbar_c())},
          {"offset-c", exact(offset_c)}};
}

using Echo = std::vector<std::pair<std::string, std::string>>;

void write_echo(std::ostream& os, const std::string& command, const Echo& echo) {
  os << "# bhe " << command << "\n[config]\n";
  for (const auto& [k, v] : echo) os << k << " = " << v << "\n";
}

json echo_json(const Echo& echo) {
  json j = json::object();
  for (const auto& [k, v] : echo) j[k] = v;
  return j;
}

std::filesystem::path output_path(const std::string& output) {
  std::filesystem::path p(output);
  if (p.is_relative()) {
    if (const char* dir = std::getenv("BHE_OUTPUT_DIR"); dir && *dir) p = std::filesystem::path(dir) / p;
  }
  return p;
}

// Writes to --output when given, otherwise to `out`.
class Sink {
 public:
  Sink(const std::string& output, std::ostream& out) : out_(out) {
    if (output.empty()) return;
    path_ = output_path(output);
    file_.open(path_, std::ios::binary);
    if (!file_) throw IoError("cannot write " + path_.string());
  }
  std::ostream& stream() { return file_.is_open() ? file_ : out_; }
  bool to_file() const { return file_.is_open(); }
  const std::filesystem::path& path() const { return path_; }
  void close() {
    if (!file_.is_open()) return;
    file_.close();
    if (!file_) throw IoError("error writing " + path_.string());
  }

 private:
  std::ostream& out_;
  std::filesystem::path path_;
  std::ofstream file_;
};

std::optional<Model> parse_model(const std::string& s) {
  if (s == "quantum" || s == "q") return Model::quantum;
  if (s == "wave" || s == "w") return Model::wave;
  if (s == "particle" || s == "p") return Model::particle;
  return std::nullopt;
}

bool route_supported(Model m, analysis::Route r) {
  try {
    analysis::check_route(m, r);
    return true;
  } catch (const ParameterError&) {
    return false;
  }
}

// "route" applies to every model that supports it; "model:route" is strict.
std::vector<analysis::ModelRoute> parse_routes(const std::string& text) {
  std::vector<analysis::ModelRoute> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto colon = item.find(':');
    const std::string route_name = colon == std::string::npos ? item : item.substr(colon + 1);
    const auto route = analysis::parse_route(route_name);
    if (!route) throw UsageError("unknown route '" + route_name + "'");
    if (colon != std::string::npos) {
      const auto model = parse_model(item.substr(0, colon));
      if (!model) throw UsageError("unknown model '" + item.substr(0, colon) + "'");
      if (!route_supported(*model, *route)) {
        throw UsageError("route " + route_name + " is not available for the " +
                         std::string(to_string(*model)) + " model");
      }
      out.push_back({*model, *route});
      continue;
    }
    bool any = false;
    for (Model m : {Model::quantum, Model::wave, Model::particle}) {
      if (route_supported(m, *route)) {
        out.push_back({m, *route});
        any = true;
      }
    }
    if (!any) throw UsageError("route " + route_name + " is not available for any model");
  }
  return out;
}

void check_format(const std::string& format, std::initializer_list<const char*> allowed) {
  for (const char* a : allowed)
    if (format == a) return;
  throw UsageError("unsupported --format " + format);
}

// ---------------------------------------------------------------- point

struct PointCmd {
  ParamFlags params;
  std::string routes = "closed_form,moment";
  std::string format = "text";
  std::string output;
  std::string config;
  std::uint64_t seed = 1;
  unsigned workers = 0;
  std::unique_ptr<Bindings> bind;

  void add(CLI::App& app) {
    auto* sub = app.add_subcommand("point", "statistics of every model at one parameter point");
    bind = std::make_unique<Bindings>(sub);
    params.add(*bind);
    bind->add("routes", routes, "comma list of route or model:route");
    bind->add("format", format, "text or json");
    bind->add("output", output, "output file");
    bind->add("seed", seed, "Monte Carlo seed");
    bind->add("workers", workers, "worker threads (0: all cores)");
    sub->add_option("--config", config, "key = value file");
  }

  int run(std::ostream& out) {
    if (!config.empty()) bind->apply_config(config);
    check_format(format, {"text", "json"});
    const EngineParams p = params.resolve(*bind);
    const auto items = parse_routes(routes);
    analysis::SweepSpec spec;
    spec.base = p;
    spec.wave_offset = params.offset_c;
    spec.workers = workers;
    spec.wave_mc.seed = seed;
    spec.wave_mc.workers = workers;
    spec.particle_mc.seed = seed;
    spec.particle_mc.workers = workers;

    struct Row {
      analysis::ModelRoute mr;
      PowerStats stats;
    };
    std::vector<Row> rows;
    for (Model m : {Model::quantum, Model::wave, Model::particle}) {
      for (const auto& it : items) {
        if (it.model != m) continue;
        bool dup = false;
        for (const auto& r : rows) dup = dup || (r.mr.model == m && r.mr.route == it.route);
        if (!dup) rows.push_back({it, analysis::evaluate_route(p, m, it.route, spec)});
      }
    }
    struct Dev {
      Model model;
      analysis::Route route;
      analysis::Route reference;
      double power;
      double noise;
    };
    // Absolute difference when both values are at round-off level.
    auto rel = [](double a, double b) {
      const double s = std::max(std::abs(a), std::abs(b));
      return s < 1e-12 ? std::abs(a - b) : std::abs(a - b) / s;
    };
    std::vector<Dev> devs;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      for (std::size_t j = 0; j < i; ++j) {
        if (rows[i].mr.model != rows[j].mr.model) continue;
        devs.push_back({rows[i].mr.model, rows[i].mr.route, rows[j].mr.route,
                        rel(rows[i].stats.mean_power, rows[j].stats.mean_power),
                        rel(rows[i].stats.zero_freq_noise, rows[j].stats.zero_freq_noise)});
      }
    }
    std::optional<double> tur;
    std::optional<double> tur_wave;
    if (p.nbar_h() != p.nbar_c()) {
      tur = analysis::tur_bound(p);
      tur_wave = analysis::modified_tur_bound(p);
    }

    Echo echo = echo_params(p, params.offset_c);
    echo.push_back({"routes", routes});
    echo.push_back({"seed", std::to_string(seed)});

    Sink sink(output, out);
    std::ostream& os = sink.stream();
    if (format == "json") {
      json j;
      j["config"] = echo_json(echo);
      j["results"] = json::array();
      for (const auto& r : rows) {
        j["results"].push_back({{"model", to_string(r.mr.model)},
                                {"route", to_string(r.mr.route)},
                                {"power", r.stats.mean_power},
                                {"noise", r.stats.zero_freq_noise},
                                {"fano", number_or_null(r.stats.fano)}});
      }
      j["deviations"] = json::array();
      for (const auto& d : devs) {
        j["deviations"].push_back({{"model", to_string(d.model)},
                                   {"route", to_string(d.route)},
                                   {"reference", to_string(d.reference)},
                                   {"power", d.power},
                                   {"noise", d.noise}});
      }
      j["tur_bound"] = number_or_null(tur);
      j["tur_bound_wave"] = number_or_null(tur_wave);
      os << j.dump(2) << "\n";
    } else {
      write_echo(os, "point", echo);
      os << "\n";
      char line[256];
      std::snprintf(line, sizeof line, "%-9s %-12s %-20s %-20s %s\n", "model", "route", "power",
                    "noise", "fano");
      os << line;
      for (const auto& r : rows) {
        const std::string fano = r.stats.fano ? format_number(*r.stats.fano) : "undefined";
        std::snprintf(line, sizeof line, "%-9s %-12s %-20s %-20s %s\n",
                      std::string(to_string(r.mr.model)).c_str(),
                      std::string(to_string(r.mr.route)).c_str(),
                      format_number(r.stats.mean_power).c_str(),
                      format_number(r.stats.zero_freq_noise).c_str(), fano.c_str());
        os << line;
      }
      if (!devs.empty()) os << "\nrelative deviations\n";
      for (const auto& d : devs) {
        os << to_string(d.model) << " " << to_string(d.route) << " vs " << to_string(d.reference)
           << ": power " << format_number(d.power) << ", noise " << format_number(d.noise) << "\n";
      }
      os << "\ntur_bound = " << (tur ? format_number(*tur) : "undefined") << "\n";
      os << "tur_bound_wave = " << (tur_wave ? format_number(*tur_wave) : "undefined") << "\n";
    }
    sink.close();
    return ok;
  }
};

// ---------------------------------------------------------------- sweep

struct SweepCmd {
  ParamFlags params;
  std::string axis = "coupling";
  double from = 1e-2;
  double to = 1e2;
  std::size_t points = 50;
  std::string routes = "closed_form";
  std::string format = "csv";
  std::string output;
  std::string config;
  std::uint64_t seed = 1;
  unsigned workers = 0;
  std::unique_ptr<Bindings> bind;

  void add(CLI::App& app) {
    auto* sub = app.add_subcommand("sweep", "tabulate all three models along a log grid");
    bind = std::make_unique<Bindings>(sub);
    params.add(*bind);
    bind->add("axis", axis, "coupling (g / kappa_h) or nbar_h");
    bind->add("from", from, "first grid value");
    bind->add("to", to, "last grid value");
    bind->add("points", points, "number of log-spaced points");
    bind->add("routes", routes, "one route per model: route or model:route");
    bind->add("format", format, "csv or json");
    bind->add("output", output, "output file");
    bind->add("seed", seed, "Monte Carlo seed");
    bind->add("workers", workers, "worker threads (0: all cores)");
    sub->add_option("--config", config, "key = value file");
  }

  int run(std::ostream& out, std::ostream& err) {
    if (!config.empty()) bind->apply_config(config);
    check_format(format, {"csv", "json"});
    analysis::SweepSpec spec;
    if (axis == "coupling" || axis == "g_over_kappa") {
      spec.axis = analysis::Axis::coupling;
    } else if (axis == "nbar_h" || axis == "nh") {
      spec.axis = analysis::Axis::hot_occupation;
    } else {
      throw UsageError("unknown --axis " + axis);
    }
    spec.base = params.resolve(*bind);
    spec.wave_offset = params.offset_c;
    spec.workers = workers;
    spec.wave_mc.seed = seed;
    spec.wave_mc.workers = workers;
    spec.particle_mc.seed = seed;
    spec.particle_mc.workers = workers;
    spec.models.clear();
    for (Model m : {Model::quantum, Model::wave, Model::particle}) {
      analysis::ModelRoute chosen{m, analysis::Route::closed_form};
      int picked = 0;
      for (const auto& it : parse_routes(routes)) {
        if (it.model == m) {
          chosen = it;
          ++picked;
        }
      }
      if (picked > 1) throw UsageError("sweep takes one route per model");
      spec.models.push_back(chosen);
    }
    if (points > 0) {
      if (!(from > 0.0 && to >= from)) throw UsageError("sweep needs 0 < --from <= --to");
      spec.grid = points == 1 ? std::vector<double>{from} : analysis::log_grid(from, to, points);
    }
    const auto table = analysis::run_sweep(spec);

    Echo echo = echo_params(spec.base, params.offset_c);
    echo.push_back({"axis", std::string(to_string(spec.axis))});
    echo.push_back({"from", exact(from)});
    echo.push_back({"to", exact(to)});
    echo.push_back({"points", std::to_string(points)});
    std::string route_echo;
    for (const auto& mr : spec.models) {
      if (!route_echo.empty()) route_echo += ",";
      route_echo += std::string(to_string(mr.model)) + ":" + std::string(to_string(mr.route));
    }
    echo.push_back({"routes", route_echo});
    echo.push_back({"seed", std::to_string(seed)});

    Sink sink(output, out);
    std::ostream& os = sink.stream();
    const char* tags[] = {"q", "w", "p"};
    if (format == "json") {
      json j;
      j["config"] = echo_json(echo);
      j["x_name"] = table.x_name;
      j["rows"] = json::array();
      for (const auto& row : table.rows) {
        json r;
        r["x"] = row.x;
        for (std::size_t m = 0; m < 3; ++m) {
          const auto& s = row.cells[m].stats;
          r[std::string("power_") + tags[m]] = s ? json(s->mean_power) : json(nullptr);
          r[std::string("noise_") + tags[m]] = s ? json(s->zero_freq_noise) : json(nullptr);
          r[std::string("fano_") + tags[m]] = s ? number_or_null(s->fano) : json(nullptr);
        }
        r["tur_bound"] = std::isfinite(row.tur_bound) ? json(row.tur_bound) : json(nullptr);
        r["tur_bound_wave"] =
            std::isfinite(row.tur_bound_wave) ? json(row.tur_bound_wave) : json(nullptr);
        if (!row.error.empty()) r["error"] = row.error;
        j["rows"].push_back(r);
      }
      os << j.dump(2) << "\n";
    } else {
      os << table.x_name;
      for (const char* t : tags) os << ",power_" << t << ",noise_" << t << ",fano_" << t;
      os << ",tur_bound,tur_bound_wave\n";
      const double nan = std::nan("");
      for (const auto& row : table.rows) {
        os << format_number(row.x);
        for (std::size_t m = 0; m < 3; ++m) {
          const auto& s = row.cells[m].stats;
          os << "," << format_number(s ? s->mean_power : nan) << ","
             << format_number(s ? s->zero_freq_noise : nan) << ","
             << format_number(s && s->fano ? *s->fano : nan);
        }
        auto bound = [&](double b) { return format_number(row.error.empty() && std::isfinite(b) ? b : nan); };
        os << "," << bound(row.tur_bound) << "," << bound(row.tur_bound_wave) << "\n";
      }
    }
    sink.close();
    for (const auto& row : table.rows) {
      if (!row.error.empty()) err << "point " << format_number(row.x) << " failed: " << row.error << "\n";
    }
    // Keep a pure data stream on stdout.
    std::ostream& meta = (sink.to_file() || format == "json") ? out : err;
    if (format != "json" || sink.to_file()) write_echo(meta, "sweep", echo);
    if (sink.to_file()) out << "wrote " << sink.path().string() << "\n";
    return ok;
  }
};

// ---------------------------------------------------------------- simulate

struct SimulateCmd {
  ParamFlags params;
  std::string model;
  int trajectories = 0;
  double t_total = 0.0;
  double t_burn = 0.0;
  double dt = 0.01;
  std::string trace;
  std::string format = "text";
  std::string output;
  std::string config;
  std::uint64_t seed = 1;
  unsigned workers = 0;
  std::unique_ptr<Bindings> bind;

  void add(CLI::App& app) {
    auto* sub = app.add_subcommand("simulate", "Monte Carlo estimate with a z-score against the closed form");
    sub->add_option("model", model, "wave or particle")->required();
    bind = std::make_unique<Bindings>(sub);
    params.add(*bind);
    bind->add("trajectories", trajectories, "ensemble size (0: default)");
    bind->add("t-total", t_total, "simulated time per trajectory, burn-in included (0: default)");
    bind->add("t-burn", t_burn, "burn-in time (0: default)");
    bind->add("dt", dt, "wave integrator step");
    bind->add("trace", trace, "write trajectory 0 to this CSV file");
    bind->add("format", format, "text or json");
    bind->add("output", output, "output file");
    bind->add("seed", seed, "Monte Carlo seed");
    bind->add("workers", workers, "worker threads (0: all cores)");
    sub->add_option("--config", config, "key = value file");
  }

  struct Line {
    std::string name;
    TrajectoryEstimate est;
    double target;
    double z;
  };

  static double z_of(double mean, double se, double target) {
    if (se > 0.0) return (mean - target) / se;
    return mean == target ? 0.0 : INFINITY;
  }

  int run(std::ostream& out) {
    if (!config.empty()) bind->apply_config(config);
    check_format(format, {"text", "json"});
    const EngineParams p = params.resolve(*bind);
    if (bind->given("trajectories") && trajectories < kMinTrajectoriesForNoise) {
      throw UsageError("at least " + std::to_string(kMinTrajectoriesForNoise) +
                       " trajectories are needed for a noise estimate");
    }
    const double d = p.delta();
    std::vector<Line> lines;
    Echo echo = echo_params(p, params.offset_c);
    if (model == "wave") {
      wave::TrajectoryConfig cfg;
      if (trajectories > 0) cfg.n_traj = trajectories;
      if (t_total > 0.0) cfg.t_total = t_total;
      if (t_burn > 0.0) cfg.t_burn = t_burn;
      cfg.dt = dt;
      cfg.seed = seed;
      cfg.workers = workers;
      const WaveParams wp{p, params.offset_c};
      try {
        wave::validate_config(wp, cfg);
      } catch (const ParameterError& e) {
        throw UsageError(e.what());
      }
      const auto target = closed_form::wave_stats(wp);
      const auto r = wave::estimate_power_stats(wp, cfg);
      lines.push_back({"mean_power", r.mean_power, target.mean_power, 0.0});
      lines.push_back({"population_mean_power", r.population_mean_power, target.mean_power, 0.0});
      lines.push_back({"noise", *r.noise, target.zero_freq_noise, 0.0});
      lines.push_back({"noise_batch_means", *r.noise_batch_means, target.zero_freq_noise, 0.0});
      echo.push_back({"trajectories", std::to_string(cfg.n_traj)});
      echo.push_back({"t-total", exact(cfg.t_total)});
      echo.push_back({"t-burn", exact(cfg.t_burn)});
      echo.push_back({"dt", exact(cfg.dt)});
      if (!trace.empty()) {
        std::ofstream f(output_path(trace));
        if (!f) throw IoError("cannot write " + output_path(trace).string());
        wave::write_trace_csv(f, wave::simulate_wave(wp, cfg, 0, 10));
      }
    } else if (model == "particle") {
      particle::GillespieConfig cfg;
      if (trajectories > 0) cfg.n_traj = trajectories;
      if (t_total > 0.0) cfg.t_total = t_total;
      if (t_burn > 0.0) cfg.t_burn = t_burn;
      cfg.seed = seed;
      cfg.workers = workers;
      try {
        particle::validate_config(p, cfg);
      } catch (const ParameterError& e) {
        throw UsageError(e.what());
      }
      const auto target = closed_form::particle_stats(p);
      const auto r = particle::gillespie_simulate(p, cfg);
      auto scaled = [](TrajectoryEstimate e, double s) {
        e.mean *= s;
        e.std_error *= s;
        return e;
      };
      lines.push_back({"mean_power", scaled(r.mean_rate, d), target.mean_power, 0.0});
      lines.push_back({"noise", scaled(*r.noise, d * d), target.zero_freq_noise, 0.0});
      lines.push_back(
          {"noise_batch_means", scaled(*r.noise_batch_means, d * d), target.zero_freq_noise, 0.0});
      echo.push_back({"trajectories", std::to_string(cfg.n_traj)});
      echo.push_back({"t-total", exact(cfg.t_total)});
      echo.push_back({"t-burn", exact(cfg.t_burn)});
      if (!trace.empty()) {
        std::ofstream f(output_path(trace));
        if (!f) throw IoError("cannot write " + output_path(trace).string());
        particle::write_jump_csv(f, particle::simulate_jumps(p, cfg, 0));
      }
    } else {
      throw UsageError("simulate takes wave or particle, not '" + model + "'");
    }
    echo.push_back({"seed", std::to_string(seed)});
    double worst = 0.0;
    for (auto& l : lines) {
      l.z = z_of(l.est.mean, l.est.std_error, l.target);
      // The population estimator carries the O(dt) integrator bias; it is
      // reported but not judged.
      if (l.name != "population_mean_power") worst = std::max(worst, std::abs(l.z));
    }
    const bool passed = worst <= 4.0;

    Sink sink(output, out);
    std::ostream& os = sink.stream();
    if (format == "json") {
      json j;
      j["config"] = echo_json(echo);
      j["model"] = model;
      for (const auto& l : lines) {
        j["estimates"][l.name] = {{"mean", l.est.mean},
                                  {"std_error", l.est.std_error},
                                  {"n_samples", l.est.n_samples},
                                  {"effective_sample_size", l.est.diagnostics.effective_sample_size},
                                  {"target", l.target},
                                  {"z", std::isfinite(l.z) ? json(l.z) : json(nullptr)}};
      }
      j["passed"] = passed;
      os << j.dump(2) << "\n";
    } else {
      write_echo(os, "simulate " + model, echo);
      os << "\n";
      for (const auto& l : lines) {
        os << l.name << " = " << format_number(l.est.mean) << " +- " << format_number(l.est.std_error)
           << "  (target " << format_number(l.target) << ", z " << format_number(l.z) << ", ess "
           << format_number(l.est.diagnostics.effective_sample_size) << ")\n";
      }
      os << (passed ? "PASS" : "FAIL") << " max |z| = " << format_number(worst) << " (limit 4)\n";
    }
    sink.close();
    return passed ? ok : verification_failure;
  }
};

// ---------------------------------------------------------------- verify

struct VerifyCmd {
  bool quick = false;
  std::uint64_t grid_seed = 1;
  std::size_t grid_size = 200;
  std::uint64_t seed = 1;
  unsigned workers = 0;
  std::string format = "text";
  std::string output;
  std::string config;
  std::unique_ptr<Bindings> bind;

  void add(CLI::App& app) {
    auto* sub = app.add_subcommand("verify", "cross-route verification battery");
    bind = std::make_unique<Bindings>(sub);
    bind->flag("quick", quick, "analytic routes only");
    bind->add("grid-seed", grid_seed, "seed of the random parameter grid");
    bind->add("grid-size", grid_size, "points on the random grid");
    bind->add("seed", seed, "Monte Carlo seed");
    bind->add("workers", workers, "worker threads (0: all cores)");
    bind->add("format", format, "text or json");
    bind->add("output", output, "output file");
    sub->add_option("--config", config, "key = value file");
  }

  int run(std::ostream& out) {
    if (!config.empty()) bind->apply_config(config);
    check_format(format, {"text", "json"});
    if (grid_size == 0) throw UsageError("--grid-size must be positive");
    verify::Options opts;
    opts.quick = quick;
    opts.grid_seed = grid_seed;
    opts.grid_size = grid_size;
    opts.mc_seed = seed;
    opts.workers = workers;
    const Echo echo = {{"quick", quick ? "true" : "false"},
                       {"grid-seed", std::to_string(grid_seed)},
                       {"grid-size", std::to_string(grid_size)},
                       {"seed", std::to_string(seed)}};

    Sink sink(output, out);
    std::ostream& os = sink.stream();
    const bool text = format == "text";
    if (text) {
      write_echo(os, "verify", echo);
      os << "\n";
    }
    const auto report = verify::run(opts, [&](const verify::Check& c) {
      if (!text) return;
      char head[64];
      std::snprintf(head, sizeof head, "%s [%2d] ", c.passed ? "PASS" : "FAIL", c.group);
      os << head << c.name << ": " << c.detail << "\n" << std::flush;
    });
    std::size_t passed = 0;
    for (const auto& c : report.checks) passed += c.passed ? 1 : 0;
    if (text) {
      os << "\n" << passed << "/" << report.checks.size() << " checks passed\n";
      for (const auto& f : report.failures()) os << "failed: " << f << "\n";
    } else {
      json j;
      j["config"] = echo_json(echo);
      j["checks"] = json::array();
      for (const auto& c : report.checks) {
        j["checks"].push_back({{"group", c.group},
                               {"name", c.name},
                               {"passed", c.passed},
                               {"detail", c.detail},
                               {"seconds", c.seconds}});
      }
      j["passed"] = report.all_passed();
      os << j.dump(2) << "\n";
    }
    sink.close();
    return report.all_passed() ? ok : verification_failure;
  }
};

}  // namespace

std::map<std::string, std::string> parse_config(std::istream& in) {
  std::map<std::string, std::string> out;
  std::string line;
  int n = 0;
  auto trim = [](std::string s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return std::string();
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
  };
  // A JSON report is accepted too; its "config" object is the echo.
  if ((in >> std::ws).peek() == '{') {
    const auto j = nlohmann::json::parse(in);
    const auto& c = j.contains("config") ? j["config"] : j;
    for (const auto& [k, v] : c.items()) out[k] = v.is_string() ? v.get<std::string>() : v.dump();
    return out;
  }
  // In a text report the [config] section ends at the first blank line.
  bool in_config = false;
  while (std::getline(in, line)) {
    ++n;
    line = trim(line);
    if (line.empty() && in_config) break;
    if (line.empty() || line[0] == '#') continue;
    if (line[0] == '[') {
      in_config = line == "[config]";
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error("line " + std::to_string(n) + ": expected key = value");
    }
    std::string key = trim(line.substr(0, eq));
    if (key.rfind("--", 0) == 0) key = key.substr(2);
    if (key.empty()) throw std::runtime_error("line " + std::to_string(n) + ": empty key");
    out[key] = trim(line.substr(eq + 1));
  }
  return out;
}

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Power statistics of a two-mode bosonic heat engine: quantum, wave and particle models"};
  app.name(args.empty() ? "bhe" : std::filesystem::path(args[0]).filename().string());
  app.require_subcommand(1);
  PointCmd point;
  SweepCmd sweep;
  SimulateCmd simulate;
  VerifyCmd verify;
  point.add(app);
  sweep.add(app);
  simulate.add(app);
  verify.add(app);

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  if (argv.empty()) argv.push_back("bhe");
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? ok : usage_error;
  }

  try {
    if (app.got_subcommand("point")) return point.run(out);
    if (app.got_subcommand("sweep")) return sweep.run(out, err);
    if (app.got_subcommand("simulate")) return simulate.run(out);
    if (app.got_subcommand("verify")) return verify.run(out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return usage_error;
  } catch (const ParameterError& e) {
    err << "error: " << e.what() << "\n";
    return usage_error;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return io_error;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return verification_failure;
  }
  return usage_error;
}

}  // namespace bhe::cli
