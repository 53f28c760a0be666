#include "bhe/params.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace bhe {

std::string_view to_string(Model m) {
  switch (m) {
    case Model::quantum:
      return "quantum";
    case Model::wave:
      return "wave";
    case Model::particle:
      return "particle";
  }
  return "unknown";
}

double bose_occupation(double omega, double temperature) {
  if (!std::isfinite(omega) || !std::isfinite(temperature) || omega <= 0.0 ||
      temperature <= 0.0) {
    std::ostringstream os;
    os << "bose_occupation requires finite positive arguments (omega=" << omega
       << ", T=" << temperature << ")";
    throw ParameterError(os.str());
  }
  // expm1 keeps full precision in the high-temperature regime.
  return 1.0 / std::expm1(omega / temperature);
}

double inverse_temperature_ratio(double nbar) {
  if (nbar <= 0.0) return std::numeric_limits<double>::infinity();
  return std::log1p(1.0 / nbar);
}

namespace {

double resolve(const OccupationSpec& spec, double omega_h, double omega_c, bool hot) {
  if (const auto* occ = std::get_if<Occupations>(&spec)) {
    return hot ? occ->hot : occ->cold;
  }
  const auto& temps = std::get<Temperatures>(spec);
  return hot ? bose_occupation(omega_h, temps.hot) : bose_occupation(omega_c, temps.cold);
}

}  // namespace

double EngineParams::nbar_h() const { return resolve(occupation, omega_h, omega_c, true); }
double EngineParams::nbar_c() const { return resolve(occupation, omega_h, omega_c, false); }

EngineParams EngineParams::from_occupations(double g, double kappa_h, double kappa_c,
                                            double delta, double nbar_h, double nbar_c) {
  EngineParams p;
  p.g = g;
  p.kappa_h = kappa_h;
  p.kappa_c = kappa_c;
  p.omega_c = 1.0;
  p.omega_h = 1.0 + delta;
  p.occupation = Occupations{nbar_h, nbar_c};
  return p;
}

EngineParams EngineParams::from_temperatures(double g, double kappa_h, double kappa_c,
                                             double omega_h, double omega_c, double t_h,
                                             double t_c) {
  EngineParams p;
  p.g = g;
  p.kappa_h = kappa_h;
  p.kappa_c = kappa_c;
  p.omega_h = omega_h;
  p.omega_c = omega_c;
  p.occupation = Temperatures{t_h, t_c};
  return p;
}

ValidationReport validate(const EngineParams& params) {
  std::vector<std::string> errors;
  auto require = [&errors](bool ok, const std::string& msg) {
    if (!ok) errors.push_back(msg);
  };
  auto finite = [](double x) { return std::isfinite(x); };

  require(finite(params.g) && params.g >= 0.0, "g must be finite and >= 0");
  require(finite(params.kappa_h) && params.kappa_h > 0.0, "kappa_h must be > 0");
  require(finite(params.kappa_c) && params.kappa_c > 0.0, "kappa_c must be > 0");
  require(finite(params.omega_h) && params.omega_h > 0.0, "omega_h must be > 0");
  require(finite(params.omega_c) && params.omega_c > 0.0, "omega_c must be > 0");
  require(params.delta() > 0.0, "omega_h must exceed omega_c (delta > 0)");

  double nh = 0.0;
  double nc = 0.0;
  if (const auto* t = std::get_if<Temperatures>(&params.occupation)) {
    require(finite(t->hot) && t->hot > 0.0, "T_h must be > 0");
    require(finite(t->cold) && t->cold > 0.0, "T_c must be > 0");
  } else {
    const auto& o = std::get<Occupations>(params.occupation);
    require(finite(o.hot) && o.hot >= 0.0, "nbar_h must be finite and >= 0");
    require(finite(o.cold) && o.cold >= 0.0, "nbar_c must be finite and >= 0");
  }

  if (!errors.empty()) {
    std::string msg = "invalid engine parameters:";
    for (const auto& e : errors) msg += "\n  - " + e;
    throw ParameterError(msg);
  }

  nh = params.nbar_h();
  nc = params.nbar_c();

  ValidationReport report{params, {}};
  report.params.occupation = Occupations{nh, nc};
  if (nh < nc) {
    report.warnings.emplace_back("nbar_h < nbar_c: reversed bias, mean power is negative");
  } else if (nh == nc) {
    report.warnings.emplace_back("nbar_h == nbar_c: equilibrium, Fano factor undefined");
  }
  return report;
}

PowerStats make_power_stats(double mean_power, double noise, double delta, double fano_floor) {
  PowerStats s{mean_power, noise, std::nullopt};
  if (std::abs(mean_power) >= fano_floor) s.fano = noise / (mean_power * delta);
  return s;
}

double NoiseDecomposition::assemble(double occ_h, double occ_c) const {
  const double bias = occ_h - occ_c;
  if (model == Model::wave) {
    return equilibrium * (occ_h * occ_h + occ_c * occ_c) - shot * bias * bias;
  }
  return equilibrium * (occ_h * (occ_h + 1.0) + occ_c * (occ_c + 1.0)) - shot * bias * bias;
}

}  // namespace bhe
