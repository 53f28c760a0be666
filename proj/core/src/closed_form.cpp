#include "bhe/closed_form.hpp"

namespace bhe::closed_form {

namespace {

double sq(double x) { return x * x; }
double cube(double x) { return x * x * x; }

}  // namespace

double transfer_rate(const EngineParams& p) {
  return 4.0 * sq(p.g) / (p.kappa_h + p.kappa_c);
}

double chi(const EngineParams& p) {
  return 1.0 / ((p.kappa_h + p.kappa_c) * (4.0 * sq(p.g) + p.kappa_h * p.kappa_c));
}

double mean_power(const EngineParams& p) {
  const double kk = p.kappa_h * p.kappa_c;
  return 4.0 * sq(p.g) * kk * p.delta() * (p.nbar_h() - p.nbar_c()) * chi(p);
}

double mean_power_series(const EngineParams& p) {
  const double gamma = transfer_rate(p);
  if (gamma == 0.0) return 0.0;
  const double resistance = 1.0 / p.kappa_h + 1.0 / p.kappa_c + 1.0 / gamma;
  return p.delta() * (p.nbar_h() - p.nbar_c()) / resistance;
}

double equilibrium_coefficient(const EngineParams& p) {
  return 4.0 * sq(p.g) * p.kappa_h * p.kappa_c * sq(p.delta()) * chi(p);
}

double shot_coefficient(const EngineParams& p) {
  const double g2 = sq(p.g);
  const double kh = p.kappa_h;
  const double kc = p.kappa_c;
  const double kk = kh * kc;
  // kk^2 [(kh+kc)^2 - 8 g^2] + 16 g^4 (kh^2 + kc^2), strictly positive.
  const double bracket = sq(kk) * (sq(kh + kc) - 8.0 * g2) + 16.0 * sq(g2) * (sq(kh) + sq(kc));
  return 4.0 * g2 * kk * bracket * sq(p.delta()) * cube(chi(p));
}

double particle_shot_excess(const EngineParams& p) {
  const double g2 = sq(p.g);
  const double kh = p.kappa_h;
  const double kc = p.kappa_c;
  const double kk = kh * kc;
  const double numer =
      256.0 * cube(g2) * cube(kk) * (12.0 * g2 + sq(kh) + sq(kc) + 4.0 * kk);
  const double denom =
      48.0 * sq(g2) + kk * sq(kh + kc) + 4.0 * g2 * (sq(kh) + sq(kc) + 6.0 * kk);
  return numer / denom * sq(p.delta()) * cube(chi(p));
}

ModelNoise quantum_noise(const EngineParams& p) {
  NoiseDecomposition d{equilibrium_coefficient(p), shot_coefficient(p), Model::quantum};
  return {d, d.assemble(p.nbar_h(), p.nbar_c())};
}

ModelNoise wave_noise(const WaveParams& p) {
  NoiseDecomposition d{equilibrium_coefficient(p.base), shot_coefficient(p.base), Model::wave};
  return {d, d.assemble(p.phi_h(), p.phi_c())};
}

ModelNoise particle_noise(const EngineParams& p) {
  NoiseDecomposition d{equilibrium_coefficient(p), shot_coefficient(p) + particle_shot_excess(p),
                       Model::particle};
  return {d, d.assemble(p.nbar_h(), p.nbar_c())};
}

PowerStats quantum_stats(const EngineParams& p) {
  return make_power_stats(mean_power(p), quantum_noise(p).noise, p.delta());
}

PowerStats wave_stats(const WaveParams& p) {
  return make_power_stats(mean_power(p.base), wave_noise(p).noise, p.base.delta());
}

PowerStats particle_stats(const EngineParams& p) {
  return make_power_stats(mean_power(p), particle_noise(p).noise, p.delta());
}

PowerStats poisson_limit(const EngineParams& p) {
  const double gamma = transfer_rate(p);
  const double nh = p.nbar_h();
  const double nc = p.nbar_c();
  const double forward = gamma * nh * (nc + 1.0);
  const double backward = gamma * nc * (nh + 1.0);
  const double d = p.delta();
  return make_power_stats(d * (forward - backward), sq(d) * (forward + backward), d);
}

PowerStats hybridized_limit(const EngineParams& p) {
  const double kh = p.kappa_h;
  const double kc = p.kappa_c;
  const double nh = p.nbar_h();
  const double nc = p.nbar_c();
  const double d = p.delta();
  const double ks = kh + kc;
  const double mean = kh * kc * d / ks * (nh - nc);
  const double noise = kh * kc * sq(d) / cube(ks) *
                       (sq(ks) * (nh * (nh + 1.0) + nc * (nc + 1.0)) -
                        sq(nh - nc) * (sq(kh) + sq(kc)));
  return make_power_stats(mean, noise, d);
}

double particle_shot_excess_small_g(const EngineParams& p) {
  const double kh = p.kappa_h;
  const double kc = p.kappa_c;
  const double ks = kh + kc;
  return 256.0 * cube(sq(p.g)) * (sq(kh) + 4.0 * kh * kc + sq(kc)) * sq(p.delta()) /
         (kh * kc * sq(ks) * cube(ks));
}

double particle_shot_excess_large_g(const EngineParams& p) {
  const double kk = p.kappa_h * p.kappa_c;
  return cube(kk) * sq(p.delta()) / (sq(p.g) * cube(p.kappa_h + p.kappa_c));
}

namespace equal_kappa {

double shot_coefficient(double g, double kappa, double delta) {
  const double g2 = g * g;
  const double k2 = kappa * kappa;
  const double e = 2.0 * g2 * kappa * delta * delta / (4.0 * g2 + k2);
  return e * (1.0 - 2.0 * g2 * (4.0 * g2 + 5.0 * k2) / sq(4.0 * g2 + k2));
}

double particle_shot_coefficient(double g, double kappa, double delta) {
  const double g2 = g * g;
  const double k2 = kappa * kappa;
  const double e = 2.0 * g2 * kappa * delta * delta / (4.0 * g2 + k2);
  return shot_coefficient(g, kappa, delta) +
         e * 24.0 * sq(g2) * k2 / ((6.0 * g2 + k2) * sq(4.0 * g2 + k2));
}

}  // namespace equal_kappa

}  // namespace bhe::closed_form
