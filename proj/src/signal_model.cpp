#include "isac/signal_model.hpp"

#include <random>

namespace isac {

CVec steering_vector(double theta_deg, double f_hz, int count, const OfdmSystemConfig& cfg) {
  require(count >= 1, "steering_vector: count must be >= 1");
  require(std::isfinite(theta_deg) && std::isfinite(f_hz), "steering_vector: non-finite argument");
  require(f_hz > 0.0, "steering_vector: frequency must be positive");
  const double tau_unit = cfg.spacing() * std::sin(deg_to_rad(theta_deg)) / cfg.v;
  const double scale = 1.0 / std::sqrt(static_cast<double>(count));
  CVec a(count);
  for (int m = 0; m < count; ++m)
    a(m) = scale * std::exp(kJ * (2.0 * kPi * f_hz * (m * tau_unit)));
  return a;
}

CMat fft_matrix(int n) {
  require(n >= 1, "fft_matrix: size must be >= 1");
  CMat v(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      // reduce (i*j) mod n before the complex exponential to keep phases small
      const long long ij = (static_cast<long long>(i) * j) % n;
      v(i, j) = std::exp(-kJ * (2.0 * kPi * static_cast<double>(ij) / n));
    }
  return v;
}

CVec tone_vector(double f_k_hz, const OfdmSystemConfig& cfg) {
  const double ts = cfg.sample_period();
  CVec d(cfg.N);
  for (int n = 0; n < cfg.N; ++n)
    d(n) = std::exp(kJ * (2.0 * kPi * f_k_hz * n * ts));
  return d;
}

namespace {

cdouble complex_gaussian(std::mt19937_64& rng, std::normal_distribution<double>& gauss) {
  // CN(0,1): independent real/imag parts with variance 1/2 each
  const double s = 1.0 / std::sqrt(2.0);
  return {s * gauss(rng), s * gauss(rng)};
}

}  // namespace

Scenario generate_channels(const ScenarioSpec& spec, const OfdmSystemConfig& cfg,
                           std::uint64_t seed) {
  cfg.validate();
  require(spec.num_users >= 1, "generate_channels: need at least one user");
  require(spec.num_paths >= 1, "generate_channels: need at least one path");

  std::mt19937_64 rng(derive_seed(seed, 0));
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> angle(-90.0, 90.0);

  Scenario sc;
  sc.theta_E = spec.theta_E;
  sc.clutter_angles = spec.clutter_angles;
  sc.sigma2_R = dbm_to_watt(spec.sigma2_R_dbm);
  sc.sigma2_C = dbm_to_watt(spec.sigma2_C_dbm);
  sc.sigma2_Ez = dbm_to_watt(spec.sigma2_Ez_dbm);
  sc.sigma2_E_k.assign(cfg.K, dbm_to_watt(spec.sigma2_E_dbm));
  sc.sigma2_i_k.assign(spec.clutter_angles.size(),
                       std::vector<double>(cfg.K, dbm_to_watt(spec.sigma2_i_dbm)));

  // beta_k: flat magnitude set by the center-frequency variance, phase from a
  // random propagation delay (captures path loss + delay phase shift).
  const double beta_mag = std::sqrt(dbm_to_watt(spec.beta_var_dbm));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double delay = unit(rng) / cfg.delta_f();
  sc.beta_k.resize(cfg.K);
  for (int k = 1; k <= cfg.K; ++k)
    sc.beta_k[k - 1] = beta_mag * std::exp(-kJ * (2.0 * kPi * cfg.subcarrier_freq(k) * delay));

  // Geometric L-path mmWave surrogate; path angles/gains shared across
  // subcarriers so the frequency dependence enters through the steering vectors.
  const double path_scale = std::sqrt(static_cast<double>(cfg.M_t) / spec.num_paths);
  sc.channels.assign(cfg.K, std::vector<CVec>(spec.num_users));
  for (int u = 0; u < spec.num_users; ++u) {
    std::vector<cdouble> gains(spec.num_paths);
    std::vector<double> angles(spec.num_paths);
    for (int l = 0; l < spec.num_paths; ++l) {
      gains[l] = complex_gaussian(rng, gauss);
      angles[l] = angle(rng);
    }
    for (int k = 1; k <= cfg.K; ++k) {
      CVec h = CVec::Zero(cfg.M_t);
      for (int l = 0; l < spec.num_paths; ++l)
        h += gains[l] * steering_vector(angles[l], cfg.subcarrier_freq(k), cfg.M_t, cfg);
      sc.channels[k - 1][u] = path_scale * h;
    }
  }
  return sc;
}

Scenario perturb_csi(const Scenario& scenario, double sigma2_csi, std::uint64_t seed) {
  require(sigma2_csi >= 0.0, "perturb_csi: variance must be nonnegative");
  Scenario out = scenario;
  if (sigma2_csi == 0.0) return out;
  out.channels_true = scenario.channels_true.empty() ? scenario.channels : scenario.channels_true;
  std::mt19937_64 rng(derive_seed(seed, 1));
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double s = std::sqrt(sigma2_csi);
  for (auto& per_k : out.channels)
    for (auto& h : per_k)
      for (Eigen::Index i = 0; i < h.size(); ++i)
        h(i) += s * complex_gaussian(rng, gauss);
  return out;
}

}  // namespace isac
