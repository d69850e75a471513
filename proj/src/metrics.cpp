#include "isac/metrics.hpp"

#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "isac/cyclo.hpp"
#include "isac/signal_model.hpp"

namespace isac {

double comm_sinr(const BeamformerPair& bf, const Scenario& scenario,
                 const OfdmSystemConfig& cfg, int k, int u) {
  require(k >= 1 && k <= cfg.K, "comm_sinr: subcarrier index out of range");
  require(u >= 1 && u <= scenario.num_users(), "comm_sinr: user index out of range");
  const CMat x = bf.effective(k);
  const CRow rx = scenario.true_channel(k, u).adjoint() * x;
  const double signal = std::norm(rx(u - 1));
  double interference = 0.0;
  for (Eigen::Index i = 0; i < rx.size(); ++i)
    if (i != u - 1) interference += std::norm(rx(i));
  return signal / (interference + scenario.sigma2_C);
}

double spectral_efficiency(const BeamformerPair& bf, const Scenario& scenario,
                           const OfdmSystemConfig& cfg) {
  double se = 0.0;
  for (int k = 1; k <= cfg.K; ++k)
    for (int u = 1; u <= scenario.num_users(); ++u)
      se += std::log2(1.0 + comm_sinr(bf, scenario, cfg, k, u));
  return se / cfg.K;
}

double transmit_spectrum(const BeamformerPair& bf, const OfdmSystemConfig& cfg,
                         double theta_deg, int k) {
  require(k >= 1 && k <= cfg.K, "transmit_spectrum: subcarrier index out of range");
  const CRow row =
      steering_vector(theta_deg, cfg.subcarrier_freq(k), cfg.M_t, cfg).adjoint() * bf.effective(k);
  return row.squaredNorm();
}

double radar_sinr(const BeamformerPair& bf, const Scenario& scenario,
                  const OfdmSystemConfig& cfg, int k) {
  require(k >= 1 && k <= cfg.K, "radar_sinr: subcarrier index out of range");
  const double f_k = cfg.subcarrier_freq(k);
  const CMat x = bf.effective(k);
  const CVec a_t_e = steering_vector(scenario.theta_E, f_k, cfg.M_t, cfg);
  const CVec a_r_e = steering_vector(scenario.theta_E, f_k, cfg.M_r, cfg);
  const double signal = scenario.sigma2_E_k[k - 1] * (a_t_e.adjoint() * x).squaredNorm();
  double clutter = 0.0;
  for (int i = 0; i < scenario.num_clutter(); ++i) {
    const double theta_i = scenario.clutter_angles[i];
    const cdouble gain =
        (a_r_e.adjoint() * steering_vector(theta_i, f_k, cfg.M_r, cfg))(0);
    const CRow leak = steering_vector(theta_i, f_k, cfg.M_t, cfg).adjoint() * x;
    clutter += scenario.sigma2_i_k[i][k - 1] * std::norm(gain) * leak.squaredNorm();
  }
  return signal / (clutter + scenario.sigma2_R);
}

double iml(const BeamformerPair& bf, const DesignConstraints& constraints,
           const OfdmSystemConfig& cfg) {
  double total = 0.0;
  for (int k = 1; k <= cfg.K; ++k)
    for (double theta : constraints.mainlobe_grid) total += transmit_spectrum(bf, cfg, theta, k);
  if (total <= dbm_to_watt(kDbmFloor)) return kDbmFloor;
  return watt_to_dbm(total);
}

MetricsReport evaluate_metrics(const BeamformerPair& bf, const Scenario& scenario,
                               const DesignConstraints& constraints,
                               const OfdmSystemConfig& cfg,
                               const std::vector<double>& spectrum_angles) {
  MetricsReport rep;
  rep.se = spectral_efficiency(bf, scenario, cfg);
  rep.sinr_radar_k.resize(cfg.K);
  for (int k = 1; k <= cfg.K; ++k) rep.sinr_radar_k[k - 1] = radar_sinr(bf, scenario, cfg, k);
  rep.iml_dbm = iml(bf, constraints, cfg);
  rep.p_intercept = intercepted_power(bf, scenario, cfg);
  // score the signal covariance itself: the ergodic spectrum also carries the
  // receiver noise floor, which masks the design's off-diagonal suppression
  rep.flatness = flatness_score(r_xi_matrix(intercept_subcarrier_powers(bf, scenario, cfg), cfg));
  rep.spectrum_angles = spectrum_angles;
  rep.spectrum.assign(spectrum_angles.size(), std::vector<double>(cfg.K, 0.0));
  for (size_t a = 0; a < spectrum_angles.size(); ++a)
    for (int k = 1; k <= cfg.K; ++k)
      rep.spectrum[a][k - 1] = transmit_spectrum(bf, cfg, spectrum_angles[a], k);
  return rep;
}

void write_metrics_json(const MetricsReport& report, const std::string& path) {
  nlohmann::json j;
  j["se_bps_hz"] = report.se;
  j["sinr_radar_k"] = report.sinr_radar_k;
  j["iml_dbm"] = report.iml_dbm;
  j["p_intercept_w"] = report.p_intercept;
  j["flatness_score"] = report.flatness;
  j["spectrum_angles_deg"] = report.spectrum_angles;
  j["spectrum_w"] = report.spectrum;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << j.dump(2) << '\n';
}

void write_spectrum_map_csv(const MetricsReport& report, const OfdmSystemConfig& cfg,
                            const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "theta_deg,k,f_k_Hz,power_dBm\n";
  char buf[128];
  for (size_t a = 0; a < report.spectrum_angles.size(); ++a)
    for (int k = 1; k <= cfg.K; ++k) {
      const double p = report.spectrum[a][k - 1];
      const double dbm = p > dbm_to_watt(kDbmFloor) ? watt_to_dbm(p) : kDbmFloor;
      std::snprintf(buf, sizeof(buf), "%.17g,%d,%.17g,%.17g\n", report.spectrum_angles[a], k,
                    cfg.subcarrier_freq(k), dbm);
      out << buf;
    }
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace isac
