#ifndef ISAC_METRICS_HPP
#define ISAC_METRICS_HPP

#include <string>
#include <vector>

#include "isac/beamformer.hpp"
#include "isac/config.hpp"
#include "isac/types.hpp"

namespace isac {

// Sentinel reported in dBm when a level is below the measurable floor.
inline constexpr double kDbmFloor = -120.0;

/// Downlink SINR of user u at subcarrier k (linear), ground-truth channels.
double comm_sinr(const BeamformerPair& bf, const Scenario& scenario,
                 const OfdmSystemConfig& cfg, int k, int u);

/// SE = (1/K) sum_k sum_u log2(1 + SINR_{k,u})  [bits/s/Hz].
double spectral_efficiency(const BeamformerPair& bf, const Scenario& scenario,
                           const OfdmSystemConfig& cfg);

/// Transmit space-frequency spectrum ||a_t^H(theta, f_k) X_k||_F^2  [W].
double transmit_spectrum(const BeamformerPair& bf, const OfdmSystemConfig& cfg,
                         double theta_deg, int k);

/// Output radar SINR at subcarrier k with the receive filter fixed to
/// a_r(theta_E, f_k) (linear).
double radar_sinr(const BeamformerPair& bf, const Scenario& scenario,
                  const OfdmSystemConfig& cfg, int k);

/// Integrated mainlobe level over the constraint grid  [dBm]; kDbmFloor when
/// the summed power is below the floor.
double iml(const BeamformerPair& bf, const DesignConstraints& constraints,
           const OfdmSystemConfig& cfg);

struct MetricsReport {
  double se = 0.0;                       // bits/s/Hz
  std::vector<double> sinr_radar_k;      // linear, per subcarrier
  double iml_dbm = kDbmFloor;
  double p_intercept = 0.0;              // W
  double flatness = 0.0;                 // intercept-covariance noise-likeness
  std::vector<double> spectrum_angles;   // deg
  std::vector<std::vector<double>> spectrum;  // [angle][k] power, W
};

MetricsReport evaluate_metrics(const BeamformerPair& bf, const Scenario& scenario,
                               const DesignConstraints& constraints,
                               const OfdmSystemConfig& cfg,
                               const std::vector<double>& spectrum_angles);

void write_metrics_json(const MetricsReport& report, const std::string& path);
/// CSV rows: theta_deg, k, f_k_Hz, power_dBm.
void write_spectrum_map_csv(const MetricsReport& report, const OfdmSystemConfig& cfg,
                            const std::string& path);

}  // namespace isac

#endif  // ISAC_METRICS_HPP
