#ifndef ISAC_SIGNAL_MODEL_HPP
#define ISAC_SIGNAL_MODEL_HPP

#include <cstdint>

#include "isac/config.hpp"
#include "isac/types.hpp"

namespace isac {

/// Space-frequency steering vector: entry m = (1/sqrt(count)) exp(j 2 pi f tau_m),
/// tau_m = (m-1) d sin(theta) / v. Unit Euclidean norm by construction.
CVec steering_vector(double theta_deg, double f_hz, int count, const OfdmSystemConfig& cfg);

/// Unnormalized DFT matrix, entry (i,j) = exp(-j 2 pi (i-1)(j-1) / N).
/// (1/sqrt(N)) * matrix is unitary.
CMat fft_matrix(int n);

/// Intercept sampling vector d(f_k): entry n = exp(j 2 pi f_k (n-1) T_s), n = 1..N.
CVec tone_vector(double f_k_hz, const OfdmSystemConfig& cfg);

/// Parameters for the random scenario generator.
struct ScenarioSpec {
  int num_users = 2;
  int num_paths = 3;                  // geometric channel paths per user
  double theta_E = 26.0;              // [deg]
  std::vector<double> clutter_angles = {-30.0, 60.0};
  double sigma2_E_dbm = -70.0;        // ER amplitude variance
  double sigma2_i_dbm = -50.0;        // clutter variances
  double sigma2_R_dbm = -70.0;        // radar noise
  double sigma2_C_dbm = -70.0;        // communication noise
  double sigma2_Ez_dbm = -70.0;       // ER receiver noise
  double beta_var_dbm = -100.0;       // |beta|^2 at the center subcarrier
};

/// Draws channels h_{k,u} = sqrt(M_t/L) sum_l alpha_l a_t(phi_l, f_k) with
/// alpha ~ CN(0,1) and path angles uniform on [-90, 90] deg. Deterministic
/// under a fixed seed. Intercept coefficients beta_k are frequency-flat in
/// magnitude with a per-subcarrier delay phase.
Scenario generate_channels(const ScenarioSpec& spec, const OfdmSystemConfig& cfg,
                           std::uint64_t seed);

/// Returns a copy of `scenario` whose channels are perturbed estimates
/// h + dh, dh ~ CN(0, sigma2_csi I); the original channels are retained as
/// ground truth (true_channel) for metric evaluation.
Scenario perturb_csi(const Scenario& scenario, double sigma2_csi, std::uint64_t seed);

}  // namespace isac

#endif  // ISAC_SIGNAL_MODEL_HPP
