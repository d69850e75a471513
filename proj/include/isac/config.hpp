#ifndef ISAC_CONFIG_HPP
#define ISAC_CONFIG_HPP

#include <algorithm>
#include <vector>

#include "isac/types.hpp"

namespace isac {

/// System-level OFDM/array parameters. Immutable value object; validate()
/// must pass before the struct is used anywhere else.
struct OfdmSystemConfig {
  int M_t = 8;            // transmit antennas
  int M_r = 8;            // receive antennas
  int N_RF = 2;           // RF chains
  int K = 8;              // subcarriers
  double B = 2.56e9;      // bandwidth [Hz]
  double f_c = 24e9;      // center frequency [Hz]
  double d = 0.0;         // element spacing [m]; 0 means half wavelength at f_c
  double v = 299792458.0; // propagation speed [m/s]
  int N = 10;             // intercept sampling points
  int W = 2;              // cyclic-analysis window length (even)
  int N_symbol = 32;      // OFDM symbol length
  int N_cp = 4;           // cyclic prefix length

  double delta_f() const { return B / K; }
  double sample_period() const { return 1.0 / (N * delta_f()); }
  // f_k = f_c + (k - K/2) * delta_f, k = 1..K
  double subcarrier_freq(int k) const {
    return f_c + (static_cast<double>(k) - K / 2.0) * delta_f();
  }
  double spacing() const { return d > 0.0 ? d : v / (2.0 * f_c); }
  double max_range() const { return v * N_cp / (2.0 * B); }

  void validate() const {
    require(M_t >= 1 && M_r >= 1 && K >= 1 && N_symbol >= 1 && N_cp >= 0,
            "all counts must be positive");
    require(N_RF >= 1 && N_RF <= M_t, "require 1 <= N_RF <= M_t");
    require(N >= 1 && W >= 1 && W <= N, "require N >= W >= 1");
    require(W == 1 || W % 2 == 0, "cyclic window length W must be even");
    require(B > 0.0 && f_c > 0.0 && v > 0.0, "B, f_c, v must be positive");
    require(subcarrier_freq(1) > 0.0, "f_1 must be positive");
  }
};

/// Target/clutter geometry, channel realizations and noise powers for one
/// scenario draw. Channels indexed [k][u] with vectors of length M_t.
struct Scenario {
  double theta_E = 26.0;                 // ER aircraft / target angle [deg]
  std::vector<double> clutter_angles;    // theta_i [deg]
  std::vector<double> sigma2_E_k;        // per-subcarrier ER amplitude variance [W]
  std::vector<std::vector<double>> sigma2_i_k;  // [i][k] clutter variances [W]
  double sigma2_R = 0.0;                 // radar noise power [W]
  double sigma2_C = 0.0;                 // communication noise power [W]
  double sigma2_Ez = 0.0;                // ER receiver noise power [W]
  std::vector<cdouble> beta_k;           // intercept channel coefficients
  std::vector<std::vector<CVec>> channels;  // h_{k,u}, shape (K, U, M_t)
  // Ground-truth channels kept when CSI is perturbed; empty otherwise.
  std::vector<std::vector<CVec>> channels_true;

  int num_users() const { return channels.empty() ? 0 : static_cast<int>(channels[0].size()); }
  int num_clutter() const { return static_cast<int>(clutter_angles.size()); }
  int num_subcarriers() const { return static_cast<int>(channels.size()); }

  const CVec& channel(int k, int u) const { return channels[k - 1][u - 1]; }
  const CVec& true_channel(int k, int u) const {
    return channels_true.empty() ? channels[k - 1][u - 1] : channels_true[k - 1][u - 1];
  }

  void validate(const OfdmSystemConfig& cfg) const {
    require(static_cast<int>(channels.size()) == cfg.K, "channels must span K subcarriers");
    require(num_users() >= 1, "at least one user");
    for (const auto& per_k : channels) {
      require(static_cast<int>(per_k.size()) == num_users(), "ragged channel array");
      for (const auto& h : per_k)
        require(h.size() == cfg.M_t, "channel vectors must have length M_t");
    }
    require(static_cast<int>(beta_k.size()) == cfg.K, "beta_k must span K subcarriers");
    require(static_cast<int>(sigma2_E_k.size()) == cfg.K, "sigma2_E_k must span K subcarriers");
    require(static_cast<int>(sigma2_i_k.size()) == clutter_angles.size(),
            "sigma2_i_k rows must match clutter count");
    for (const auto& row : sigma2_i_k) {
      require(static_cast<int>(row.size()) == cfg.K, "sigma2_i_k must span K subcarriers");
      for (double s : row) require(s > 0.0, "clutter variances must be positive");
    }
    for (double s : sigma2_E_k) require(s > 0.0, "ER variances must be positive");
    require(sigma2_R > 0.0 && sigma2_C > 0.0 && sigma2_Ez > 0.0,
            "noise powers must be positive");
  }
};

/// Mainlobe / nulling / power constraint set for the beamformer design.
struct DesignConstraints {
  std::vector<double> mainlobe_grid;  // Theta = {theta_m} [deg], sorted
  std::vector<double> clutter_grid;   // nulling grid {vartheta_s} [deg], sorted
  double eta = 0.1;                   // weighted mainlobe level [W]
  std::vector<double> zeta_k;         // per-subcarrier nulling thresholds [W]
  std::vector<double> P_k;            // per-subcarrier power budgets [W]
  std::vector<double> varpi_k;        // mainlobe weights

  int M() const { return static_cast<int>(mainlobe_grid.size()); }
  int S() const { return static_cast<int>(clutter_grid.size()); }

  void validate(const OfdmSystemConfig& cfg) const {
    require(!mainlobe_grid.empty() && !clutter_grid.empty(), "angle grids must be nonempty");
    require(std::is_sorted(mainlobe_grid.begin(), mainlobe_grid.end()), "mainlobe grid must be sorted");
    require(std::is_sorted(clutter_grid.begin(), clutter_grid.end()), "clutter grid must be sorted");
    require(eta > 0.0, "eta must be positive");
    require(static_cast<int>(zeta_k.size()) == cfg.K && static_cast<int>(P_k.size()) == cfg.K &&
                static_cast<int>(varpi_k.size()) == cfg.K,
            "zeta_k, P_k, varpi_k must span K subcarriers");
    for (double z : zeta_k) require(z >= 0.0, "zeta_k must be nonnegative");
    for (double p : P_k) require(p > 0.0, "P_k must be positive");
    for (double w : varpi_k) require(w > 0.0, "varpi_k must be positive");
  }
};

}  // namespace isac

#endif  // ISAC_CONFIG_HPP
