#ifndef ISAC_CYCLO_HPP
#define ISAC_CYCLO_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "isac/beamformer.hpp"
#include "isac/config.hpp"
#include "isac/types.hpp"

namespace isac {

/// Cyclic spectrum over frequency index m in {0..N-W} and even cyclic index
/// n in {0,2,..,N-W}. Physical axes: f = m f_s, alpha = n f_s.
struct CyclicSpectrum {
  CMat values;   // rows: m, cols: n (in the order of n_set)
  std::vector<int> m_set;
  std::vector<int> n_set;
  int W = 0;
  double f_s = 0.0;

  static CyclicSpectrum zeros(const OfdmSystemConfig& cfg);
  cdouble at(int m, int n) const;  // n must be a member of n_set
  int n_index(int n) const;
};

/// Windowed selector Lambda_{m,n}: at most W nonzero entries of magnitude 1/W,
/// placed so that rhat^H Lambda rhat reproduces the windowed lag product.
/// DFT-bin indices wrap modulo N.
struct SelectorMatrix {
  CMat values;  // N x N
};

SelectorMatrix selector_matrix(int m, int n, int N, int W);

/// Signal observed by the intercept receiver:
/// r = sum_k beta_k (a_t^H(theta_E,f_k) F_RF F_k s_k) d(f_k) + z, z ~ CN(0, sigma_E^2 I).
/// Symbols are unit-variance BPSK (E{s s^H} = I).
CVec intercept_signal(const BeamformerPair& bf, const Scenario& scenario,
                      const OfdmSystemConfig& cfg, std::uint64_t noise_seed);

/// Closed-form collected power: sum_k ||beta_k a_t^H F_RF F_k||_F^2 + K sigma_E^2.
double intercepted_power(const BeamformerPair& bf, const Scenario& scenario,
                         const OfdmSystemConfig& cfg);

/// Single-realization cyclic spectrum of a length-N signal.
CyclicSpectrum cyclic_spectrum(const CVec& r, const OfdmSystemConfig& cfg);

/// Per-subcarrier intercepted signal powers c_k^2 = |beta_k|^2 ||a_t^H F_RF F_k||_F^2.
std::vector<double> intercept_subcarrier_powers(const BeamformerPair& bf,
                                                const Scenario& scenario,
                                                const OfdmSystemConfig& cfg);

/// Toeplitz covariance R_Xi[m,n] = sum_k c_k^2 exp(j 2 pi f_k (m-n) T_s), N x N.
CMat r_xi_matrix(const std::vector<double>& c2, const OfdmSystemConfig& cfg);

/// Ergodic cyclic spectrum: Tr{(R_Xi + sigma_E^2 I) V^H Lambda_{m,n} V}.
CyclicSpectrum ergodic_cyclic_spectrum(const BeamformerPair& bf, const Scenario& scenario,
                                       const OfdmSystemConfig& cfg);

/// Ergodic cyclic spectrum of pure AWGN with power sigma2_0.
CyclicSpectrum awgn_ergodic_spectrum(double sigma2_0, const OfdmSystemConfig& cfg);

/// Sample mean of cyclic_spectrum over `trials` Monte-Carlo draws with
/// deterministically derived per-trial seeds (pairwise-summed reduction).
CyclicSpectrum monte_carlo_cyclic_spectrum(const BeamformerPair& bf, const Scenario& scenario,
                                           const OfdmSystemConfig& cfg, int trials,
                                           std::uint64_t master_seed);

/// Noise-likeness score. For covariance input: max off-diagonal magnitude over
/// mean diagonal magnitude. For a spectrum: max |n != 0 entries| over mean
/// |n = 0 entries|. Lower is more noise-like.
double flatness_score(const CMat& r_xi);
double flatness_score(const CyclicSpectrum& spec);

/// CSV export, one row per (m, n) with columns m, n, re, im, magnitude_dB
/// (floor -80 dB); axis metadata in a comment header block.
void write_spectrum_csv(const CyclicSpectrum& spec, const std::string& path);
/// JSON export: axis metadata plus row-major [re, im] matrix.
void write_spectrum_json(const CyclicSpectrum& spec, const std::string& path);

}  // namespace isac

#endif  // ISAC_CYCLO_HPP
