#ifndef ISAC_BEAMFORMER_HPP
#define ISAC_BEAMFORMER_HPP

#include <vector>

#include "isac/types.hpp"

namespace isac {

/// Analog beamformer F_RF (M_t x N_RF) plus K per-subcarrier digital
/// beamformers F_k (N_RF x U). When `analog_feasible` is true, F_RF is
/// materialized from a phase matrix so every entry has unit modulus;
/// relaxed intermediates (e.g. the fully-digital scheme) carry the flag
/// false and store F_RF directly.
struct BeamformerPair {
  CMat F_RF;                 // M_t x N_RF
  RMat frf_phase;            // phase parametrization; source of truth when analog_feasible
  std::vector<CMat> F_k;     // K matrices, N_RF x U
  bool analog_feasible = false;

  int num_tx() const { return static_cast<int>(F_RF.rows()); }
  int num_rf() const { return static_cast<int>(F_RF.cols()); }
  int num_subcarriers() const { return static_cast<int>(F_k.size()); }
  int num_users() const { return F_k.empty() ? 0 : static_cast<int>(F_k[0].cols()); }

  // Effective precoder X_k = F_RF * F_k (M_t x U), k = 1..K.
  CMat effective(int k) const { return F_RF * F_k[k - 1]; }

  void set_phases(const RMat& phases) {
    frf_phase = phases;
    F_RF.resize(phases.rows(), phases.cols());
    for (Eigen::Index i = 0; i < phases.rows(); ++i)
      for (Eigen::Index j = 0; j < phases.cols(); ++j)
        F_RF(i, j) = std::polar(1.0, phases(i, j));
    analog_feasible = true;
  }

  static BeamformerPair zero(int m_t, int n_rf, int k, int u) {
    BeamformerPair bf;
    bf.F_RF = CMat::Zero(m_t, n_rf);
    bf.F_k.assign(k, CMat::Zero(n_rf, u));
    return bf;
  }
};

}  // namespace isac

#endif  // ISAC_BEAMFORMER_HPP
