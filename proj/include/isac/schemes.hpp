#ifndef ISAC_SCHEMES_HPP
#define ISAC_SCHEMES_HPP

#include <string>

#include "isac/solver.hpp"

namespace isac {

/// Fully-digital benchmark: same alternating design with F_RF pinned to the
/// identity (no constant-modulus constraint). Upper bound on the hybrid design.
BeamformerPair scheme_fd_isac(const Scenario& scenario, const DesignConstraints& constraints,
                              const OfdmSystemConfig& cfg, const SolverConfig& scfg);

/// Downlink-only benchmark: WMMSE + power, no mainlobe or nulling blocks.
BeamformerPair scheme_comm_only(const Scenario& scenario, const DesignConstraints& constraints,
                                const OfdmSystemConfig& cfg, const SolverConfig& scfg);

/// Sensing-only benchmark: nulling + power with a matched full-power start
/// toward the target; the communication MSE term and the mainlobe level cap
/// are absent, so all remaining power piles onto the target direction.
BeamformerPair scheme_radar_only(const Scenario& scenario, const DesignConstraints& constraints,
                                 const OfdmSystemConfig& cfg, const SolverConfig& scfg);

/// Two-stage benchmark: solve the fully-digital problem, then factorize the
/// resulting precoders into F_RF * F_k by alternating least squares (digital)
/// and per-entry phase coordinate descent (analog). Constraints are NOT
/// re-enforced after factorization. The squared factorization residual
/// sum_k ||X_k^FD - F_RF F_k||_F^2 is written to *factorization_residual when
/// the pointer is non-null.
BeamformerPair scheme_ts_hbf(const Scenario& scenario, const DesignConstraints& constraints,
                             const OfdmSystemConfig& cfg, const SolverConfig& scfg,
                             double* factorization_residual = nullptr);

/// Proposed design (all blocks active).
BeamformerPair scheme_proposed(const Scenario& scenario, const DesignConstraints& constraints,
                               const OfdmSystemConfig& cfg, const SolverConfig& scfg);

/// Dispatch by scheme name: proposed-hbf, comm-only-hbf, radar-only-hbf,
/// fd-isac, ts-hbf. Throws InvalidArgument on unknown names.
BeamformerPair run_scheme(const std::string& name, const Scenario& scenario,
                          const DesignConstraints& constraints, const OfdmSystemConfig& cfg,
                          const SolverConfig& scfg);

bool is_known_scheme(const std::string& name);

/// Scheme output with solver diagnostics retained (convergence trace of the
/// underlying solve; for ts-hbf this is the stage-1 FD trace plus the stage-2
/// factorization residual).
struct SchemeResult {
  BeamformerPair bf;
  ConvergenceTrace trace;
  bool converged = false;
  double factorization_residual = 0.0;
};

SchemeResult run_scheme_detailed(const std::string& name, const Scenario& scenario,
                                 const DesignConstraints& constraints,
                                 const OfdmSystemConfig& cfg, const SolverConfig& scfg);

}  // namespace isac

#endif  // ISAC_SCHEMES_HPP
