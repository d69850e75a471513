#ifndef ISAC_SOLVER_HPP
#define ISAC_SOLVER_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "isac/beamformer.hpp"
#include "isac/config.hpp"
#include "isac/types.hpp"

namespace isac {

/// WMMSE auxiliaries: per-(k,u) MMSE equalizer and weight 1/E.
struct WmmseAux {
  CMat kappa;   // K x U
  RMat omega;   // K x U
  RMat mse;     // K x U, E_{u,k} at the equalizer
};

/// Rate surrogate value (1/K) sum (log2 w - w E + 1); equals the SE when the
/// auxiliaries are at their optimum.
double wmmse_surrogate(const WmmseAux& aux);

/// Optimal (kappa, omega) for the current beamformer against the scenario's
/// (estimated) channels.
WmmseAux wmmse_aux_update(const BeamformerPair& bf, const Scenario& scenario,
                          const OfdmSystemConfig& cfg);

struct SolverConfig {
  double rho[4] = {1.0, 1.0, 1.0, 1.0};
  int max_iters = 500;
  double tol_residual = 1e-5;
  double tol_objective = 1e-6;
  double bisection_tol = 1e-10;
  int ccd_sweeps = 5;
  std::uint64_t seed = 1;

  void validate() const {
    for (double r : rho) require(r > 0.0, "penalties must be positive");
    require(max_iters >= 1, "max_iters must be >= 1");
    require(tol_residual > 0.0 && tol_objective > 0.0 && bisection_tol > 0.0,
            "tolerances must be positive");
    require(ccd_sweeps >= 1, "ccd_sweeps must be >= 1");
  }
};

/// Which blocks of the alternating scheme are active. The full design keeps
/// everything on; benchmark schemes switch parts off.
struct SolverOptions {
  bool mainlobe = true;    // V block (weighted mainlobe equality)
  bool nulling = true;     // G block (clutter nulling)
  bool comm = true;        // T block + WMMSE objective
  bool fixed_frf = false;  // fully-digital mode: F_RF = I_{M_t}, no CCD
};

struct SolverState {
  std::vector<CMat> Y;                  // K, M_t x U
  std::vector<std::vector<CMat>> V;     // K x M
  std::vector<std::vector<CMat>> G;     // K x S
  std::vector<std::vector<CMat>> T;     // K x U
  std::vector<CMat> D1;                 // K
  std::vector<std::vector<CMat>> D2, D3, D4;
  double rho[4] = {1.0, 1.0, 1.0, 1.0};
  BeamformerPair bf;
  WmmseAux aux;
  int iteration = 0;
  SolverOptions opts;

  int K() const { return static_cast<int>(Y.size()); }
};

struct ConvergenceTrace {
  std::vector<int> iter;
  std::vector<double> surrogate_se;
  std::vector<double> residual[4];
  std::vector<double> mainlobe_dbm;
  std::vector<double> max_null_dbm;
};

void write_trace_csv(const ConvergenceTrace& trace, const std::string& path);

/// Closed-form block updates of the augmented-Lagrangian scheme. Each update
/// mutates only its own block of `state`.
void update_Y(SolverState& state, const DesignConstraints& constraints,
              const OfdmSystemConfig& cfg, const SolverConfig& scfg);
void update_V(SolverState& state, const DesignConstraints& constraints,
              const OfdmSystemConfig& cfg, const Scenario& scenario);
void update_G(SolverState& state, const DesignConstraints& constraints,
              const OfdmSystemConfig& cfg, const Scenario& scenario, const SolverConfig& scfg);
void update_T(SolverState& state, const Scenario& scenario, const OfdmSystemConfig& cfg);
void update_Fk(SolverState& state);
void update_FRF(SolverState& state, const SolverConfig& scfg);
void update_duals(SolverState& state);

/// Normalized consensus mismatches (Eq.-style mean squared residuals); blocks
/// that are switched off report zero.
struct Residuals {
  double r[4] = {0.0, 0.0, 0.0, 0.0};
  double max() const { return std::max(std::max(r[0], r[1]), std::max(r[2], r[3])); }
};
Residuals residuals(const SolverState& state);

/// Augmented Lagrangian value at the current state (weighted MSE objective).
double augmented_lagrangian(const SolverState& state, const DesignConstraints& constraints,
                            const OfdmSystemConfig& cfg, const Scenario& scenario);

SolverState init_state(const Scenario& scenario, const DesignConstraints& constraints,
                       const OfdmSystemConfig& cfg, const SolverConfig& scfg,
                       const SolverOptions& opts);

/// Factorizes per-subcarrier target precoders into F_RF * F_k (unit-modulus
/// analog, least-squares digital, alternating until stall). Returns the final
/// squared residual sum_k ||X_k - F_RF F_k||_F^2.
double factorize_hybrid(const std::vector<CMat>& targets, const OfdmSystemConfig& cfg,
                        int num_users, std::uint64_t seed, BeamformerPair& bf);

struct SolveResult {
  BeamformerPair bf;
  ConvergenceTrace trace;
  bool converged = false;
};

/// Full alternating-optimization solve (the proposed design when all options
/// are on). Deterministic under (scenario, cfg, seed).
SolveResult solve(const Scenario& scenario, const DesignConstraints& constraints,
                  const OfdmSystemConfig& cfg, const SolverConfig& scfg,
                  const SolverOptions& opts = {});

}  // namespace isac

#endif  // ISAC_SOLVER_HPP
