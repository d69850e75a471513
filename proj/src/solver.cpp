#include "isac/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <iostream>
#include <random>

#include "isac/metrics.hpp"
#include "isac/signal_model.hpp"

namespace isac {

namespace {

// Sum of squared Frobenius mismatches between a block family and a reference.
double mismatch(const std::vector<std::vector<CMat>>& block, const std::vector<CMat>& ref) {
  double s = 0.0;
  for (size_t k = 0; k < block.size(); ++k)
    for (const CMat& b : block[k]) s += (b - ref[k]).squaredNorm();
  return s;
}

}  // namespace

double wmmse_surrogate(const WmmseAux& aux) {
  if (aux.omega.size() == 0) return 0.0;
  double s = 0.0;
  for (Eigen::Index k = 0; k < aux.omega.rows(); ++k)
    for (Eigen::Index u = 0; u < aux.omega.cols(); ++u)
      s += std::log2(aux.omega(k, u)) - aux.omega(k, u) * aux.mse(k, u) + 1.0;
  return s / static_cast<double>(aux.omega.rows());
}

WmmseAux wmmse_aux_update(const BeamformerPair& bf, const Scenario& scenario,
                          const OfdmSystemConfig& cfg) {
  const int U = scenario.num_users();
  WmmseAux aux;
  aux.kappa = CMat::Zero(cfg.K, U);
  aux.omega = RMat::Ones(cfg.K, U);
  aux.mse = RMat::Ones(cfg.K, U);
  for (int k = 1; k <= cfg.K; ++k) {
    const CMat x = bf.effective(k);
    for (int u = 1; u <= U; ++u) {
      const CRow rx = scenario.channel(k, u).adjoint() * x;
      const double denom = rx.squaredNorm() + scenario.sigma2_C;
      if (denom <= 0.0)
        throw std::domain_error("wmmse_aux_update: zero signal with zero noise power");
      const cdouble kappa = std::conj(rx(u - 1)) / denom;
      const double mse = 1.0 - std::norm(rx(u - 1)) / denom;
      aux.kappa(k - 1, u - 1) = kappa;
      aux.mse(k - 1, u - 1) = mse;
      aux.omega(k - 1, u - 1) = 1.0 / mse;
    }
  }
  return aux;
}

void update_Y(SolverState& state, const DesignConstraints& constraints,
              const OfdmSystemConfig& cfg, const SolverConfig& scfg) {
  const int M = state.opts.mainlobe ? constraints.M() : 0;
  const int S = state.opts.nulling ? constraints.S() : 0;
  const int U = state.opts.comm ? state.bf.num_users() : 0;
  const double c = state.rho[0] + M * state.rho[1] + S * state.rho[2] + U * state.rho[3];
  for (int k = 1; k <= state.K(); ++k) {
    CMat b = state.rho[0] * (state.bf.effective(k) - state.D1[k - 1]);
    for (int m = 0; m < M; ++m) b += state.rho[1] * (state.V[k - 1][m] + state.D2[k - 1][m]);
    for (int s = 0; s < S; ++s) b += state.rho[2] * (state.G[k - 1][s] + state.D3[k - 1][s]);
    for (int u = 0; u < U; ++u) b += state.rho[3] * (state.T[k - 1][u] + state.D4[k - 1][u]);
    const double budget = constraints.P_k[k - 1];
    const double bnorm2 = b.squaredNorm();
    if (bnorm2 <= 0.0) {
      // degenerate pull: any full-power point is optimal; pick a fixed one
      CMat y = CMat::Zero(state.Y[k - 1].rows(), state.Y[k - 1].cols());
      y(0, 0) = std::sqrt(budget);
      state.Y[k - 1] = y;
      continue;
    }
    // full-power equality: ||Y(chi)||^2 = ||B||^2 / (c + 2 chi)^2 = P_k, with
    // chi in (-c/2, inf); the left side is decreasing, so bisection applies
    double lo, hi;
    if (bnorm2 / (c * c) > budget) {
      lo = 0.0;
      hi = 1.0;
      while (bnorm2 / std::pow(c + 2.0 * hi, 2) > budget) hi *= 2.0;
    } else {
      lo = -0.5 * c * (1.0 - 1e-14);
      hi = 0.0;
    }
    for (int it = 0; it < 500; ++it) {
      const double mid = 0.5 * (lo + hi);
      const double val = bnorm2 / std::pow(c + 2.0 * mid, 2);
      if (val > budget)
        lo = mid;
      else
        hi = mid;
      if (std::abs(val - budget) <= scfg.bisection_tol * std::max(1.0, budget)) break;
    }
    state.Y[k - 1] = b / (c + 2.0 * (0.5 * (lo + hi)));
  }
}

void update_V(SolverState& state, const DesignConstraints& constraints,
              const OfdmSystemConfig& cfg, const Scenario& scenario) {
  if (!state.opts.mainlobe) return;
  const int U = state.bf.num_users();
  for (int k = 1; k <= state.K(); ++k) {
    const double target = std::sqrt(constraints.eta / constraints.varpi_k[k - 1]);
    for (int m = 0; m < constraints.M(); ++m) {
      const CVec a = steering_vector(constraints.mainlobe_grid[m], cfg.subcarrier_freq(k),
                                     cfg.M_t, cfg);
      const CMat z = state.Y[k - 1] - state.D2[k - 1][m];
      const CRow w = a.adjoint() * z;
      const double nw = w.norm();
      if (nw < 1e-15 * std::max(1.0, z.norm())) {
        // the mainlobe equality cannot be met by scaling; inject a rank-1
        // component along the steering direction
        CRow u0 = CRow::Zero(U);
        u0(0) = 1.0;
        state.V[k - 1][m] = z + target * a * u0;
      } else {
        state.V[k - 1][m] = z + a * ((target / nw - 1.0) * w);
      }
    }
  }
}

void update_G(SolverState& state, const DesignConstraints& constraints,
              const OfdmSystemConfig& cfg, const Scenario& scenario, const SolverConfig& scfg) {
  if (!state.opts.nulling) return;
  for (int k = 1; k <= state.K(); ++k) {
    const double zeta = constraints.zeta_k[k - 1];
    for (int s = 0; s < constraints.S(); ++s) {
      const CVec a = steering_vector(constraints.clutter_grid[s], cfg.subcarrier_freq(k),
                                     cfg.M_t, cfg);
      const CMat z = state.Y[k - 1] - state.D3[k - 1][s];
      const CRow w = a.adjoint() * z;
      const double wn2 = w.squaredNorm();
      if (wn2 <= zeta) {
        state.G[k - 1][s] = z;  // multiplier zero
        continue;
      }
      if (zeta == 0.0) {
        state.G[k - 1][s] = z - a * w;  // exact null-space projection
        continue;
      }
      // ||a^H G(lambda)||^2 = ||w||^2 / (1 + lambda)^2 = zeta
      double lo = 0.0, hi = 1.0;
      while (wn2 / std::pow(1.0 + hi, 2) > zeta) hi *= 2.0;
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double val = wn2 / std::pow(1.0 + mid, 2);
        if (val > zeta)
          lo = mid;
        else
          hi = mid;
        if (std::abs(val - zeta) <= scfg.bisection_tol * std::max(1.0, zeta)) break;
      }
      const double lambda = 0.5 * (lo + hi);
      state.G[k - 1][s] = z - a * ((lambda / (1.0 + lambda)) * w);
    }
  }
}

void update_T(SolverState& state, const Scenario& scenario, const OfdmSystemConfig& cfg) {
  if (!state.opts.comm) return;
  const double rho4 = state.rho[3];
  for (int k = 1; k <= state.K(); ++k) {
    for (int u = 1; u <= state.bf.num_users(); ++u) {
      const CVec& h = scenario.channel(k, u);
      const cdouble kappa = state.aux.kappa(k - 1, u - 1);
      const double c = 2.0 * std::norm(kappa);
      CMat rhs = rho4 * (state.Y[k - 1] - state.D4[k - 1][u - 1]);
      rhs.col(u - 1) += 2.0 * std::conj(kappa) * h;
      // rank-1 inverse: (c h h^H + rho4 I)^{-1} rhs
      const CRow hr = h.adjoint() * rhs;
      state.T[k - 1][u - 1] = (rhs - h * ((c / (rho4 + c * h.squaredNorm())) * hr)) / rho4;
    }
  }
}

void update_Fk(SolverState& state) {
  for (int k = 1; k <= state.K(); ++k) {
    const CMat z = state.Y[k - 1] + state.D1[k - 1];
    if (state.opts.fixed_frf) {
      state.bf.F_k[k - 1] = z;  // F_RF = I
      continue;
    }
    CMat gram = state.bf.F_RF.adjoint() * state.bf.F_RF;
    Eigen::FullPivLU<CMat> lu(gram);
    if (!lu.isInvertible()) {
      std::cerr << "update_Fk: rank-deficient analog beamformer, regularized solve\n";
      gram += 1e-10 * CMat::Identity(gram.rows(), gram.cols());
      lu.compute(gram);
    }
    state.bf.F_k[k - 1] = lu.solve(state.bf.F_RF.adjoint() * z);
  }
}

void update_FRF(SolverState& state, const SolverConfig& scfg) {
  if (state.opts.fixed_frf) return;
  const int K = state.K();
  const int rows = state.bf.num_tx();
  const int cols = state.bf.num_rf();
  std::vector<CMat> resid(K);  // Z_k - F_RF F_k, maintained incrementally
  RVec q = RVec::Zero(cols);   // sum_k [F_k F_k^H]_{jj}
  for (int k = 0; k < K; ++k) {
    resid[k] = state.Y[k] + state.D1[k] - state.bf.F_RF * state.bf.F_k[k];
    for (int j = 0; j < cols; ++j) q(j) += state.bf.F_k[k].row(j).squaredNorm();
  }
  for (int sweep = 0; sweep < scfg.ccd_sweeps; ++sweep) {
    for (int i = 0; i < rows; ++i) {
      for (int j = 0; j < cols; ++j) {
        cdouble g = 0.0;
        for (int k = 0; k < K; ++k)
          g += (resid[k].row(i) * state.bf.F_k[k].row(j).adjoint())(0);
        const cdouble old = state.bf.F_RF(i, j);
        g += old * q(j);
        if (std::abs(g) == 0.0) continue;  // tie-break: keep previous phase
        const double phase = std::arg(g);
        state.bf.frf_phase(i, j) = phase;
        const cdouble neu = std::polar(1.0, phase);
        state.bf.F_RF(i, j) = neu;
        for (int k = 0; k < K; ++k) resid[k].row(i) -= (neu - old) * state.bf.F_k[k].row(j);
      }
    }
  }
}

void update_duals(SolverState& state) {
  for (int k = 1; k <= state.K(); ++k) {
    state.D1[k - 1] += state.Y[k - 1] - state.bf.effective(k);
    for (size_t m = 0; m < state.V[k - 1].size(); ++m)
      state.D2[k - 1][m] += state.V[k - 1][m] - state.Y[k - 1];
    for (size_t s = 0; s < state.G[k - 1].size(); ++s)
      state.D3[k - 1][s] += state.G[k - 1][s] - state.Y[k - 1];
    for (size_t u = 0; u < state.T[k - 1].size(); ++u)
      state.D4[k - 1][u] += state.T[k - 1][u] - state.Y[k - 1];
  }
}

Residuals residuals(const SolverState& state) {
  Residuals res;
  const int K = state.K();
  double r1 = 0.0;
  for (int k = 1; k <= K; ++k) r1 += (state.Y[k - 1] - state.bf.effective(k)).squaredNorm();
  res.r[0] = r1 / K;
  if (state.opts.mainlobe && !state.V[0].empty())
    res.r[1] = mismatch(state.V, state.Y) / (K * static_cast<double>(state.V[0].size()));
  if (state.opts.nulling && !state.G[0].empty())
    res.r[2] = mismatch(state.G, state.Y) / (K * static_cast<double>(state.G[0].size()));
  if (state.opts.comm && !state.T[0].empty())
    res.r[3] = mismatch(state.T, state.Y) / (K * static_cast<double>(state.T[0].size()));
  return res;
}

double augmented_lagrangian(const SolverState& state, const DesignConstraints& constraints,
                            const OfdmSystemConfig& cfg, const Scenario& scenario) {
  double al = 0.0;
  if (state.opts.comm) {
    for (int k = 1; k <= state.K(); ++k)
      for (int u = 1; u <= state.bf.num_users(); ++u) {
        const CVec& h = scenario.channel(k, u);
        const cdouble kappa = state.aux.kappa(k - 1, u - 1);
        const CMat& t = state.T[k - 1][u - 1];
        const CRow rx = h.adjoint() * t;
        const double mse = std::norm(kappa) * (rx.squaredNorm() + scenario.sigma2_C) -
                           2.0 * std::real(kappa * rx(u - 1)) + 1.0;
        al += mse;
      }
  }
  for (int k = 1; k <= state.K(); ++k) {
    al += 0.5 * state.rho[0] *
          (state.Y[k - 1] - state.bf.effective(k) + state.D1[k - 1]).squaredNorm();
    for (size_t m = 0; m < state.V[k - 1].size(); ++m)
      al += 0.5 * state.rho[1] *
            (state.V[k - 1][m] - state.Y[k - 1] + state.D2[k - 1][m]).squaredNorm();
    for (size_t s = 0; s < state.G[k - 1].size(); ++s)
      al += 0.5 * state.rho[2] *
            (state.G[k - 1][s] - state.Y[k - 1] + state.D3[k - 1][s]).squaredNorm();
    for (size_t u = 0; u < state.T[k - 1].size(); ++u)
      al += 0.5 * state.rho[3] *
            (state.T[k - 1][u] - state.Y[k - 1] + state.D4[k - 1][u]).squaredNorm();
  }
  return al;
}

namespace {
double factorize_from_start(const std::vector<CMat>& targets, const OfdmSystemConfig& cfg,
                            BeamformerPair& bf);
}  // namespace

double factorize_hybrid(const std::vector<CMat>& targets, const OfdmSystemConfig& cfg,
                        int num_users, std::uint64_t seed, BeamformerPair& bf) {
  const int K = static_cast<int>(targets.size());
  // the alternating fit lands in bad local optima from some starts; restart a
  // few times and keep the best. First start comes from the dominant shared
  // subspace of the targets, the rest are random phases.
  constexpr int kRestarts = 8;
  double best = std::numeric_limits<double>::infinity();
  BeamformerPair best_bf;
  CMat stacked(cfg.M_t, K * targets[0].cols());
  for (int k = 0; k < K; ++k)
    stacked.middleCols(k * targets[0].cols(), targets[0].cols()) = targets[k];
  Eigen::JacobiSVD<CMat> svd(stacked, Eigen::ComputeThinU);
  for (int restart = 0; restart < kRestarts; ++restart) {
    bf = BeamformerPair::zero(cfg.M_t, cfg.N_RF, K, num_users);
    std::mt19937_64 rng(derive_seed(seed, 13 + restart));
    std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);
    RMat phases(cfg.M_t, cfg.N_RF);
    for (int i = 0; i < cfg.M_t; ++i)
      for (int j = 0; j < cfg.N_RF; ++j) {
        const cdouble u = (restart == 0 && j < svd.matrixU().cols()) ? svd.matrixU()(i, j)
                                                                     : cdouble(0.0);
        phases(i, j) = std::abs(u) > 0.0 ? std::arg(u) : phase(rng);
      }
    bf.set_phases(phases);
    const double r = factorize_from_start(targets, cfg, bf);
    if (r < best) {
      best = r;
      best_bf = bf;
    }
  }
  bf = best_bf;
  return best;
}

namespace {

double factorize_from_start(const std::vector<CMat>& targets, const OfdmSystemConfig& cfg,
                            BeamformerPair& bf) {
  const int K = static_cast<int>(targets.size());
  auto residual_now = [&]() {
    double r = 0.0;
    for (int k = 1; k <= K; ++k) r += (targets[k - 1] - bf.effective(k)).squaredNorm();
    return r;
  };

  double prev = std::numeric_limits<double>::infinity();
  for (int sweep = 0; sweep < 200; ++sweep) {
    // digital stage: least squares against the target
    const CMat gram = bf.F_RF.adjoint() * bf.F_RF;
    const Eigen::LDLT<CMat> ldlt(gram);
    for (int k = 1; k <= K; ++k)
      bf.F_k[k - 1] = ldlt.solve(bf.F_RF.adjoint() * targets[k - 1]);

    // analog stage: per-entry phase alignment
    std::vector<CMat> resid(K);
    RVec q = RVec::Zero(cfg.N_RF);
    for (int k = 0; k < K; ++k) {
      resid[k] = targets[k] - bf.F_RF * bf.F_k[k];
      for (int j = 0; j < cfg.N_RF; ++j) q(j) += bf.F_k[k].row(j).squaredNorm();
    }
    for (int i = 0; i < cfg.M_t; ++i)
      for (int j = 0; j < cfg.N_RF; ++j) {
        cdouble g = 0.0;
        for (int k = 0; k < K; ++k) g += (resid[k].row(i) * bf.F_k[k].row(j).adjoint())(0);
        const cdouble old = bf.F_RF(i, j);
        g += old * q(j);
        if (std::abs(g) == 0.0) continue;  // tie-break: keep previous phase
        const double ph = std::arg(g);
        bf.frf_phase(i, j) = ph;
        const cdouble neu = std::polar(1.0, ph);
        bf.F_RF(i, j) = neu;
        for (int k = 0; k < K; ++k) resid[k].row(i) -= (neu - old) * bf.F_k[k].row(j);
      }

    const double r = residual_now();
    if (prev - r < 1e-12 * std::max(1.0, prev)) {
      prev = r;
      break;
    }
    prev = r;
  }
  return prev;
}

}  // namespace

static SolveResult solve_with_state(const Scenario& scenario, const DesignConstraints& constraints,
                                    const OfdmSystemConfig& cfg, const SolverConfig& scfg,
                                    const SolverOptions& opts, SolverState* final_state);

SolverState init_state(const Scenario& scenario, const DesignConstraints& constraints,
                       const OfdmSystemConfig& cfg, const SolverConfig& scfg,
                       const SolverOptions& opts) {
  const int U = scenario.num_users();
  SolverState st;
  st.opts = opts;
  for (int i = 0; i < 4; ++i) st.rho[i] = scfg.rho[i];

  std::mt19937_64 rng(derive_seed(scfg.seed, 11));
  std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);

  const int n_rf = opts.fixed_frf ? cfg.M_t : cfg.N_RF;
  st.bf = BeamformerPair::zero(cfg.M_t, n_rf, cfg.K, U);
  bool have_fk = false;
  if (opts.fixed_frf) {
    st.bf.F_RF = CMat::Identity(cfg.M_t, cfg.M_t);
    st.bf.analog_feasible = false;
  } else if (opts.comm) {
    // warm start from the converged fully-digital state: keep its consensus
    // blocks and duals, factorize Y into the hybrid pair. Only the hybrid
    // consensus (residual 1) is violated at the start, which cuts the
    // iterations to consensus by a large factor versus a cold random start.
    SolverOptions fd_opts = opts;
    fd_opts.fixed_frf = true;
    SolverState fd_state;
    solve_with_state(scenario, constraints, cfg, scfg, fd_opts, &fd_state);
    factorize_hybrid(fd_state.Y, cfg, U, scfg.seed, st.bf);
    st.Y = std::move(fd_state.Y);
    st.V = std::move(fd_state.V);
    st.G = std::move(fd_state.G);
    st.T = std::move(fd_state.T);
    st.D2 = std::move(fd_state.D2);
    st.D3 = std::move(fd_state.D3);
    st.D4 = std::move(fd_state.D4);
    st.D1.assign(cfg.K, CMat::Zero(cfg.M_t, U));
    st.aux = wmmse_aux_update(st.bf, scenario, cfg);
    return st;
  } else {
    RMat phases(cfg.M_t, cfg.N_RF);
    for (int i = 0; i < cfg.M_t; ++i)
      for (int j = 0; j < cfg.N_RF; ++j) phases(i, j) = phase(rng);
    st.bf.set_phases(phases);
  }

  if (!have_fk) {
    // pseudo-matched start: match users when communicating, the target otherwise
    for (int k = 1; k <= cfg.K; ++k) {
      CMat fk(n_rf, U);
      for (int u = 1; u <= U; ++u) {
        const CVec dir = opts.comm
                             ? scenario.channel(k, u)
                             : CVec(steering_vector(scenario.theta_E, cfg.subcarrier_freq(k),
                                                    cfg.M_t, cfg));
        fk.col(u - 1) = st.bf.F_RF.adjoint() * dir;
      }
      const double norm2 = (st.bf.F_RF * fk).squaredNorm();
      if (norm2 > 0.0) fk *= std::sqrt(constraints.P_k[k - 1] / norm2);
      st.bf.F_k[k - 1] = fk;
    }
  }

  st.Y.resize(cfg.K);
  st.D1.assign(cfg.K, CMat::Zero(cfg.M_t, U));
  const int M = opts.mainlobe ? constraints.M() : 0;
  const int S = opts.nulling ? constraints.S() : 0;
  const int nT = opts.comm ? U : 0;
  st.V.assign(cfg.K, {});
  st.G.assign(cfg.K, {});
  st.T.assign(cfg.K, {});
  st.D2.assign(cfg.K, {});
  st.D3.assign(cfg.K, {});
  st.D4.assign(cfg.K, {});
  for (int k = 1; k <= cfg.K; ++k) {
    const CMat x = st.bf.effective(k);
    st.Y[k - 1] = x;
    st.V[k - 1].assign(M, x);
    st.G[k - 1].assign(S, x);
    st.T[k - 1].assign(nT, x);
    st.D2[k - 1].assign(M, CMat::Zero(cfg.M_t, U));
    st.D3[k - 1].assign(S, CMat::Zero(cfg.M_t, U));
    st.D4[k - 1].assign(nT, CMat::Zero(cfg.M_t, U));
  }
  st.aux = wmmse_aux_update(st.bf, scenario, cfg);
  return st;
}

namespace {

double mainlobe_level_dbm(const BeamformerPair& bf, const DesignConstraints& constraints,
                          const OfdmSystemConfig& cfg) {
  if (constraints.mainlobe_grid.empty()) return kDbmFloor;
  double sum = 0.0;
  int count = 0;
  for (int k = 1; k <= cfg.K; ++k)
    for (double theta : constraints.mainlobe_grid) {
      sum += constraints.varpi_k[k - 1] * transmit_spectrum(bf, cfg, theta, k);
      ++count;
    }
  const double mean = sum / count;
  return mean > dbm_to_watt(kDbmFloor) ? watt_to_dbm(mean) : kDbmFloor;
}

double max_null_level_dbm(const BeamformerPair& bf, const DesignConstraints& constraints,
                          const OfdmSystemConfig& cfg) {
  if (constraints.clutter_grid.empty()) return kDbmFloor;
  double peak = 0.0;
  for (int k = 1; k <= cfg.K; ++k)
    for (double theta : constraints.clutter_grid)
      peak = std::max(peak, transmit_spectrum(bf, cfg, theta, k));
  return peak > dbm_to_watt(kDbmFloor) ? watt_to_dbm(peak) : kDbmFloor;
}

bool state_finite(const SolverState& st) {
  for (const CMat& y : st.Y)
    if (!y.allFinite()) return false;
  for (const CMat& f : st.bf.F_k)
    if (!f.allFinite()) return false;
  return st.bf.F_RF.allFinite();
}

}  // namespace

static SolveResult solve_with_state(const Scenario& scenario, const DesignConstraints& constraints,
                                    const OfdmSystemConfig& cfg, const SolverConfig& scfg,
                                    const SolverOptions& opts, SolverState* final_state) {
  cfg.validate();
  scenario.validate(cfg);
  constraints.validate(cfg);
  scfg.validate();

  if (opts.mainlobe) {
    for (int k = 1; k <= cfg.K; ++k)
      if (constraints.eta / constraints.varpi_k[k - 1] >
          cfg.M_t * constraints.P_k[k - 1] * (1.0 + 1e-12))
        throw InfeasibleProblem("mainlobe level unreachable under the power budget at subcarrier " +
                                std::to_string(k));
  }

  SolverState st = init_state(scenario, constraints, cfg, scfg, opts);
  SolveResult out;
  int consecutive_ok = 0;
  for (st.iteration = 1; st.iteration <= scfg.max_iters; ++st.iteration) {
    if (opts.comm) st.aux = wmmse_aux_update(st.bf, scenario, cfg);
    update_Y(st, constraints, cfg, scfg);
    update_V(st, constraints, cfg, scenario);
    update_G(st, constraints, cfg, scenario, scfg);
    update_T(st, scenario, cfg);
    update_Fk(st);
    update_FRF(st, scfg);
    update_duals(st);

    if (!state_finite(st))
      throw std::runtime_error("solver diverged: non-finite iterate at iteration " +
                               std::to_string(st.iteration));

    const Residuals res = residuals(st);
    const double surrogate =
        opts.comm ? wmmse_surrogate(wmmse_aux_update(st.bf, scenario, cfg)) : 0.0;
    out.trace.iter.push_back(st.iteration);
    out.trace.surrogate_se.push_back(surrogate);
    for (int i = 0; i < 4; ++i) out.trace.residual[i].push_back(res.r[i]);
    out.trace.mainlobe_dbm.push_back(mainlobe_level_dbm(st.bf, constraints, cfg));
    out.trace.max_null_dbm.push_back(max_null_level_dbm(st.bf, constraints, cfg));

    if (res.max() < scfg.tol_residual)
      ++consecutive_ok;
    else
      consecutive_ok = 0;
    // residual consensus alone can leave X a few tenths of a dB off the
    // mainlobe/null targets; keep iterating until the levels themselves are
    // inside a 0.05 dB window
    bool levels_ok = true;
    if (opts.mainlobe)
      levels_ok = std::fabs(out.trace.mainlobe_dbm.back() - watt_to_dbm(constraints.eta)) <= 0.05;
    if (opts.nulling && levels_ok) {
      const double zmin = *std::min_element(constraints.zeta_k.begin(), constraints.zeta_k.end());
      levels_ok = dbm_to_watt(out.trace.max_null_dbm.back()) <= zmin * 1.0116 + 1e-15;
    }
    if (consecutive_ok >= 5 && levels_ok) {
      out.converged = true;
      break;
    }
  }
  out.bf = st.bf;
  if (final_state) *final_state = std::move(st);
  return out;
}

SolveResult solve(const Scenario& scenario, const DesignConstraints& constraints,
                  const OfdmSystemConfig& cfg, const SolverConfig& scfg,
                  const SolverOptions& opts) {
  return solve_with_state(scenario, constraints, cfg, scfg, opts, nullptr);
}

void write_trace_csv(const ConvergenceTrace& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "iter,surrogate_SE,res1,res2,res3,res4,mainlobe_dBm,max_null_dBm\n";
  char buf[256];
  for (size_t i = 0; i < trace.iter.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                  trace.iter[i], trace.surrogate_se[i], trace.residual[0][i], trace.residual[1][i],
                  trace.residual[2][i], trace.residual[3][i], trace.mainlobe_dbm[i],
                  trace.max_null_dbm[i]);
    out << buf;
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace isac
