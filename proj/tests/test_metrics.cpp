#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <random>

#include "isac/metrics.hpp"
#include "isac/signal_model.hpp"
#include "isac/solver.hpp"

using namespace isac;

namespace {

OfdmSystemConfig small_cfg() {
  OfdmSystemConfig cfg;
  cfg.M_t = 4;
  cfg.M_r = 4;
  cfg.N_RF = 2;
  cfg.K = 2;
  cfg.N = 4;
  cfg.validate();
  return cfg;
}

// Hand-built two-user scenario with unit basis-vector channels so the SINR
// terms can be read off directly.
Scenario basis_scenario(const OfdmSystemConfig& cfg, double sigma2_C) {
  Scenario sc;
  sc.theta_E = 26.0;
  sc.clutter_angles = {-30.0, 60.0};
  sc.sigma2_E_k.assign(cfg.K, 1e-7);
  sc.sigma2_i_k.assign(2, std::vector<double>(cfg.K, 1e-5));
  sc.sigma2_R = 1e-7;
  sc.sigma2_C = sigma2_C;
  sc.sigma2_Ez = 1e-7;
  sc.beta_k.assign(cfg.K, cdouble(1e-5, 0.0));
  sc.channels.assign(cfg.K, std::vector<CVec>(2));
  for (int k = 0; k < cfg.K; ++k)
    for (int u = 0; u < 2; ++u) {
      CVec h = CVec::Zero(cfg.M_t);
      h(u) = 1.0;
      sc.channels[k][u] = h;
    }
  return sc;
}

BeamformerPair random_bf(const OfdmSystemConfig& cfg, int users, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);
  std::normal_distribution<double> gauss(0.0, 1.0);
  BeamformerPair bf = BeamformerPair::zero(cfg.M_t, cfg.N_RF, cfg.K, users);
  RMat phases(cfg.M_t, cfg.N_RF);
  for (int i = 0; i < cfg.M_t; ++i)
    for (int j = 0; j < cfg.N_RF; ++j) phases(i, j) = phase(rng);
  bf.set_phases(phases);
  for (int k = 0; k < cfg.K; ++k)
    for (int j = 0; j < cfg.N_RF; ++j)
      for (int u = 0; u < users; ++u) bf.F_k[k](j, u) = cdouble(gauss(rng), gauss(rng));
  return bf;
}

}  // namespace

TEST_CASE("comm SINR on orthogonal users") {
  const OfdmSystemConfig cfg = small_cfg();
  const double sigma2 = 0.25;
  const Scenario sc = basis_scenario(cfg, sigma2);
  // X_k = diag-like: user u gets amplitude sqrt(sigma2) on its own basis entry
  BeamformerPair bf = BeamformerPair::zero(cfg.M_t, cfg.M_t, cfg.K, 2);
  bf.F_RF = CMat::Identity(cfg.M_t, cfg.M_t);
  for (int k = 0; k < cfg.K; ++k) {
    bf.F_k[k] = CMat::Zero(cfg.M_t, 2);
    bf.F_k[k](0, 0) = std::sqrt(sigma2);
    bf.F_k[k](1, 1) = std::sqrt(sigma2);
  }
  for (int k = 1; k <= cfg.K; ++k)
    for (int u = 1; u <= 2; ++u)
      CHECK(comm_sinr(bf, sc, cfg, k, u) == doctest::Approx(1.0).epsilon(1e-12));
  // SINR = 1 everywhere: SE = (1/K) * K * 2 * log2(2) = 2
  CHECK(spectral_efficiency(bf, sc, cfg) == doctest::Approx(2.0).epsilon(1e-12));

  const BeamformerPair zero = BeamformerPair::zero(cfg.M_t, cfg.N_RF, cfg.K, 2);
  CHECK(comm_sinr(zero, sc, cfg, 1, 1) == 0.0);
  CHECK(spectral_efficiency(zero, sc, cfg) == 0.0);
  CHECK_THROWS_AS(comm_sinr(bf, sc, cfg, 0, 1), InvalidArgument);
  CHECK_THROWS_AS(comm_sinr(bf, sc, cfg, 1, 3), InvalidArgument);
}

TEST_CASE("comm SINR grows strictly under a common power scale") {
  const OfdmSystemConfig cfg = small_cfg();
  const ScenarioSpec sspec;
  const Scenario sc = generate_channels(sspec, cfg, 77);
  for (int t = 0; t < 20; ++t) {
    BeamformerPair bf = random_bf(cfg, sspec.num_users, 200 + t);
    const double before = comm_sinr(bf, sc, cfg, 1, 1);
    for (auto& fk : bf.F_k) fk *= 2.0;
    CHECK(comm_sinr(bf, sc, cfg, 1, 1) > before);
  }
}

TEST_CASE("SE is invariant under per-column phase rotations") {
  const OfdmSystemConfig cfg = small_cfg();
  const ScenarioSpec sspec;
  const Scenario sc = generate_channels(sspec, cfg, 99);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);
  for (int t = 0; t < 20; ++t) {
    BeamformerPair bf = random_bf(cfg, sspec.num_users, 300 + t);
    const double se = spectral_efficiency(bf, sc, cfg);
    for (auto& fk : bf.F_k)
      for (Eigen::Index u = 0; u < fk.cols(); ++u)
        fk.col(u) *= std::polar(1.0, phase(rng));
    CHECK(spectral_efficiency(bf, sc, cfg) == doctest::Approx(se).epsilon(1e-12));
  }
}

TEST_CASE("transmit spectrum basics") {
  const OfdmSystemConfig cfg = small_cfg();
  const BeamformerPair zero = BeamformerPair::zero(cfg.M_t, cfg.N_RF, cfg.K, 2);
  CHECK(transmit_spectrum(zero, cfg, 15.0, 1) == 0.0);

  // X_k = sqrt(P) a(theta0) e_1^T radiates exactly P toward theta0
  const double P = 0.37;
  const double theta0 = 15.0;
  BeamformerPair bf = BeamformerPair::zero(cfg.M_t, cfg.M_t, cfg.K, 2);
  bf.F_RF = CMat::Identity(cfg.M_t, cfg.M_t);
  for (int k = 1; k <= cfg.K; ++k) {
    const CVec a = steering_vector(theta0, cfg.subcarrier_freq(k), cfg.M_t, cfg);
    bf.F_k[k - 1] = CMat::Zero(cfg.M_t, 2);
    bf.F_k[k - 1].col(0) = std::sqrt(P) * a;
  }
  CHECK(transmit_spectrum(bf, cfg, theta0, 1) == doctest::Approx(P).epsilon(1e-12));

  // right-multiplication by a unitary leaves the Frobenius response unchanged
  BeamformerPair rot = random_bf(cfg, 2, 17);
  const double before = transmit_spectrum(rot, cfg, 40.0, 2);
  CMat u(2, 2);
  const double s = 1.0 / std::sqrt(2.0);
  u << cdouble(s, 0), cdouble(0, s), cdouble(0, s), cdouble(s, 0);
  for (auto& fk : rot.F_k) fk *= u;
  CHECK(transmit_spectrum(rot, cfg, 40.0, 2) == doctest::Approx(before).epsilon(1e-12));
}

TEST_CASE("radar SINR normalization and clutter monotonicity") {
  const OfdmSystemConfig cfg = small_cfg();
  Scenario sc = basis_scenario(cfg, 1e-7);
  sc.clutter_angles.clear();
  sc.sigma2_i_k.clear();

  // no clutter and ||a^H X||^2 = sigma_R^2 / sigma_E^2 gives SINR = 1
  BeamformerPair bf = BeamformerPair::zero(cfg.M_t, cfg.M_t, cfg.K, 2);
  bf.F_RF = CMat::Identity(cfg.M_t, cfg.M_t);
  for (int k = 1; k <= cfg.K; ++k) {
    const CVec a = steering_vector(sc.theta_E, cfg.subcarrier_freq(k), cfg.M_t, cfg);
    bf.F_k[k - 1] = CMat::Zero(cfg.M_t, 2);
    bf.F_k[k - 1].col(0) = std::sqrt(sc.sigma2_R / sc.sigma2_E_k[k - 1]) * a;
  }
  CHECK(radar_sinr(bf, sc, cfg, 1) == doctest::Approx(1.0).epsilon(1e-12));

  // raising any clutter variance can only lower the SINR
  Scenario cluttered = basis_scenario(cfg, 1e-7);
  for (int t = 0; t < 20; ++t) {
    const BeamformerPair rnd = random_bf(cfg, 2, 400 + t);
    const double base = radar_sinr(rnd, cluttered, cfg, 1);
    Scenario worse = cluttered;
    worse.sigma2_i_k[t % 2][0] *= 10.0;
    CHECK(radar_sinr(rnd, worse, cfg, 1) <= base + 1e-15);
  }
}

TEST_CASE("IML sentinel and single-cell value") {
  OfdmSystemConfig cfg = small_cfg();
  cfg.K = 1;
  DesignConstraints cons;
  cons.mainlobe_grid = {15.0};
  cons.clutter_grid = {-30.0};
  cons.eta = 0.1;
  cons.zeta_k = {1e-3};
  cons.P_k = {1.0};
  cons.varpi_k = {1.0};

  const BeamformerPair zero = BeamformerPair::zero(cfg.M_t, cfg.N_RF, cfg.K, 2);
  CHECK(iml(zero, cons, cfg) == kDbmFloor);

  BeamformerPair bf = BeamformerPair::zero(cfg.M_t, cfg.M_t, cfg.K, 2);
  bf.F_RF = CMat::Identity(cfg.M_t, cfg.M_t);
  const CVec a = steering_vector(15.0, cfg.subcarrier_freq(1), cfg.M_t, cfg);
  bf.F_k[0] = CMat::Zero(cfg.M_t, 2);
  bf.F_k[0].col(0) = std::sqrt(1e-3) * a;  // 1 mW in the single grid cell
  CHECK(iml(bf, cons, cfg) == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("metrics report is finite and serializes") {
  const OfdmSystemConfig cfg = small_cfg();
  const ScenarioSpec sspec;
  const Scenario sc = generate_channels(sspec, cfg, 5);
  DesignConstraints cons;
  cons.mainlobe_grid = {21.0, 25.0, 29.0};
  cons.clutter_grid = {-30.0, 60.0};
  cons.eta = 0.1;
  cons.zeta_k.assign(cfg.K, 1e-3);
  cons.P_k.assign(cfg.K, 1.0);
  cons.varpi_k.assign(cfg.K, 1.0);

  const BeamformerPair bf = random_bf(cfg, sspec.num_users, 23);
  const MetricsReport rep = evaluate_metrics(bf, sc, cons, cfg, {-90.0, 0.0, 90.0});
  CHECK(std::isfinite(rep.se));
  CHECK(std::isfinite(rep.iml_dbm));
  CHECK(std::isfinite(rep.p_intercept));
  CHECK(std::isfinite(rep.flatness));
  REQUIRE(rep.sinr_radar_k.size() == static_cast<size_t>(cfg.K));
  REQUIRE(rep.spectrum.size() == 3);
  for (const auto& row : rep.spectrum)
    for (double v : row) CHECK(v >= 0.0);

  write_metrics_json(rep, "metrics_test.json");
  write_spectrum_map_csv(rep, cfg, "spectrum_test.csv");
  std::FILE* f = std::fopen("metrics_test.json", "r");
  REQUIRE(f != nullptr);
  std::fclose(f);
  std::remove("metrics_test.json");
  std::remove("spectrum_test.csv");
}

TEST_CASE("SE equals the WMMSE surrogate at the optimal auxiliaries") {
  const OfdmSystemConfig cfg = small_cfg();
  const ScenarioSpec sspec;
  for (int t = 0; t < 25; ++t) {
    const Scenario sc = generate_channels(sspec, cfg, 600 + t);
    const BeamformerPair bf = random_bf(cfg, sspec.num_users, 700 + t);
    const WmmseAux aux = wmmse_aux_update(bf, sc, cfg);
    CHECK(std::abs(spectral_efficiency(bf, sc, cfg) - wmmse_surrogate(aux)) < 1e-10);
  }
}
