#include "isac/cyclo.hpp"

#include <cstdio>
#include <fstream>
#include <random>

#include <json.hpp>

#include "isac/signal_model.hpp"

namespace isac {

CyclicSpectrum CyclicSpectrum::zeros(const OfdmSystemConfig& cfg) {
  CyclicSpectrum s;
  s.W = cfg.W;
  s.f_s = cfg.N * cfg.delta_f();
  for (int m = 0; m <= cfg.N - cfg.W; ++m) s.m_set.push_back(m);
  for (int n = 0; n <= cfg.N - cfg.W; n += 2) s.n_set.push_back(n);
  s.values = CMat::Zero(static_cast<Eigen::Index>(s.m_set.size()),
                        static_cast<Eigen::Index>(s.n_set.size()));
  return s;
}

int CyclicSpectrum::n_index(int n) const {
  for (size_t i = 0; i < n_set.size(); ++i)
    if (n_set[i] == n) return static_cast<int>(i);
  throw InvalidArgument("cyclic index n not in the spectrum's n-set");
}

cdouble CyclicSpectrum::at(int m, int n) const { return values(m, n_index(n)); }

SelectorMatrix selector_matrix(int m, int n, int N, int W) {
  require(N >= 1 && W >= 1 && W <= N, "selector_matrix: require N >= W >= 1");
  require(n % 2 == 0, "selector_matrix: cyclic index n must be even");
  require(m >= 0 && m <= N - W, "selector_matrix: m out of range");
  require(n >= 0 && n <= N - W, "selector_matrix: n out of range");
  SelectorMatrix sel;
  sel.values = CMat::Zero(N, N);
  const double wgt = 1.0 / W;
  const int w0 = -(W / 2);
  for (int w = w0; w < w0 + W; ++w) {
    // conj(rhat(m - n/2 + w)) * rhat(m + n/2 + w); DFT bins wrap mod N
    const int row = ((m - n / 2 + w) % N + N) % N;
    const int col = ((m + n / 2 + w) % N + N) % N;
    sel.values(row, col) += wgt;
  }
  return sel;
}

namespace {

std::vector<CMat> selector_set(const OfdmSystemConfig& cfg, const CyclicSpectrum& layout) {
  std::vector<CMat> sels;
  sels.reserve(layout.m_set.size() * layout.n_set.size());
  for (int m : layout.m_set)
    for (int n : layout.n_set)
      sels.push_back(selector_matrix(m, n, cfg.N, cfg.W).values);
  return sels;
}

}  // namespace

CVec intercept_signal(const BeamformerPair& bf, const Scenario& scenario,
                      const OfdmSystemConfig& cfg, std::uint64_t noise_seed) {
  require(bf.num_subcarriers() == cfg.K && static_cast<int>(scenario.beta_k.size()) == cfg.K,
          "intercept_signal: beamformer/scenario must span K subcarriers");
  require(bf.num_tx() == cfg.M_t, "intercept_signal: beamformer antenna count mismatch");
  std::mt19937_64 rng(derive_seed(noise_seed, 7));
  std::uniform_int_distribution<int> bit(0, 1);
  std::normal_distribution<double> gauss(0.0, 1.0);

  CVec r = CVec::Zero(cfg.N);
  for (int k = 1; k <= cfg.K; ++k) {
    const CRow row =
        steering_vector(scenario.theta_E, cfg.subcarrier_freq(k), cfg.M_t, cfg).adjoint() *
        bf.effective(k);
    CVec s(row.size());
    for (Eigen::Index u = 0; u < s.size(); ++u) s(u) = bit(rng) ? 1.0 : -1.0;
    const cdouble payload = (row * s)(0);
    r += scenario.beta_k[k - 1] * payload * tone_vector(cfg.subcarrier_freq(k), cfg);
  }
  const double ns = std::sqrt(scenario.sigma2_Ez / 2.0);
  for (int n = 0; n < cfg.N; ++n) r(n) += cdouble(ns * gauss(rng), ns * gauss(rng));
  return r;
}

std::vector<double> intercept_subcarrier_powers(const BeamformerPair& bf,
                                                const Scenario& scenario,
                                                const OfdmSystemConfig& cfg) {
  std::vector<double> c2(cfg.K);
  for (int k = 1; k <= cfg.K; ++k) {
    const CRow row =
        steering_vector(scenario.theta_E, cfg.subcarrier_freq(k), cfg.M_t, cfg).adjoint() *
        bf.effective(k);
    c2[k - 1] = std::norm(scenario.beta_k[k - 1]) * row.squaredNorm();
  }
  return c2;
}

double intercepted_power(const BeamformerPair& bf, const Scenario& scenario,
                         const OfdmSystemConfig& cfg) {
  const std::vector<double> c2 = intercept_subcarrier_powers(bf, scenario, cfg);
  double p = cfg.K * scenario.sigma2_Ez;
  for (double c : c2) p += c;
  return p;
}

CyclicSpectrum cyclic_spectrum(const CVec& r, const OfdmSystemConfig& cfg) {
  require(r.size() == cfg.N, "cyclic_spectrum: signal length must equal N");
  CyclicSpectrum spec = CyclicSpectrum::zeros(cfg);
  const CVec rhat = fft_matrix(cfg.N) * r;
  size_t idx = 0;
  static thread_local std::vector<CMat> cache;
  static thread_local int cache_n = -1, cache_w = -1;
  if (cache_n != cfg.N || cache_w != cfg.W) {
    cache = selector_set(cfg, spec);
    cache_n = cfg.N;
    cache_w = cfg.W;
  }
  for (size_t mi = 0; mi < spec.m_set.size(); ++mi)
    for (size_t ni = 0; ni < spec.n_set.size(); ++ni)
      spec.values(mi, ni) = (rhat.adjoint() * cache[idx++] * rhat)(0);
  return spec;
}

CMat r_xi_matrix(const std::vector<double>& c2, const OfdmSystemConfig& cfg) {
  require(static_cast<int>(c2.size()) == cfg.K, "r_xi_matrix: need K subcarrier powers");
  for (double c : c2) require(c >= 0.0, "r_xi_matrix: powers must be nonnegative");
  const double ts = cfg.sample_period();
  // Toeplitz in (m - n): evaluate one generator per lag
  std::vector<cdouble> gen(2 * cfg.N - 1);
  for (int lag = -(cfg.N - 1); lag <= cfg.N - 1; ++lag) {
    cdouble g = 0.0;
    for (int k = 1; k <= cfg.K; ++k)
      g += c2[k - 1] * std::exp(kJ * (2.0 * kPi * cfg.subcarrier_freq(k) * lag * ts));
    gen[lag + cfg.N - 1] = g;
  }
  CMat r(cfg.N, cfg.N);
  for (int m = 0; m < cfg.N; ++m)
    for (int n = 0; n < cfg.N; ++n) r(m, n) = gen[(m - n) + cfg.N - 1];
  return r;
}

namespace {

CyclicSpectrum spectrum_from_covariance(const CMat& cov, const OfdmSystemConfig& cfg) {
  CyclicSpectrum spec = CyclicSpectrum::zeros(cfg);
  const CMat v = fft_matrix(cfg.N);
  const CMat s = v * cov * v.adjoint();
  size_t idx = 0;
  const std::vector<CMat> sels = selector_set(cfg, spec);
  for (size_t mi = 0; mi < spec.m_set.size(); ++mi)
    for (size_t ni = 0; ni < spec.n_set.size(); ++ni)
      spec.values(mi, ni) = (sels[idx++] * s).trace();
  return spec;
}

}  // namespace

CyclicSpectrum ergodic_cyclic_spectrum(const BeamformerPair& bf, const Scenario& scenario,
                                       const OfdmSystemConfig& cfg) {
  const CMat r_xi = r_xi_matrix(intercept_subcarrier_powers(bf, scenario, cfg), cfg);
  const CMat cov = r_xi + scenario.sigma2_Ez * CMat::Identity(cfg.N, cfg.N);
  return spectrum_from_covariance(cov, cfg);
}

CyclicSpectrum awgn_ergodic_spectrum(double sigma2_0, const OfdmSystemConfig& cfg) {
  require(sigma2_0 >= 0.0, "awgn_ergodic_spectrum: power must be nonnegative");
  return spectrum_from_covariance(sigma2_0 * CMat::Identity(cfg.N, cfg.N), cfg);
}

CyclicSpectrum monte_carlo_cyclic_spectrum(const BeamformerPair& bf, const Scenario& scenario,
                                           const OfdmSystemConfig& cfg, int trials,
                                           std::uint64_t master_seed) {
  require(trials >= 1, "monte_carlo_cyclic_spectrum: need at least one trial");
  CyclicSpectrum mean = CyclicSpectrum::zeros(cfg);
  // binary-counter pairwise reduction keeps the sum independent of chunking
  std::vector<CMat> partial;
  std::vector<bool> occupied;
  for (int t = 0; t < trials; ++t) {
    CMat acc = cyclic_spectrum(intercept_signal(bf, scenario, cfg, derive_seed(master_seed, t)),
                               cfg)
                   .values;
    size_t level = 0;
    while (level < occupied.size() && occupied[level]) {
      acc += partial[level];
      occupied[level] = false;
      ++level;
    }
    if (level == occupied.size()) {
      partial.push_back(acc);
      occupied.push_back(true);
    } else {
      partial[level] = acc;
      occupied[level] = true;
    }
  }
  CMat total = CMat::Zero(mean.values.rows(), mean.values.cols());
  for (size_t level = 0; level < occupied.size(); ++level)
    if (occupied[level]) total += partial[level];
  mean.values = total / static_cast<double>(trials);
  return mean;
}

double flatness_score(const CMat& r_xi) {
  require(r_xi.rows() > 0 && r_xi.rows() == r_xi.cols(), "flatness_score: square input required");
  double diag_mean = 0.0, off_max = 0.0;
  for (Eigen::Index i = 0; i < r_xi.rows(); ++i) {
    diag_mean += std::abs(r_xi(i, i));
    for (Eigen::Index j = 0; j < r_xi.cols(); ++j)
      if (i != j) off_max = std::max(off_max, std::abs(r_xi(i, j)));
  }
  diag_mean /= static_cast<double>(r_xi.rows());
  if (diag_mean == 0.0) throw std::domain_error("flatness_score: zero diagonal");
  return off_max / diag_mean;
}

double flatness_score(const CyclicSpectrum& spec) {
  require(spec.values.size() > 0, "flatness_score: empty spectrum");
  double base_mean = 0.0, cyc_max = 0.0;
  int base_count = 0;
  for (size_t ni = 0; ni < spec.n_set.size(); ++ni) {
    for (Eigen::Index mi = 0; mi < spec.values.rows(); ++mi) {
      const double mag = std::abs(spec.values(mi, static_cast<Eigen::Index>(ni)));
      if (spec.n_set[ni] == 0) {
        base_mean += mag;
        ++base_count;
      } else {
        cyc_max = std::max(cyc_max, mag);
      }
    }
  }
  base_mean /= std::max(base_count, 1);
  if (base_mean == 0.0) throw std::domain_error("flatness_score: zero n = 0 row");
  return cyc_max / base_mean;
}

namespace {

std::string fmt_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

double magnitude_db(cdouble v) {
  const double db = 10.0 * std::log10(std::abs(v));
  return std::isfinite(db) ? std::max(db, -80.0) : -80.0;
}

}  // namespace

void write_spectrum_csv(const CyclicSpectrum& spec, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "# f_s=" << fmt_double(spec.f_s) << " W=" << spec.W
      << " N=" << spec.m_set.size() + spec.W - 1 << "\n";
  out << "m,n,re,im,magnitude_dB\n";
  for (size_t mi = 0; mi < spec.m_set.size(); ++mi)
    for (size_t ni = 0; ni < spec.n_set.size(); ++ni) {
      const cdouble v = spec.values(mi, ni);
      out << spec.m_set[mi] << ',' << spec.n_set[ni] << ',' << fmt_double(v.real()) << ','
          << fmt_double(v.imag()) << ',' << fmt_double(magnitude_db(v)) << '\n';
    }
  if (!out) throw std::runtime_error("write failed: " + path);
}

void write_spectrum_json(const CyclicSpectrum& spec, const std::string& path) {
  nlohmann::json j;
  j["f_s"] = spec.f_s;
  j["W"] = spec.W;
  j["m_set"] = spec.m_set;
  j["n_set"] = spec.n_set;
  auto& rows = j["values"] = nlohmann::json::array();
  for (Eigen::Index mi = 0; mi < spec.values.rows(); ++mi) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index ni = 0; ni < spec.values.cols(); ++ni)
      row.push_back({spec.values(mi, ni).real(), spec.values(mi, ni).imag()});
    rows.push_back(row);
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << j.dump(2) << '\n';
}

}  // namespace isac
