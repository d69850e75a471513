#include "isac/harness.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "isac/cyclo.hpp"
#include "isac/schemes.hpp"

namespace isac {

namespace {

std::vector<double> linspace_grid(double lo, double hi, double step) {
  std::vector<double> grid;
  for (double v = lo; v <= hi + 1e-9; v += step) grid.push_back(v);
  return grid;
}

void fill_constraints(DesignConstraints& c, int K, double eta_dbm, double zeta_dbm,
                      double p_dbm) {
  c.eta = dbm_to_watt(eta_dbm);
  c.zeta_k.assign(K, dbm_to_watt(zeta_dbm));
  c.P_k.assign(K, dbm_to_watt(p_dbm));
  c.varpi_k.assign(K, 1.0);
}

/// Run fn(i) for i in [0, n) on a small pool; results must be written to
/// pre-sized slots so the reduction order is the index order.
template <typename Fn>
void parallel_for(int n, const Fn& fn) {
  const int hw = static_cast<int>(std::thread::hardware_concurrency());
  const int workers = std::max(1, std::min(n, hw > 0 ? hw : 4));
  if (workers == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr error;
  std::mutex error_mu;
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&]() {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mu);
          if (!error) error = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

double sample_mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sample_std(const std::vector<double>& v, double mean) {
  if (v.size() < 2) return 0.0;
  double s = 0.0;
  for (double x : v) s += (x - mean) * (x - mean);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace

Profile desk_profile() {
  Profile p;
  p.cfg = OfdmSystemConfig{};  // desk-scale defaults
  p.scenario = ScenarioSpec{};
  // narrowband desk instance: with N_RF = 2 the analog columns must stay
  // near-orthogonal to the clutter steering at every subcarrier, and the
  // full-bandwidth squint leaves that set almost empty at M_t = 8
  p.cfg.B = 8e7;
  // N = K puts the Dirichlet zeros of R_Xi exactly on every off-diagonal, so
  // the covariance flatness score reads the subcarrier power inequality alone
  p.cfg.N = 8;
  p.constraints.mainlobe_grid = {21.0, 25.0, 29.0};
  p.constraints.clutter_grid = {-30.0, 60.0};
  fill_constraints(p.constraints, p.cfg.K, 20.0, 0.0, 30.0);
  p.solver.rho[0] = 4.0;  // hybrid consensus needs a stiffer rho_1 than the rest
  p.solver.ccd_sweeps = 1;
  p.trials = 20;
  p.spectrum_angles = linspace_grid(-90.0, 90.0, 3.0);
  return p;
}

Profile paper_profile() {
  Profile p;
  p.cfg.M_t = 32;
  p.cfg.M_r = 32;
  p.cfg.N_RF = 4;
  p.cfg.K = 32;
  p.cfg.N = 34;
  p.cfg.W = 2;
  p.scenario = ScenarioSpec{};
  p.constraints.mainlobe_grid = linspace_grid(21.0, 29.0, 1.0);
  std::vector<double> nulls = linspace_grid(-32.0, -28.0, 1.0);
  for (double v : linspace_grid(58.0, 62.0, 1.0)) nulls.push_back(v);
  p.constraints.clutter_grid = nulls;
  fill_constraints(p.constraints, p.cfg.K, 20.0, 0.0, 30.0);
  p.solver.rho[0] = 4.0;
  p.trials = 5000;
  p.spectrum_angles = linspace_grid(-90.0, 90.0, 1.0);
  std::cerr << "warning: paper-scale profile selected (M_t=32, K=32, 5000 trials); "
               "expect very long runtimes\n";
  return p;
}

Profile profile_from_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path);
  nlohmann::json j;
  in >> j;
  Profile p = desk_profile();
  const auto& sys = j.at("system");
  p.cfg.M_t = sys.value("M_t", p.cfg.M_t);
  p.cfg.M_r = sys.value("M_r", p.cfg.M_r);
  p.cfg.N_RF = sys.value("N_RF", p.cfg.N_RF);
  p.cfg.K = sys.value("K", p.cfg.K);
  p.cfg.B = sys.value("B_Hz", p.cfg.B);
  p.cfg.f_c = sys.value("f_c_Hz", p.cfg.f_c);
  p.cfg.d = sys.value("d_m", p.cfg.d);
  p.cfg.v = sys.value("v_mps", p.cfg.v);
  p.cfg.N = sys.value("N", p.cfg.N);
  p.cfg.W = sys.value("W", p.cfg.W);
  p.cfg.N_symbol = sys.value("N_symbol", p.cfg.N_symbol);
  p.cfg.N_cp = sys.value("N_cp", p.cfg.N_cp);
  const auto& sc = j.at("scenario");
  p.scenario.num_users = sc.value("num_users", p.scenario.num_users);
  p.scenario.num_paths = sc.value("num_paths", p.scenario.num_paths);
  p.scenario.theta_E = sc.value("theta_E_deg", p.scenario.theta_E);
  p.scenario.clutter_angles =
      sc.value("clutter_angles_deg", p.scenario.clutter_angles);
  p.scenario.sigma2_E_dbm = sc.value("sigma2_E_dbm", p.scenario.sigma2_E_dbm);
  p.scenario.sigma2_i_dbm = sc.value("sigma2_i_dbm", p.scenario.sigma2_i_dbm);
  p.scenario.sigma2_R_dbm = sc.value("sigma2_R_dbm", p.scenario.sigma2_R_dbm);
  p.scenario.sigma2_C_dbm = sc.value("sigma2_C_dbm", p.scenario.sigma2_C_dbm);
  p.scenario.sigma2_Ez_dbm = sc.value("sigma2_Ez_dbm", p.scenario.sigma2_Ez_dbm);
  p.scenario.beta_var_dbm = sc.value("beta_var_dbm", p.scenario.beta_var_dbm);
  const auto& cn = j.at("constraints");
  p.constraints.mainlobe_grid =
      cn.value("mainlobe_grid_deg", p.constraints.mainlobe_grid);
  p.constraints.clutter_grid = cn.value("clutter_grid_deg", p.constraints.clutter_grid);
  fill_constraints(p.constraints, p.cfg.K, cn.value("eta_dbm", 20.0),
                   cn.value("zeta_dbm", 0.0), cn.value("P_dbm", 30.0));
  if (cn.contains("varpi_k")) p.constraints.varpi_k = cn["varpi_k"].get<std::vector<double>>();
  if (j.contains("solver")) {
    const auto& so = j["solver"];
    if (so.contains("rho")) {
      const auto rho = so["rho"].get<std::vector<double>>();
      require(rho.size() == 4, "solver.rho must have 4 entries");
      for (int i = 0; i < 4; ++i) p.solver.rho[i] = rho[i];
    }
    p.solver.max_iters = so.value("max_iters", p.solver.max_iters);
    p.solver.tol_residual = so.value("tol_residual", p.solver.tol_residual);
    p.solver.tol_objective = so.value("tol_objective", p.solver.tol_objective);
    p.solver.bisection_tol = so.value("bisection_tol", p.solver.bisection_tol);
    p.solver.ccd_sweeps = so.value("ccd_sweeps", p.solver.ccd_sweeps);
    p.solver.seed = so.value("seed", p.solver.seed);
  }
  p.trials = j.value("trials", p.trials);
  p.spectrum_angles = j.value("spectrum_angles_deg", p.spectrum_angles);
  p.validate();
  return p;
}

void profile_to_json(const Profile& profile, const std::string& path) {
  nlohmann::json j;
  j["system"] = {{"M_t", profile.cfg.M_t},       {"M_r", profile.cfg.M_r},
                 {"N_RF", profile.cfg.N_RF},     {"K", profile.cfg.K},
                 {"B_Hz", profile.cfg.B},        {"f_c_Hz", profile.cfg.f_c},
                 {"d_m", profile.cfg.d},         {"v_mps", profile.cfg.v},
                 {"N", profile.cfg.N},           {"W", profile.cfg.W},
                 {"N_symbol", profile.cfg.N_symbol}, {"N_cp", profile.cfg.N_cp}};
  j["scenario"] = {{"num_users", profile.scenario.num_users},
                   {"num_paths", profile.scenario.num_paths},
                   {"theta_E_deg", profile.scenario.theta_E},
                   {"clutter_angles_deg", profile.scenario.clutter_angles},
                   {"sigma2_E_dbm", profile.scenario.sigma2_E_dbm},
                   {"sigma2_i_dbm", profile.scenario.sigma2_i_dbm},
                   {"sigma2_R_dbm", profile.scenario.sigma2_R_dbm},
                   {"sigma2_C_dbm", profile.scenario.sigma2_C_dbm},
                   {"sigma2_Ez_dbm", profile.scenario.sigma2_Ez_dbm},
                   {"beta_var_dbm", profile.scenario.beta_var_dbm}};
  j["constraints"] = {{"mainlobe_grid_deg", profile.constraints.mainlobe_grid},
                      {"clutter_grid_deg", profile.constraints.clutter_grid},
                      {"eta_dbm", watt_to_dbm(profile.constraints.eta)},
                      {"zeta_dbm", watt_to_dbm(profile.constraints.zeta_k.at(0))},
                      {"P_dbm", watt_to_dbm(profile.constraints.P_k.at(0))},
                      {"varpi_k", profile.constraints.varpi_k}};
  j["solver"] = {{"rho", std::vector<double>(profile.solver.rho, profile.solver.rho + 4)},
                 {"max_iters", profile.solver.max_iters},
                 {"tol_residual", profile.solver.tol_residual},
                 {"tol_objective", profile.solver.tol_objective},
                 {"bisection_tol", profile.solver.bisection_tol},
                 {"ccd_sweeps", profile.solver.ccd_sweeps},
                 {"seed", profile.solver.seed}};
  j["trials"] = profile.trials;
  j["spectrum_angles_deg"] = profile.spectrum_angles;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << j.dump(2) << '\n';
}

void ExperimentSpec::validate() const {
  require(trials >= 1, "trials must be >= 1");
  require(!sweep_values.empty(), "sweep must have at least one point");
  for (size_t i = 0; i < sweep_values.size(); ++i) {
    require(std::isfinite(sweep_values[i]), "sweep values must be finite");
    if (i) require(sweep_values[i] >= sweep_values[i - 1], "sweep values must be sorted");
  }
  require(is_known_scheme(scheme), "unknown scheme: " + scheme);
  require(sweep_axis == "power_dbm" || sweep_axis == "zeta_dbm" || sweep_axis == "eta_dbm" ||
              sweep_axis == "n_rf" || sweep_axis == "subcarriers" || sweep_axis == "sigma2_csi",
          "unknown sweep axis: " + sweep_axis);
}

namespace {

/// Applies one sweep value to copies of the profile's environment.
void apply_axis(const std::string& axis, double value, OfdmSystemConfig& cfg,
                DesignConstraints& constraints) {
  if (axis == "power_dbm") {
    constraints.P_k.assign(cfg.K, dbm_to_watt(value));
  } else if (axis == "zeta_dbm") {
    constraints.zeta_k.assign(cfg.K, dbm_to_watt(value));
  } else if (axis == "eta_dbm") {
    constraints.eta = dbm_to_watt(value);
  } else if (axis == "n_rf") {
    cfg.N_RF = static_cast<int>(value);
  } else if (axis == "subcarriers") {
    const int K = static_cast<int>(value);
    const double zeta = constraints.zeta_k.at(0);
    const double power = constraints.P_k.at(0);
    cfg.K = K;
    constraints.zeta_k.assign(K, zeta);
    constraints.P_k.assign(K, power);
    constraints.varpi_k.assign(K, constraints.varpi_k.at(0));
  }
  // sigma2_csi is applied per trial to the scenario, not here
}

}  // namespace

RunRecord run_experiment(const ExperimentSpec& spec, const Profile& profile) {
  spec.validate();
  profile.validate();
  const auto t0 = std::chrono::steady_clock::now();

  RunRecord rec;
  rec.spec = spec;
  for (size_t pi = 0; pi < spec.sweep_values.size(); ++pi) {
    const double value = spec.sweep_values[pi];
    OfdmSystemConfig cfg = profile.cfg;
    DesignConstraints constraints = profile.constraints;
    apply_axis(spec.sweep_axis, value, cfg, constraints);
    cfg.validate();
    constraints.validate(cfg);

    std::vector<TrialRow> rows(spec.trials);
    std::vector<ConvergenceTrace> traces(pi == 0 ? 1 : 0);
    parallel_for(spec.trials, [&](int t) {
      const std::uint64_t seed_t =
          derive_seed(derive_seed(spec.seed, 1000 + static_cast<std::uint64_t>(pi)),
                      static_cast<std::uint64_t>(t));
      Scenario scen = generate_channels(profile.scenario, cfg, seed_t);
      if (spec.sweep_axis == "sigma2_csi" && value > 0.0)
        scen = perturb_csi(scen, value, derive_seed(seed_t, 3));
      SolverConfig scfg = profile.solver;
      scfg.seed = seed_t;
      const SchemeResult res = run_scheme_detailed(spec.scheme, scen, constraints, cfg, scfg);
      const MetricsReport m = evaluate_metrics(res.bf, scen, constraints, cfg, {});
      TrialRow row;
      row.point_index = static_cast<int>(pi);
      row.trial = t;
      row.se = m.se;
      double sinr = 0.0;
      for (double s : m.sinr_radar_k) sinr += s;
      sinr /= static_cast<double>(m.sinr_radar_k.size());
      row.radar_sinr_db = 10.0 * std::log10(std::max(sinr, 1e-30));
      row.iml_dbm = m.iml_dbm;
      row.p_intercept = m.p_intercept;
      row.flatness = m.flatness;
      rows[t] = row;
      if (pi == 0 && t == 0) traces[0] = res.trace;
    });

    PointAggregate agg;
    agg.sweep_value = value;
    auto collect = [&](auto member) {
      std::vector<double> v(spec.trials);
      for (int t = 0; t < spec.trials; ++t) v[t] = rows[t].*member;
      return v;
    };
    const auto se = collect(&TrialRow::se);
    const auto sinr = collect(&TrialRow::radar_sinr_db);
    const auto iml_v = collect(&TrialRow::iml_dbm);
    const auto pint = collect(&TrialRow::p_intercept);
    const auto flat = collect(&TrialRow::flatness);
    agg.se_mean = sample_mean(se);
    agg.se_std = sample_std(se, agg.se_mean);
    agg.radar_sinr_db_mean = sample_mean(sinr);
    agg.radar_sinr_db_std = sample_std(sinr, agg.radar_sinr_db_mean);
    agg.iml_dbm_mean = sample_mean(iml_v);
    agg.iml_dbm_std = sample_std(iml_v, agg.iml_dbm_mean);
    agg.p_intercept_mean = sample_mean(pint);
    agg.p_intercept_std = sample_std(pint, agg.p_intercept_mean);
    agg.flatness_mean = sample_mean(flat);
    agg.flatness_std = sample_std(flat, agg.flatness_mean);
    rec.points.push_back(agg);
    if (spec.dump_trials)
      rec.trial_rows.insert(rec.trial_rows.end(), rows.begin(), rows.end());
    if (pi == 0 && !traces.empty()) rec.representative_trace = traces[0];
  }

  rec.wall_clock_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rec;
}

void write_line_chart_svg(const std::string& path, const std::string& title,
                          const std::string& x_label, const std::string& y_label,
                          const std::vector<ChartSeries>& series) {
  const int width = 640, height = 420, ml = 70, mr = 20, mt = 40, mb = 50;
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& s : series)
    for (size_t i = 0; i < s.x.size(); ++i) {
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      ymin = std::min(ymin, s.y[i]);
      ymax = std::max(ymax, s.y[i]);
    }
  if (xmin > xmax) {
    xmin = 0;
    xmax = 1;
  }
  if (ymin > ymax) {
    ymin = 0;
    ymax = 1;
  }
  if (xmax - xmin < 1e-12) xmax = xmin + 1.0;
  if (ymax - ymin < 1e-12) ymax = ymin + 1.0;
  auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * (width - ml - mr); };
  auto py = [&](double y) { return height - mb - (y - ymin) / (ymax - ymin) * (height - mt - mb); };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">"
      << title << "</text>\n";
  out << "<line x1=\"" << ml << "\" y1=\"" << height - mb << "\" x2=\"" << width - mr
      << "\" y2=\"" << height - mb << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\""
      << height - mb << "\" stroke=\"black\"/>\n";
  char buf[128];
  for (int i = 0; i <= 4; ++i) {
    const double xv = xmin + (xmax - xmin) * i / 4.0;
    const double yv = ymin + (ymax - ymin) * i / 4.0;
    std::snprintf(buf, sizeof(buf), "%.3g", xv);
    out << "<text x=\"" << px(xv) << "\" y=\"" << height - mb + 18
        << "\" text-anchor=\"middle\" font-size=\"11\">" << buf << "</text>\n";
    std::snprintf(buf, sizeof(buf), "%.3g", yv);
    out << "<text x=\"" << ml - 8 << "\" y=\"" << py(yv) + 4
        << "\" text-anchor=\"end\" font-size=\"11\">" << buf << "</text>\n";
  }
  out << "<text x=\"" << width / 2 << "\" y=\"" << height - 12
      << "\" text-anchor=\"middle\" font-size=\"12\">" << x_label << "</text>\n";
  out << "<text x=\"16\" y=\"" << height / 2 << "\" text-anchor=\"middle\" font-size=\"12\" "
      << "transform=\"rotate(-90 16 " << height / 2 << ")\">" << y_label << "</text>\n";
  for (size_t s = 0; s < series.size(); ++s) {
    const char* color = colors[s % 5];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (size_t i = 0; i < series[s].x.size(); ++i)
      out << px(series[s].x[i]) << ',' << py(series[s].y[i]) << ' ';
    out << "\"/>\n";
    out << "<text x=\"" << width - mr - 4 << "\" y=\"" << mt + 16 * (s + 1)
        << "\" text-anchor=\"end\" font-size=\"11\" fill=\"" << color << "\">"
        << series[s].label << "</text>\n";
  }
  out << "</svg>\n";
}

void emit_figures(const RunRecord& record) {
  namespace fs = std::filesystem;
  fs::create_directories(record.spec.output_dir);
  const std::string base = record.spec.output_dir + "/" + record.spec.name;
  char buf[512];

  {
    std::ofstream out(base + "_summary.csv");
    if (!out) throw std::runtime_error("cannot open for writing: " + base + "_summary.csv");
    out << "sweep_value,se_mean,se_std,radar_sinr_db_mean,radar_sinr_db_std,"
           "iml_dbm_mean,iml_dbm_std,p_intercept_mean,p_intercept_std,"
           "flatness_mean,flatness_std\n";
    for (const auto& p : record.points) {
      std::snprintf(buf, sizeof(buf),
                    "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                    p.sweep_value, p.se_mean, p.se_std, p.radar_sinr_db_mean,
                    p.radar_sinr_db_std, p.iml_dbm_mean, p.iml_dbm_std, p.p_intercept_mean,
                    p.p_intercept_std, p.flatness_mean, p.flatness_std);
      out << buf;
    }
  }

  {
    nlohmann::json j;
    j["spec"] = {{"name", record.spec.name},
                 {"sweep_axis", record.spec.sweep_axis},
                 {"sweep_values", record.spec.sweep_values},
                 {"trials", record.spec.trials},
                 {"scheme", record.spec.scheme},
                 {"seed", record.spec.seed},
                 {"dump_trials", record.spec.dump_trials}};
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& p : record.points)
      pts.push_back({{"sweep_value", p.sweep_value},
                     {"se_mean", p.se_mean},
                     {"se_std", p.se_std},
                     {"radar_sinr_db_mean", p.radar_sinr_db_mean},
                     {"radar_sinr_db_std", p.radar_sinr_db_std},
                     {"iml_dbm_mean", p.iml_dbm_mean},
                     {"iml_dbm_std", p.iml_dbm_std},
                     {"p_intercept_mean", p.p_intercept_mean},
                     {"p_intercept_std", p.p_intercept_std},
                     {"flatness_mean", p.flatness_mean},
                     {"flatness_std", p.flatness_std}});
    j["points"] = pts;
    j["wall_clock_s"] = record.wall_clock_s;
    std::ofstream out(base + "_summary.json");
    out << j.dump(2) << '\n';
  }

  if (!record.representative_trace.iter.empty())
    write_trace_csv(record.representative_trace, base + "_trace.csv");

  if (record.spec.dump_trials) {
    std::ofstream out(base + "_trials.csv");
    out << "point_index,trial,se,radar_sinr_db,iml_dbm,p_intercept,flatness\n";
    for (const auto& r : record.trial_rows) {
      std::snprintf(buf, sizeof(buf), "%d,%d,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.point_index,
                    r.trial, r.se, r.radar_sinr_db, r.iml_dbm, r.p_intercept, r.flatness);
      out << buf;
    }
  }

  // headline chart per axis
  std::string metric = "se_mean", ylab = "SE [bits/s/Hz]";
  std::vector<double> y;
  if (record.spec.sweep_axis == "power_dbm") {
    metric = "iml_dbm_mean";
    ylab = "IML [dBm]";
    for (const auto& p : record.points) y.push_back(p.iml_dbm_mean);
  } else if (record.spec.sweep_axis == "zeta_dbm" || record.spec.sweep_axis == "eta_dbm") {
    metric = "radar_sinr_db_mean";
    ylab = "radar SINR [dB]";
    for (const auto& p : record.points) y.push_back(p.radar_sinr_db_mean);
  } else {
    for (const auto& p : record.points) y.push_back(p.se_mean);
  }
  ChartSeries s;
  s.label = record.spec.scheme + " " + metric;
  for (const auto& p : record.points) s.x.push_back(p.sweep_value);
  s.y = y;
  write_line_chart_svg(base + ".svg", record.spec.name, record.spec.sweep_axis, ylab, {s});
}

}  // namespace isac
