#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "isac/harness.hpp"
#include "isac/metrics.hpp"
#include "isac/schemes.hpp"
#include "isac/signal_model.hpp"

using namespace isac;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path path;
  TempDir(const char* tag) : path(fs::temp_directory_path() / tag) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("builtin profiles validate") {
  const Profile desk = desk_profile();
  desk.validate();
  CHECK(desk.cfg.M_t == 8);
  CHECK(desk.cfg.K == 8);
  CHECK(desk.constraints.mainlobe_grid.size() == 3);
  const Profile paper = paper_profile();
  paper.validate();
  CHECK(paper.cfg.M_t == 32);
  CHECK(paper.trials == 5000);
}

TEST_CASE("profile JSON round trip is byte stable") {
  TempDir dir("isac_profile_rt");
  const fs::path a = dir.path / "a.json";
  const fs::path b = dir.path / "b.json";
  profile_to_json(desk_profile(), a.string());
  const Profile back = profile_from_json(a.string());
  back.validate();
  profile_to_json(back, b.string());
  CHECK(slurp(a) == slurp(b));
  CHECK(back.cfg.K == desk_profile().cfg.K);
  CHECK(back.constraints.eta == doctest::Approx(desk_profile().constraints.eta).epsilon(1e-12));
  CHECK_THROWS(profile_from_json((dir.path / "missing.json").string()));
}

TEST_CASE("experiment spec validation") {
  ExperimentSpec spec;
  spec.validate();
  ExperimentSpec bad = spec;
  bad.trials = 0;
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  bad = spec;
  bad.sweep_values.clear();
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  bad = spec;
  bad.sweep_values = {30.0, 20.0};  // unsorted
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  bad = spec;
  bad.scheme = "no-such-scheme";
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  bad = spec;
  bad.sweep_axis = "no-such-axis";
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  CHECK(is_known_scheme("proposed-hbf"));
  CHECK(is_known_scheme("ts-hbf"));
  CHECK(!is_known_scheme("proposed"));
}

TEST_CASE("run_experiment is a pure function of profile and spec") {
  Profile p = desk_profile();
  p.trials = 2;
  ExperimentSpec spec;
  spec.name = "det";
  spec.sweep_values = {30.0};
  spec.trials = 2;
  spec.dump_trials = true;
  const RunRecord a = run_experiment(spec, p);
  const RunRecord b = run_experiment(spec, p);
  REQUIRE(a.points.size() == 1);
  CHECK(a.points[0].se_mean == b.points[0].se_mean);
  CHECK(a.points[0].radar_sinr_db_mean == b.points[0].radar_sinr_db_mean);
  CHECK(a.points[0].iml_dbm_mean == b.points[0].iml_dbm_mean);
  CHECK(a.points[0].flatness_mean == b.points[0].flatness_mean);
  REQUIRE(a.trial_rows.size() == b.trial_rows.size());
  for (size_t i = 0; i < a.trial_rows.size(); ++i) {
    CHECK(a.trial_rows[i].se == b.trial_rows[i].se);
    CHECK(a.trial_rows[i].iml_dbm == b.trial_rows[i].iml_dbm);
  }
  REQUIRE(a.representative_trace.iter.size() == b.representative_trace.iter.size());

  // aggregates must be recomputable from the dumped per-trial rows
  double mean = 0.0;
  for (const TrialRow& r : a.trial_rows) mean += r.se;
  mean /= a.trial_rows.size();
  CHECK(a.points[0].se_mean == doctest::Approx(mean).epsilon(1e-12));
  double var = 0.0;
  for (const TrialRow& r : a.trial_rows) var += (r.se - mean) * (r.se - mean);
  // sample standard deviation (n - 1 denominator)
  CHECK(a.points[0].se_std ==
        doctest::Approx(std::sqrt(var / (a.trial_rows.size() - 1))).epsilon(1e-9));
}

TEST_CASE("benchmark schemes expose the expected structure") {
  Profile p = desk_profile();
  const Scenario sc = generate_channels(p.scenario, p.cfg, derive_seed(1, 0));

  const BeamformerPair fd = scheme_fd_isac(sc, p.constraints, p.cfg, p.solver);
  CHECK(fd.num_rf() == p.cfg.M_t);
  CHECK(!fd.analog_feasible);
  CHECK((fd.F_RF - CMat::Identity(p.cfg.M_t, p.cfg.M_t)).norm() == 0.0);

  double resid = -1.0;
  const BeamformerPair ts = scheme_ts_hbf(sc, p.constraints, p.cfg, p.solver, &resid);
  CHECK(ts.num_rf() == p.cfg.N_RF);
  CHECK(ts.analog_feasible);
  CHECK(resid > 0.0);  // unit-modulus factorization of an FD design never lands exactly

  const SchemeResult det = run_scheme_detailed("ts-hbf", sc, p.constraints, p.cfg, p.solver);
  CHECK(det.factorization_residual > 0.0);
  CHECK(!det.trace.iter.empty());

  CHECK_THROWS_AS(run_scheme("bogus", sc, p.constraints, p.cfg, p.solver), InvalidArgument);
}

TEST_CASE("scheme spectral-efficiency ordering at desk scale") {
  // per-seed SE comparisons between local optima are noisy, so compare the
  // averages: dropping constraints widens the feasible set, and the sensing
  // benchmark spends no power on the users at all
  Profile p = desk_profile();
  const int S = 8;
  double prop = 0.0, fd = 0.0, comm = 0.0, radar = 0.0;
  for (int s = 0; s < S; ++s) {
    SolverConfig scfg = p.solver;
    scfg.seed = derive_seed(1, s);
    const Scenario sc = generate_channels(p.scenario, p.cfg, scfg.seed);
    prop +=
        spectral_efficiency(run_scheme("proposed-hbf", sc, p.constraints, p.cfg, scfg), sc, p.cfg);
    fd += spectral_efficiency(run_scheme("fd-isac", sc, p.constraints, p.cfg, scfg), sc, p.cfg);
    comm += spectral_efficiency(run_scheme("comm-only-hbf", sc, p.constraints, p.cfg, scfg), sc,
                                p.cfg);
    radar += spectral_efficiency(run_scheme("radar-only-hbf", sc, p.constraints, p.cfg, scfg), sc,
                                 p.cfg);
  }
  prop /= S;
  fd /= S;
  comm /= S;
  radar /= S;
  CHECK(comm > prop);
  CHECK(fd > prop);
  CHECK(prop > 20.0);
  CHECK(radar < 5.0);
}

TEST_CASE("emit_figures writes the documented artifact set") {
  TempDir dir("isac_emit");
  Profile p = desk_profile();
  p.trials = 1;
  ExperimentSpec spec;
  spec.name = "fig";
  spec.sweep_values = {28.0, 30.0};
  spec.trials = 1;
  spec.dump_trials = true;
  spec.output_dir = dir.path.string();
  const RunRecord rec = run_experiment(spec, p);
  emit_figures(rec);
  for (const char* suffix : {"_summary.csv", "_summary.json", "_trace.csv", "_trials.csv", ".svg"})
    CHECK(fs::exists(dir.path / (std::string("fig") + suffix)));
  const std::string csv = slurp(dir.path / "fig_summary.csv");
  CHECK(csv.rfind("sweep_value,se_mean,se_std", 0) == 0);
  // one header line plus one row per sweep point
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
  const std::string svg = slurp(dir.path / "fig.svg");
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("polyline") != std::string::npos);
}

TEST_CASE("line chart handles degenerate inputs") {
  TempDir dir("isac_svg");
  const fs::path f = dir.path / "c.svg";
  ChartSeries s;
  s.label = "flat";
  s.x = {0.0, 1.0};
  s.y = {2.0, 2.0};  // zero vertical span must not divide by zero
  write_line_chart_svg(f.string(), "t", "x", "y", {s});
  const std::string svg = slurp(f);
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("NaN") == std::string::npos);
  CHECK(svg.find("nan") == std::string::npos);
}
