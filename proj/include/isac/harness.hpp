#ifndef ISAC_HARNESS_HPP
#define ISAC_HARNESS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "isac/config.hpp"
#include "isac/metrics.hpp"
#include "isac/signal_model.hpp"
#include "isac/solver.hpp"

namespace isac {

/// Everything needed to instantiate one experiment environment: system
/// parameters, random-scenario generator settings, and the constraint set
/// (stored in engineering units; dBm conversions happen at the JSON boundary).
struct Profile {
  OfdmSystemConfig cfg;
  ScenarioSpec scenario;
  DesignConstraints constraints;
  SolverConfig solver;
  int trials = 20;
  std::vector<double> spectrum_angles;  // plotting grid [deg]

  void validate() const {
    cfg.validate();
    constraints.validate(cfg);
    solver.validate();
    require(trials >= 1, "trials must be >= 1");
  }
};

/// Desk-scale defaults: M_t = M_r = 8, N_RF = 2, K = 8, U = 2, N = 8, W = 2,
/// 3 mainlobe angles, 2 null angles, 20 trials.
Profile desk_profile();
/// Full-scale profile (M_t = 32, K = 32, N = 34, dense angle grids,
/// 5000 trials). Emits a runtime warning on stderr: hours, not minutes.
Profile paper_profile();

/// JSON (de)serialization of a profile. Round-trips bit-exactly; angle grids
/// in degrees, power-like levels in dBm.
Profile profile_from_json(const std::string& path);
void profile_to_json(const Profile& profile, const std::string& path);

struct ExperimentSpec {
  std::string name = "experiment";
  // axis: one of power_dbm | zeta_dbm | eta_dbm | n_rf | subcarriers | sigma2_csi
  std::string sweep_axis = "power_dbm";
  std::vector<double> sweep_values = {30.0};
  int trials = 20;
  std::string scheme = "proposed-hbf";
  std::uint64_t seed = 1;
  std::string output_dir = ".";
  bool dump_trials = false;

  void validate() const;
};

struct PointAggregate {
  double sweep_value = 0.0;
  double se_mean = 0.0, se_std = 0.0;
  double radar_sinr_db_mean = 0.0, radar_sinr_db_std = 0.0;
  double iml_dbm_mean = 0.0, iml_dbm_std = 0.0;
  double p_intercept_mean = 0.0, p_intercept_std = 0.0;
  double flatness_mean = 0.0, flatness_std = 0.0;
};

/// One metric row per trial, kept when dump_trials is set.
struct TrialRow {
  int point_index = 0;
  int trial = 0;
  double se = 0.0, radar_sinr_db = 0.0, iml_dbm = 0.0, p_intercept = 0.0, flatness = 0.0;
};

struct RunRecord {
  ExperimentSpec spec;
  std::vector<PointAggregate> points;
  std::vector<TrialRow> trial_rows;      // empty unless dump_trials
  ConvergenceTrace representative_trace; // first trial of the first point
  double wall_clock_s = 0.0;
};

/// Runs the experiment against the given profile. Per-trial seeds are derived
/// from (spec.seed, point, trial); trials run concurrently but are reduced in
/// trial-index order, so the record is a pure function of (profile, spec).
RunRecord run_experiment(const ExperimentSpec& spec, const Profile& profile);

/// Writes <name>_summary.csv / <name>_summary.json / <name>_trace.csv /
/// <name>.svg (line chart of the headline metric) and, when dump_trials,
/// <name>_trials.csv into spec.output_dir.
void emit_figures(const RunRecord& record);

/// Minimal static SVG line chart; one polyline per series.
struct ChartSeries {
  std::string label;
  std::vector<double> x, y;
};
void write_line_chart_svg(const std::string& path, const std::string& title,
                          const std::string& x_label, const std::string& y_label,
                          const std::vector<ChartSeries>& series);

}  // namespace isac

#endif  // ISAC_HARNESS_HPP
