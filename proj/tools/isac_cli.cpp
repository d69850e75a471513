// Command-line front end: single-instance solves plus the Monte-Carlo
// experiment protocols (sweeps, spectra grids, cyclic-spectrum panels,
// convergence traces, CSI-robustness curves).
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "isac/cyclo.hpp"
#include "isac/harness.hpp"
#include "isac/metrics.hpp"
#include "isac/schemes.hpp"

namespace {

struct GlobalArgs {
  std::string config;
  std::string profile = "desk";
  std::string scheme = "proposed-hbf";
  std::uint64_t seed = 1;
  int trials = 0;  // 0: profile default
  std::string out = "out";
  bool dump_trials = false;
};

isac::Profile load_profile(const GlobalArgs& args) {
  isac::Profile p;
  if (!args.config.empty())
    p = isac::profile_from_json(args.config);
  else if (args.profile == "paper")
    p = isac::paper_profile();
  else if (args.profile == "desk")
    p = isac::desk_profile();
  else
    throw isac::InvalidArgument("unknown profile: " + args.profile);
  if (args.trials > 0) p.trials = args.trials;
  p.solver.seed = args.seed;
  p.validate();
  return p;
}

void add_common(CLI::App* cmd, GlobalArgs& args) {
  cmd->add_option("--config", args.config, "JSON profile path (overrides --profile)");
  cmd->add_option("--profile", args.profile, "built-in profile: desk|paper");
  cmd->add_option("--scheme", args.scheme,
                  "proposed-hbf|comm-only-hbf|radar-only-hbf|fd-isac|ts-hbf");
  cmd->add_option("--seed", args.seed, "master seed");
  cmd->add_option("--trials", args.trials, "Monte-Carlo trials (default: profile)");
  cmd->add_option("--out", args.out, "output directory");
  cmd->add_flag("--dump-trials", args.dump_trials, "write per-trial metric rows");
}

isac::ExperimentSpec make_spec(const GlobalArgs& args, const isac::Profile& profile,
                               const std::string& name, const std::string& axis,
                               const std::vector<double>& values) {
  isac::ExperimentSpec spec;
  spec.name = name;
  spec.sweep_axis = axis;
  spec.sweep_values = values;
  spec.trials = args.trials > 0 ? args.trials : profile.trials;
  spec.scheme = args.scheme;
  spec.seed = args.seed;
  spec.output_dir = args.out;
  spec.dump_trials = args.dump_trials;
  return spec;
}

const std::vector<std::string> kAllSchemes = {"proposed-hbf", "comm-only-hbf", "radar-only-hbf",
                                              "fd-isac", "ts-hbf"};

int cmd_solve(const GlobalArgs& args) {
  const isac::Profile p = load_profile(args);
  std::filesystem::create_directories(args.out);
  const isac::Scenario scen = isac::generate_channels(p.scenario, p.cfg, args.seed);
  isac::SolverConfig scfg = p.solver;
  scfg.seed = args.seed;
  const isac::SchemeResult res =
      isac::run_scheme_detailed(args.scheme, scen, p.constraints, p.cfg, scfg);
  const isac::MetricsReport m =
      isac::evaluate_metrics(res.bf, scen, p.constraints, p.cfg, p.spectrum_angles);
  isac::write_metrics_json(m, args.out + "/metrics.json");
  isac::write_spectrum_map_csv(m, p.cfg, args.out + "/spectrum_map.csv");
  if (!res.trace.iter.empty()) isac::write_trace_csv(res.trace, args.out + "/trace.csv");
  std::printf("scheme=%s converged=%d SE=%.4f bits/s/Hz IML=%.2f dBm flatness=%.4g\n",
              args.scheme.c_str(), res.converged ? 1 : 0, m.se, m.iml_dbm, m.flatness);
  return 0;
}

int cmd_sweep(const GlobalArgs& args, const std::string& axis, std::vector<double> values) {
  const isac::Profile p = load_profile(args);
  if (values.empty()) {
    if (axis == "power_dbm")
      values = {26, 28, 30, 32, 34};
    else if (axis == "zeta_dbm")
      values = {-10, -5, 0, 5, 10};
    else if (axis == "eta_dbm")
      values = {18, 22, 26};
    else
      throw isac::InvalidArgument("no default sweep values for axis " + axis);
  }
  const isac::ExperimentSpec spec = make_spec(args, p, "sweep_" + axis, axis, values);
  const isac::RunRecord rec = isac::run_experiment(spec, p);
  isac::emit_figures(rec);
  std::printf("sweep %s: %zu points x %d trials, %.1f s -> %s\n", axis.c_str(), values.size(),
              spec.trials, rec.wall_clock_s, args.out.c_str());
  return 0;
}

int cmd_spectra(const GlobalArgs& args) {
  const isac::Profile p = load_profile(args);
  std::filesystem::create_directories(args.out);
  const isac::Scenario scen = isac::generate_channels(p.scenario, p.cfg, args.seed);
  isac::SolverConfig scfg = p.solver;
  scfg.seed = args.seed;
  for (const std::string& name : kAllSchemes) {
    const isac::BeamformerPair bf =
        isac::run_scheme(name, scen, p.constraints, p.cfg, scfg);
    const isac::MetricsReport m =
        isac::evaluate_metrics(bf, scen, p.constraints, p.cfg, p.spectrum_angles);
    isac::write_spectrum_map_csv(m, p.cfg, args.out + "/spectra_" + name + ".csv");
  }
  std::printf("spectra grids for %zu schemes -> %s\n", kAllSchemes.size(), args.out.c_str());
  return 0;
}

int cmd_cyclic(const GlobalArgs& args) {
  const isac::Profile p = load_profile(args);
  std::filesystem::create_directories(args.out);
  const isac::Scenario scen = isac::generate_channels(p.scenario, p.cfg, args.seed);
  isac::SolverConfig scfg = p.solver;
  scfg.seed = args.seed;
  for (const std::string& name : kAllSchemes) {
    const isac::BeamformerPair bf =
        isac::run_scheme(name, scen, p.constraints, p.cfg, scfg);
    const isac::CyclicSpectrum spec = isac::ergodic_cyclic_spectrum(bf, scen, p.cfg);
    isac::write_spectrum_csv(spec, args.out + "/cyclic_" + name + ".csv");
    isac::write_spectrum_json(spec, args.out + "/cyclic_" + name + ".json");
  }
  const isac::CyclicSpectrum awgn = isac::awgn_ergodic_spectrum(scen.sigma2_Ez, p.cfg);
  isac::write_spectrum_csv(awgn, args.out + "/cyclic_awgn.csv");
  std::printf("cyclic-spectrum panels -> %s\n", args.out.c_str());
  return 0;
}

int cmd_convergence(const GlobalArgs& args) {
  const isac::Profile p = load_profile(args);
  std::filesystem::create_directories(args.out);
  const isac::Scenario scen = isac::generate_channels(p.scenario, p.cfg, args.seed);
  isac::SolverConfig scfg = p.solver;
  scfg.seed = args.seed;
  const isac::SchemeResult res =
      isac::run_scheme_detailed(args.scheme, scen, p.constraints, p.cfg, scfg);
  isac::write_trace_csv(res.trace, args.out + "/trace.csv");
  {
    std::FILE* f = std::fopen((args.out + "/fig3a.csv").c_str(), "w");
    if (!f) throw std::runtime_error("cannot open for writing: " + args.out + "/fig3a.csv");
    std::fprintf(f, "iter,objective,res1,res2,res3,res4\n");
    for (size_t i = 0; i < res.trace.iter.size(); ++i)
      std::fprintf(f, "%d,%.17g,%.17g,%.17g,%.17g,%.17g\n", res.trace.iter[i],
                   res.trace.surrogate_se[i], res.trace.residual[0][i], res.trace.residual[1][i],
                   res.trace.residual[2][i], res.trace.residual[3][i]);
    std::fclose(f);
  }
  std::vector<isac::ChartSeries> series(4);
  static const char* names[4] = {"res1", "res2", "res3", "res4"};
  for (int r = 0; r < 4; ++r) {
    series[r].label = names[r];
    for (size_t i = 0; i < res.trace.iter.size(); ++i) {
      series[r].x.push_back(res.trace.iter[i]);
      series[r].y.push_back(std::log10(std::max(res.trace.residual[r][i], 1e-16)));
    }
  }
  isac::write_line_chart_svg(args.out + "/convergence.svg", "consensus residuals", "iteration",
                             "log10 residual", series);
  std::printf("converged=%d iters=%zu -> %s\n", res.converged ? 1 : 0, res.trace.iter.size(),
              args.out.c_str());
  return res.converged ? 0 : 1;
}

int cmd_robustness(const GlobalArgs& args, std::vector<double> values) {
  const isac::Profile p = load_profile(args);
  if (values.empty()) values = {0.0, 1e-3, 1e-2, 1e-1, 1.0};
  const isac::ExperimentSpec spec =
      make_spec(args, p, "robustness_sigma2_csi", "sigma2_csi", values);
  const isac::RunRecord rec = isac::run_experiment(spec, p);
  isac::emit_figures(rec);
  std::printf("robustness: %zu CSI-error points x %d trials -> %s\n", values.size(),
              spec.trials, args.out.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"OFDM-ISAC hybrid beamforming designer and experiment harness"};
  app.require_subcommand(1);
  GlobalArgs args;
  std::string axis = "power_dbm";
  std::vector<double> values;

  CLI::App* solve = app.add_subcommand("solve", "solve one instance and report metrics");
  add_common(solve, args);
  CLI::App* sweep = app.add_subcommand("sweep", "Monte-Carlo sweep over a parameter axis");
  add_common(sweep, args);
  sweep->add_option("--axis", axis, "power_dbm|zeta_dbm|eta_dbm|n_rf|subcarriers|sigma2_csi");
  sweep->add_option("--values", values, "sweep points (sorted)");
  CLI::App* spectra = app.add_subcommand("spectra", "transmit-spectrum grids for all schemes");
  add_common(spectra, args);
  CLI::App* cyclic = app.add_subcommand("cyclic", "cyclic-spectrum panels for all schemes");
  add_common(cyclic, args);
  CLI::App* conv = app.add_subcommand("convergence", "single-run convergence trace");
  add_common(conv, args);
  CLI::App* robust = app.add_subcommand("robustness", "SE under imperfect CSI");
  add_common(robust, args);
  robust->add_option("--values", values, "CSI error variances");

  try {
    app.parse(argc, argv);
    if (solve->parsed()) return cmd_solve(args);
    if (sweep->parsed()) return cmd_sweep(args, axis, values);
    if (spectra->parsed()) return cmd_spectra(args);
    if (cyclic->parsed()) return cmd_cyclic(args);
    if (conv->parsed()) return cmd_convergence(args);
    if (robust->parsed()) return cmd_robustness(args, values);
    return 1;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const isac::InfeasibleProblem& e) {
    std::cerr << "infeasible: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
