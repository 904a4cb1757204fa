#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "noir/conduction.hpp"
#include "noir/conservation.hpp"
#include "noir/mpc.hpp"
#include "noir/scenario.hpp"
#include "noir/simulate.hpp"

namespace {

int report(const noir::ParseResult& parsed) {
  for (const noir::Diagnostic& d : parsed.warnings)
    std::cerr << "warning: " << noir::format_diagnostic(d) << '\n';
  for (const noir::Diagnostic& d : parsed.errors)
    std::cerr << "error: " << noir::format_diagnostic(d) << '\n';
  return parsed.scenario ? 0 : 1;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

int cmd_validate(const std::string& file) {
  const noir::ParseResult parsed = noir::load_scenario(file);
  if (report(parsed) != 0) return 1;
  const noir::Scenario& sc = *parsed.scenario;
  std::cout << "ok: " << sc.net.size() << " elements (" << sc.net.num_inlets() << " in, "
            << sc.net.num_outlets() << " out), " << sc.net.num_roads() << " roads, "
            << sc.table.num_signals() << " signals, |phase space| "
            << noir::phase_space_size(sc.table) << '\n';
  return 0;
}

int cmd_simulate(const std::string& file, const std::string& out_dir, int steps_override) {
  noir::ParseResult parsed = noir::load_scenario(file);
  if (report(parsed) != 0) return 1;
  noir::Scenario& sc = *parsed.scenario;
  if (steps_override >= 0) sc.sim.steps = steps_override;
  const noir::SimTrace trace = noir::run(sc.net, sc.tendency, sc.table, sc.sim);
  noir::emit_outputs(trace, sc.net, sc.table, out_dir);
  std::cout << "ran " << trace.steps_run << " steps, recorded " << trace.records.size()
            << " rows, min density " << fmt(trace.min_density) << ", shed "
            << fmt(trace.total_shed) << " to outlets, outputs in " << out_dir << '\n';
  return 0;
}

int cmd_spectrum(const std::string& file) {
  const noir::ParseResult parsed = noir::load_scenario(file);
  if (report(parsed) != 0) return 1;
  const noir::Scenario& sc = *parsed.scenario;

  const noir::MatrixX L = noir::conduction_matrix<double>(sc.net);
  Eigen::EigenSolver<noir::MatrixX> eig_l(L, false);
  std::cout << "L: " << L.rows() << "x" << L.cols() << ", re(eig) in ["
            << fmt(eig_l.eigenvalues().real().minCoeff()) << ", "
            << fmt(eig_l.eigenvalues().real().maxCoeff()) << "]\n";

  const noir::AverageDynamics<double> avg =
      noir::average_dynamics(sc.net, sc.tendency, sc.table);
  Eigen::EigenSolver<noir::MatrixX> eig_q(avg.generator, false);
  std::cout << "Qbar: abscissa " << fmt(eig_q.eigenvalues().real().maxCoeff()) << '\n';

  const std::uint64_t count = noir::phase_space_size(sc.table);
  if (count > 1024) {
    std::cout << "phase-by-phase spectra skipped (" << count << " joint phases)\n";
    return 0;
  }
  const auto tuples = noir::enumerate_active_tuples(sc.table);
  for (std::size_t i = 0; i < tuples.size(); ++i) {
    const auto mask = noir::gating_for_phases(sc.table, sc.net, tuples[i]);
    const auto rep = noir::stability_report(sc.net, sc.tendency, mask);
    std::cout << "phase " << i << ": abscissa " << fmt(rep.abscissa)
              << (rep.drains ? ", drains" : ", trapped")
              << (rep.inlet_connected ? ", inlet-connected" : ", inlet-cut") << '\n';
  }
  return 0;
}

int cmd_mpc_solve(const std::string& file, const std::string& state_file) {
  const noir::ParseResult parsed = noir::load_scenario(file);
  if (report(parsed) != 0) return 1;
  const noir::Scenario& sc = *parsed.scenario;
  const int r = sc.net.reduced_size();
  const int n_in = sc.net.num_inlets();

  std::ifstream in(state_file);
  if (!in) {
    std::cerr << "error: cannot open '" << state_file << "'\n";
    return 1;
  }
  std::vector<double> vals;
  std::string tok;
  while (std::getline(in, tok, ',')) {
    std::istringstream ss(tok);
    double v;
    while (ss >> v) vals.push_back(v);
  }
  if (static_cast<int>(vals.size()) != r) {
    std::cerr << "error: state file has " << vals.size() << " values, expected " << r << '\n';
    return 1;
  }
  noir::VectorX x(r);
  for (int i = 0; i < r; ++i) x[i] = vals[i];

  const noir::AverageDynamics<double> avg =
      noir::average_dynamics(sc.net, sc.tendency, sc.table);
  noir::MatrixX state_map = noir::MatrixX::Identity(r, r) + sc.sim.dt * avg.generator;
  noir::MatrixX input_map = noir::MatrixX::Zero(r, n_in);
  input_map.topLeftCorner(n_in, n_in) = sc.sim.dt * noir::MatrixX::Identity(n_in, n_in);

  noir::MpcConfig<double> cfg;
  cfg.horizon = sc.sim.n_tau;
  cfg.weight = sc.sim.beta;
  cfg.budget = sc.sim.u0;
  const auto prob = noir::build_problem(state_map, input_map, x, cfg);
  const auto sol = noir::solve_plan(prob, cfg);

  std::cout << "converged in " << sol.iterations << " iterations, residual "
            << fmt(sol.residual) << '\n';
  for (int t = 0; t < cfg.horizon; ++t) {
    std::cout << "u[k+" << t << "]:";
    for (int i = 0; i < n_in; ++i) std::cout << ' ' << fmt(sol.plan[t * n_in + i]);
    std::cout << '\n';
  }
  const noir::VectorX u = noir::actuate(sol, n_in, cfg.budget);
  std::cout << "actuated:";
  for (int i = 0; i < n_in; ++i) std::cout << ' ' << fmt(u[i]);
  std::cout << " (sum " << fmt(u.sum()) << ")\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"road-network balance-law toolkit"};
  app.require_subcommand(1);

  std::string file, out_dir = "out", state_file;
  int steps_override = -1;

  CLI::App* validate = app.add_subcommand("validate", "parse a scenario and report diagnostics");
  validate->add_option("file", file)->required();

  CLI::App* simulate = app.add_subcommand("simulate", "run the closed loop and write CSVs");
  simulate->add_option("file", file)->required();
  simulate->add_option("--out", out_dir, "output directory");
  simulate->add_option("--steps", steps_override, "override the scenario step count");

  CLI::App* spectrum = app.add_subcommand("spectrum", "print eigenvalue summaries");
  spectrum->add_option("file", file)->required();

  CLI::App* mpc = app.add_subcommand("mpc-solve", "solve one demand program");
  mpc->add_option("file", file)->required();
  mpc->add_option("--state", state_file, "CSV of reduced densities")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (validate->parsed()) return cmd_validate(file);
    if (simulate->parsed()) return cmd_simulate(file, out_dir, steps_override);
    if (spectrum->parsed()) return cmd_spectrum(file);
    if (mpc->parsed()) return cmd_mpc_solve(file, state_file);
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return 1;
  }
  return 0;
}
