#include "noir/simulate.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "noir/conduction.hpp"
#include "noir/mpc.hpp"
#include "noir/rho.hpp"

namespace noir {

SimTrace run(const Network& net, const TendencyConfig<double>& tendency, const PhaseTable& table,
             const SimConfig& cfg) {
  validate_tendency(net, tendency);
  if (cfg.steps < 0) throw std::invalid_argument("step count must be nonnegative");
  if (cfg.cadence < 1) throw std::invalid_argument("cadence must be at least 1");

  const int r = net.reduced_size();
  const int n_in = net.num_inlets();
  if (n_in == 0) throw std::invalid_argument("closed-loop run needs at least one inlet");

  VectorX x = cfg.x0.size() == 0 ? VectorX::Zero(r) : cfg.x0;
  if (x.size() != r) throw std::invalid_argument("initial state size does not match network");

  const AverageDynamics<double> avg = average_dynamics(net, tendency, table);
  const MatrixX L = conduction_matrix<double>(net);
  const Eigen::PartialPivLU<MatrixX> lu(L);

  MatrixX state_map = MatrixX::Identity(r, r) + cfg.dt * avg.generator;
  MatrixX input_map = MatrixX::Zero(r, n_in);
  input_map.topLeftCorner(n_in, n_in) = cfg.dt * MatrixX::Identity(n_in, n_in);

  MpcConfig<double> mpc_cfg;
  mpc_cfg.horizon = cfg.n_tau;
  mpc_cfg.weight = cfg.beta;
  mpc_cfg.budget = cfg.u0;
  MpcProblem<double> prob = build_problem(state_map, input_map, x, mpc_cfg);

  RhoConfig<double> rho_cfg;
  rho_cfg.horizon = cfg.big_n_tau;
  rho_cfg.weight = cfg.gamma;

  const GatedStepper<double> stepper(net, tendency);
  PhaseState st = initial_state(table);
  VectorX u_prev = VectorX::Constant(n_in, cfg.u0 / n_in);
  std::optional<VectorX> warm;

  SimTrace trace;
  trace.dt = cfg.dt;
  trace.cadence = cfg.cadence;
  trace.min_density = x.size() > 0 ? x.minCoeff() : 0.0;
  trace.max_density = x.size() > 0 ? x.maxCoeff() : 0.0;
  trace.min_potential = std::numeric_limits<double>::infinity();
  trace.records.reserve(cfg.steps / cfg.cadence + 1);

  std::vector<std::uint8_t> mask;
  VectorX x_next(r);

  for (int k = 1; k <= cfg.steps; ++k) {
    const RhoDecision<double> dec =
        choose_action(net, tendency, table, st, x, u_prev, cfg.dt, rho_cfg);
    st = step_phases(table, st, dec.action);
    gating_into(table, net, st.active, mask);

    refresh_linear(prob, x);
    const MpcSolution<double> sol = solve_plan(prob, mpc_cfg, warm);
    const VectorX u = actuate(sol, n_in, cfg.u0);
    if (cfg.n_tau > 1) {
      VectorX shifted(sol.plan.size());
      shifted.head(sol.plan.size() - n_in) = sol.plan.tail(sol.plan.size() - n_in);
      shifted.tail(n_in) = sol.plan.tail(n_in);
      warm = std::move(shifted);
    } else {
      warm = sol.plan;
    }

    stepper.step(mask, x, u, cfg.dt, x_next, &trace.total_shed);
    x.swap(x_next);
    trace.total_inflow += cfg.dt * u.sum();
    trace.min_density = std::min(trace.min_density, x.minCoeff());
    trace.max_density = std::max(trace.max_density, x.maxCoeff());

    if ((k - 1) % cfg.cadence == 0) {
      StepRecord rec;
      rec.step = k;
      rec.density = x;
      rec.potential = potentials_from_density(lu, avg.discharge, x);
      rec.inflow = u;
      rec.active_road.resize(table.num_signals());
      for (int s = 0; s < table.num_signals(); ++s) {
        const auto& grant = table.signal(s).cycle[st.active[s]];
        rec.active_road[s] = *std::min_element(grant.begin(), grant.end());
      }
      trace.min_potential = std::min(trace.min_potential, rec.potential.minCoeff());
      trace.records.push_back(std::move(rec));
    }
    u_prev = u;
    trace.steps_run = k;
  }
  if (trace.records.empty()) trace.min_potential = 0.0;
  return trace;
}

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.15g", v);
  return buf;
}

class Csv {
 public:
  explicit Csv(const std::filesystem::path& path) : out_(path, std::ios::binary) {
    if (!out_) throw std::runtime_error("cannot write '" + path.string() + "'");
  }
  void cell(const std::string& s) {
    if (!first_) out_ << ',';
    out_ << s;
    first_ = false;
  }
  void cell(int v) { cell(std::to_string(v)); }
  void cell(double v) { cell(fmt(v)); }
  void endrow() {
    out_ << '\n';
    first_ = true;
  }

 private:
  std::ofstream out_;
  bool first_ = true;
};

}  // namespace

void emit_outputs(const SimTrace& trace, const Network& net, const PhaseTable& table,
                  const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);

  {
    Csv densities(fs::path(dir) / "densities.csv");
    Csv potentials(fs::path(dir) / "potentials.csv");
    for (Csv* csv : {&densities, &potentials}) {
      csv->cell("step");
      for (int l = 1; l <= net.size(); ++l) csv->cell(l);
      csv->endrow();
    }
    for (const StepRecord& rec : trace.records) {
      densities.cell(rec.step);
      potentials.cell(rec.step);
      for (int l = 1; l <= net.size(); ++l) {
        const int ri = net.reduced_index(net.global_of_local(l));
        densities.cell(ri < 0 ? 0.0 : rec.density[ri]);
        potentials.cell(ri < 0 ? 0.0 : rec.potential[ri]);
      }
      densities.endrow();
      potentials.endrow();
    }
  }

  {
    Csv inflows(fs::path(dir) / "inflows.csv");
    inflows.cell("step");
    for (int g = 1; g <= net.num_inlets(); ++g) inflows.cell(net.local_of_global(g));
    inflows.endrow();
    for (const StepRecord& rec : trace.records) {
      inflows.cell(rec.step);
      for (int i = 0; i < net.num_inlets(); ++i) inflows.cell(rec.inflow[i]);
      inflows.endrow();
    }
  }

  {
    Csv phases(fs::path(dir) / "phases.csv");
    phases.cell("step");
    for (int s = 0; s < table.num_signals(); ++s) phases.cell(table.signal(s).intersection);
    phases.endrow();
    for (const StepRecord& rec : trace.records) {
      phases.cell(rec.step);
      for (int road : rec.active_road) phases.cell(road);
      phases.endrow();
    }
  }

  {
    std::ofstream summary(fs::path(dir) / "summary.txt", std::ios::binary);
    if (!summary) throw std::runtime_error("cannot write summary.txt");
    summary << "steps_run " << trace.steps_run << '\n'
            << "records " << trace.records.size() << '\n'
            << "cadence " << trace.cadence << '\n'
            << "dt " << fmt(trace.dt) << '\n'
            << "total_inflow " << fmt(trace.total_inflow) << '\n'
            << "total_shed " << fmt(trace.total_shed) << '\n'
            << "min_density " << fmt(trace.min_density) << '\n'
            << "max_density " << fmt(trace.max_density) << '\n'
            << "min_potential " << fmt(trace.min_potential) << '\n';
    if (!trace.records.empty()) {
      const StepRecord& last = trace.records.back();
      summary << "final_total_density " << fmt(last.density.sum()) << '\n'
              << "final_max_potential " << fmt(last.potential.maxCoeff()) << '\n';
    }
  }
}

}  // namespace noir
