#pragma once

#include <string>
#include <vector>

#include "noir/conservation.hpp"
#include "noir/network.hpp"
#include "noir/phase.hpp"
#include "noir/scenario.hpp"
#include "noir/types.hpp"

namespace noir {

/// Snapshot taken after a completed step: reduced densities, the potentials
/// they induce, the demand placed at the inlets, and the road each signal is
/// serving.
struct StepRecord {
  int step = 0;
  VectorX density;
  VectorX potential;
  VectorX inflow;
  std::vector<int> active_road;
};

struct SimTrace {
  std::vector<StepRecord> records;
  int steps_run = 0;
  double dt = 1.0;
  int cadence = 1;
  double total_inflow = 0.0;   // demand integrated over the run
  double total_shed = 0.0;     // mass handed to the outlets
  double min_density = 0.0;    // over every step, recorded or not
  double max_density = 0.0;    // over every step, recorded or not
  double min_potential = 0.0;  // over recorded steps
};

/// Runs the closed loop: each step picks the signal actions by exhaustive
/// lookahead, refreshes and solves the demand program, then advances the
/// gated balance law and appends a record every `cadence` steps.
SimTrace run(const Network& net, const TendencyConfig<double>& tendency, const PhaseTable& table,
             const SimConfig& cfg);

/// Writes densities.csv, potentials.csv, inflows.csv, phases.csv and
/// summary.txt under `dir` (created if absent). Density and potential
/// columns cover every element by road-local id, with outlets pinned at 0.
/// Byte-stable for identical traces.
void emit_outputs(const SimTrace& trace, const Network& net, const PhaseTable& table,
                  const std::string& dir);

}  // namespace noir
