#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "noir/conservation.hpp"
#include "noir/network.hpp"
#include "noir/phase.hpp"
#include "noir/types.hpp"

namespace noir {

/// Closed-loop run settings. `gamma` (diagonal state penalty) and `x0`
/// (initial reduced densities) may be empty, meaning identity and zeros.
struct SimConfig {
  int steps = 50;
  double dt = 1.0;
  int cadence = 1;
  double u0 = 1.0;
  double beta = 1.0;
  int n_tau = 3;      // demand-planning horizon
  int big_n_tau = 3;  // signal-lookahead horizon
  std::uint64_t seed = 0;
  VectorX gamma;
  VectorX x0;
};

struct Scenario {
  Network net;
  TendencyConfig<double> tendency;
  PhaseTable table;
  SimConfig sim;
};

/// One parser finding, anchored to a 1-based line (0 for file-level issues)
/// and tagged with a stable rule id.
struct Diagnostic {
  int line = 0;
  std::string rule;
  std::string message;
};

struct ParseResult {
  std::optional<Scenario> scenario;
  std::vector<Diagnostic> errors;
  std::vector<Diagnostic> warnings;
};

/// Parses the line-oriented scenario format: `#` comments, `[intersections]`
/// (with `signal` lines), `[roads]`, `[phases]`, optional `[tendency]` and
/// `[params]`. Returns either a fully validated scenario or the list of
/// line-anchored diagnostics; never both.
ParseResult parse_scenario(std::string_view text);

ParseResult load_scenario(const std::string& path);

std::string format_diagnostic(const Diagnostic& d);

}  // namespace noir
