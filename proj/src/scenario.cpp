#include "noir/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace noir {

namespace {

std::vector<std::string> tokenize(std::string_view line) {
  std::vector<std::string> tokens;
  std::string cur;
  for (char c : line) {
    if (c == ' ' || c == '\t' || c == '\r') {
      if (!cur.empty()) tokens.push_back(std::move(cur)), cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

bool to_int(const std::string& s, long long& out) {
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

bool to_double(const std::string& s, double& out) {
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && std::isfinite(out);
}

struct RawSignal {
  int line = 0;
  int intersection = 0;
  int threshold = 0;
};

struct RawPhaseLine {
  int line = 0;
  int intersection = 0;
  int index = 0;
  int road = 0;
};

struct Parser {
  std::vector<Diagnostic> errors;
  std::vector<Diagnostic> warnings;

  void error(int line, std::string rule, std::string msg) {
    errors.push_back({line, std::move(rule), std::move(msg)});
  }
  void warn(int line, std::string rule, std::string msg) {
    warnings.push_back({line, std::move(rule), std::move(msg)});
  }
};

}  // namespace

std::string format_diagnostic(const Diagnostic& d) {
  std::ostringstream os;
  if (d.line > 0)
    os << "line " << d.line << ": ";
  else
    os << "file: ";
  os << d.rule << ": " << d.message;
  return os.str();
}

ParseResult parse_scenario(std::string_view text) {
  Parser ps;

  std::vector<Intersection> nodes;
  std::vector<int> node_lines;
  std::vector<RoadSpec> road_specs;
  std::vector<int> road_lines;
  std::vector<RawSignal> raw_signals;
  std::vector<RawPhaseLine> raw_phases;
  struct Override {
    int line;
    std::vector<std::string> tokens;
  };
  std::vector<Override> tendency_lines;
  std::vector<Override> param_lines;
  bool saw_intersections = false, saw_roads = false, saw_params = false;

  enum class Section { None, Intersections, Roads, Phases, Tendency, Params, Unknown };
  Section section = Section::None;

  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = text.find('\n', pos);
    std::string_view line = text.substr(pos, eol == std::string_view::npos ? text.size() - pos
                                                                           : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;

    if (const std::size_t hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);
    std::vector<std::string> tok = tokenize(line);
    if (tok.empty()) continue;

    if (tok[0].front() == '[') {
      const std::string name = tok.size() == 1 ? tok[0] : "";
      if (name == "[intersections]") {
        section = Section::Intersections;
        saw_intersections = true;
      } else if (name == "[roads]") {
        section = Section::Roads;
        saw_roads = true;
      } else if (name == "[phases]") {
        section = Section::Phases;
      } else if (name == "[tendency]") {
        section = Section::Tendency;
      } else if (name == "[params]") {
        section = Section::Params;
        saw_params = true;
      } else {
        section = Section::Unknown;
        ps.error(line_no, "UNKNOWN_SECTION", "unrecognized section header");
      }
      continue;
    }

    switch (section) {
      case Section::None:
        ps.error(line_no, "MALFORMED_LINE", "content before any section header");
        break;
      case Section::Unknown:
        break;  // section already reported
      case Section::Intersections: {
        if (tok[0] == "signal") {
          long long id = 0, tl = 0;
          if (tok.size() != 3 || !to_int(tok[1], id) || !to_int(tok[2], tl)) {
            ps.error(line_no, "MALFORMED_LINE", "expected: signal <intersection> <threshold>");
            break;
          }
          if (tl < 1) {
            ps.error(line_no, "BAD_VALUE", "signal threshold must be at least 1");
            break;
          }
          raw_signals.push_back({line_no, static_cast<int>(id), static_cast<int>(tl)});
          break;
        }
        long long id = 0;
        if (tok.size() != 2 || !to_int(tok[0], id) || (tok[1] != "B" && tok[1] != "C")) {
          ps.error(line_no, "MALFORMED_LINE", "expected: <id> B|C");
          break;
        }
        nodes.push_back({static_cast<int>(id),
                         tok[1] == "B" ? NodeKind::Boundary : NodeKind::Connection});
        node_lines.push_back(line_no);
        break;
      }
      case Section::Roads: {
        long long id = 0, ne = 0;
        long long from = 0, to = 0;
        const bool ok = tok.size() == 4 && to_int(tok[0], id) &&
                        (tok[1] == "EXT" || to_int(tok[1], from)) &&
                        (tok[2] == "EXT" || to_int(tok[2], to)) && to_int(tok[3], ne);
        if (!ok) {
          ps.error(line_no, "MALFORMED_LINE", "expected: <id> <from|EXT> <to|EXT> <elements>");
          break;
        }
        road_specs.push_back({static_cast<int>(id), tok[1] == "EXT" ? kExternal : static_cast<int>(from),
                              tok[2] == "EXT" ? kExternal : static_cast<int>(to),
                              static_cast<int>(ne)});
        road_lines.push_back(line_no);
        break;
      }
      case Section::Phases: {
        long long node = 0, index = 0, road = 0;
        if (tok.size() != 3 || !to_int(tok[0], node) || !to_int(tok[1], index) ||
            !to_int(tok[2], road)) {
          ps.error(line_no, "MALFORMED_LINE", "expected: <intersection> <phase_index> <road>");
          break;
        }
        raw_phases.push_back({line_no, static_cast<int>(node), static_cast<int>(index),
                              static_cast<int>(road)});
        break;
      }
      case Section::Tendency:
        tendency_lines.push_back({line_no, std::move(tok)});
        break;
      case Section::Params:
        param_lines.push_back({line_no, std::move(tok)});
        break;
    }
  }

  if (!saw_intersections) ps.error(0, "MISSING_SECTION", "no [intersections] section");
  if (!saw_roads) ps.error(0, "MISSING_SECTION", "no [roads] section");
  if (!ps.errors.empty()) return {std::nullopt, std::move(ps.errors), std::move(ps.warnings)};

  // Structural pre-checks with line anchors, so build_network failures that
  // a user can cause all point at the offending line.
  {
    std::vector<std::pair<int, int>> seen;  // id -> first line
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      for (const auto& [id, ln] : seen)
        if (id == nodes[i].id)
          ps.error(node_lines[i], "DUP_DEF",
                   "intersection " + std::to_string(id) + " already declared");
      seen.emplace_back(nodes[i].id, node_lines[i]);
      if (nodes[i].id < 1 || nodes[i].id > static_cast<int>(nodes.size()))
        ps.error(node_lines[i], "BAD_VALUE", "intersection ids must be 1..m");
    }
  }
  {
    std::vector<int> seen;
    const int m = static_cast<int>(nodes.size());
    for (std::size_t i = 0; i < road_specs.size(); ++i) {
      const RoadSpec& r = road_specs[i];
      const int ln = road_lines[i];
      if (std::find(seen.begin(), seen.end(), r.id) != seen.end())
        ps.error(ln, "DUP_DEF", "road " + std::to_string(r.id) + " already declared");
      seen.push_back(r.id);
      if (r.id < 1 || r.id > static_cast<int>(road_specs.size()))
        ps.error(ln, "BAD_VALUE", "road ids must be 1..R");
      if (r.elements < 1) ps.error(ln, "BAD_VALUE", "road needs at least one element");
      if (r.from == kExternal && r.to == kExternal)
        ps.error(ln, "BAD_VALUE", "road cannot have both endpoints external");
      for (int end : {r.from, r.to})
        if (end != kExternal && (end < 1 || end > m))
          ps.error(ln, "BAD_REF", "undeclared intersection " + std::to_string(end));
      if (r.from == r.to && r.from != kExternal)
        ps.error(ln, "BAD_VALUE", "road cannot loop back to its own intersection");
    }
  }
  if (!ps.errors.empty()) return {std::nullopt, std::move(ps.errors), std::move(ps.warnings)};

  Network net;
  try {
    net = build_network(nodes, road_specs);
  } catch (const std::invalid_argument& ex) {
    ps.error(0, "NET_INVALID", ex.what());
    return {std::nullopt, std::move(ps.errors), std::move(ps.warnings)};
  }

  // Signals and their phase cycles.
  std::vector<SignalSchedule> schedules;
  for (const RawSignal& s : raw_signals) {
    if (s.intersection < 1 || s.intersection > net.num_intersections()) {
      ps.error(s.line, "BAD_REF", "signal at undeclared intersection " +
                                      std::to_string(s.intersection));
      continue;
    }
    bool dup = false;
    for (const SignalSchedule& prev : schedules)
      dup = dup || prev.intersection == s.intersection;
    if (dup) {
      ps.error(s.line, "DUP_DEF",
               "intersection " + std::to_string(s.intersection) + " already has a signal");
      continue;
    }
    for (int road : net.incoming_roads(s.intersection)) {
      const RoadSpec& r = net.road(road);
      if (r.from == kExternal && r.elements == 1)
        ps.error(s.line, "SIGNAL_INLET",
                 "signal would gate inlet element of road " + std::to_string(road));
    }
    SignalSchedule sched;
    sched.intersection = s.intersection;
    sched.threshold = s.threshold;

    std::map<int, std::vector<int>> by_index;
    for (const RawPhaseLine& ph : raw_phases) {
      if (ph.intersection != s.intersection) continue;
      const auto& incoming = net.incoming_roads(s.intersection);
      if (ph.road < 1 || ph.road > net.num_roads() ||
          std::find(incoming.begin(), incoming.end(), ph.road) == incoming.end()) {
        ps.error(ph.line, "PHASE_ROAD", "road " + std::to_string(ph.road) +
                                            " does not arrive at intersection " +
                                            std::to_string(s.intersection));
        continue;
      }
      by_index[ph.index].push_back(ph.road);
    }
    if (by_index.empty()) {
      ps.error(s.line, "PHASE_MISSING",
               "no phases declared for signalized intersection " +
                   std::to_string(s.intersection));
      continue;
    }
    int expect = 1;
    bool ordered = true;
    for (const auto& [index, roads] : by_index) {
      if (index != expect++) ordered = false;
      sched.cycle.push_back(roads);
    }
    if (!ordered) {
      ps.error(s.line, "PHASE_ORDER", "phase indices at intersection " +
                                          std::to_string(s.intersection) +
                                          " must be contiguous from 1");
      continue;
    }
    schedules.push_back(std::move(sched));
  }
  for (const RawPhaseLine& ph : raw_phases) {
    bool known = false;
    for (const RawSignal& s : raw_signals) known = known || s.intersection == ph.intersection;
    if (!known)
      ps.error(ph.line, "PHASE_SIGNAL", "phases declared for unsignalized intersection " +
                                            std::to_string(ph.intersection));
  }
  if (!ps.errors.empty()) return {std::nullopt, std::move(ps.errors), std::move(ps.warnings)};

  PhaseTable table;
  try {
    table = PhaseTable(net, schedules);
  } catch (const std::invalid_argument& ex) {
    ps.error(0, "PHASE_CYCLE", ex.what());
    return {std::nullopt, std::move(ps.errors), std::move(ps.warnings)};
  }

  // Tendency overrides on top of the defaults.
  TendencyConfig<double> tendency = default_tendency<double>(net);
  SimConfig sim;
  sim.x0 = VectorX::Zero(net.reduced_size());
  std::vector<char> x_explicit(net.reduced_size(), 0);
  std::map<int, int> last_q_line;
  auto local_ok = [&](long long l) { return l >= 1 && l <= net.size(); };

  for (const auto& ov : tendency_lines) {
    const auto& tok = ov.tokens;
    if (tok[0] == "p") {
      long long l = 0;
      double v = 0;
      if (tok.size() != 3 || !to_int(tok[1], l) || !to_double(tok[2], v)) {
        ps.error(ov.line, "MALFORMED_LINE", "expected: p <element> <value>");
        continue;
      }
      if (!local_ok(l)) {
        ps.error(ov.line, "BAD_REF", "no element with id " + tok[1]);
        continue;
      }
      const int g = net.global_of_local(static_cast<int>(l));
      if (v < 0.0 || v > 1.0) {
        ps.error(ov.line, "BAD_VALUE", "release must lie in [0,1]");
        continue;
      }
      if (net.klass(g) != ElementClass::Interior && v != 1.0) {
        ps.error(ov.line, "BAD_VALUE", "boundary elements must keep unit release");
        continue;
      }
      tendency.release[g - 1] = v;
    } else if (tok[0] == "q") {
      long long from = 0, to = 0;
      double v = 0;
      if (tok.size() != 4 || !to_int(tok[1], from) || !to_int(tok[2], to) ||
          !to_double(tok[3], v)) {
        ps.error(ov.line, "MALFORMED_LINE", "expected: q <from_element> <to_element> <value>");
        continue;
      }
      if (!local_ok(from) || !local_ok(to)) {
        ps.error(ov.line, "BAD_REF", "no such element pair");
        continue;
      }
      if (v < 0.0) {
        ps.error(ov.line, "BAD_VALUE", "turn ratio must be nonnegative");
        continue;
      }
      const int gf = net.global_of_local(static_cast<int>(from));
      const int gt = net.global_of_local(static_cast<int>(to));
      const auto& outs = net.out_neighbors(gf);
      const auto it = std::find(outs.begin(), outs.end(), gt);
      if (it == outs.end()) {
        ps.error(ov.line, "BAD_REF", "elements " + tok[1] + " and " + tok[2] +
                                         " are not connected");
        continue;
      }
      tendency.split[gf - 1][it - outs.begin()] = v;
      last_q_line[gf] = ov.line;
    } else if (tok[0] == "x") {
      long long l = 0;
      double v = 0;
      if (tok.size() != 3 || !to_int(tok[1], l) || !to_double(tok[2], v)) {
        ps.error(ov.line, "MALFORMED_LINE", "expected: x <element> <value>");
        continue;
      }
      if (!local_ok(l)) {
        ps.error(ov.line, "BAD_REF", "no element with id " + tok[1]);
        continue;
      }
      const int g = net.global_of_local(static_cast<int>(l));
      if (net.reduced_index(g) < 0) {
        ps.error(ov.line, "BAD_REF", "outlet elements carry no state");
        continue;
      }
      if (v < 0.0) {
        ps.error(ov.line, "BAD_VALUE", "density must be nonnegative");
        continue;
      }
      sim.x0[net.reduced_index(g)] = v;
      x_explicit[net.reduced_index(g)] = 1;
    } else {
      ps.error(ov.line, "MALFORMED_LINE", "unknown tendency directive '" + tok[0] + "'");
    }
  }
  for (const auto& [gf, ln] : last_q_line) {
    double sum = 0;
    for (double v : tendency.split[gf - 1]) sum += v;
    if (tendency.release[gf - 1] > 0.0 && std::abs(sum - 1.0) > 1e-9)
      ps.error(ln, "BAD_VALUE", "turn ratios leaving element " +
                                    std::to_string(net.local_of_global(gf)) +
                                    " must sum to 1");
  }

  // Parameters.
  double rho0 = 0.0;
  bool have_rho0 = false;
  std::vector<std::pair<int, double>> gamma_over;
  std::map<std::string, int> seen_params;
  for (const auto& ov : param_lines) {
    const auto& tok = ov.tokens;
    const std::string& key = tok[0];
    if (key == "gamma") {
      long long l = 0;
      double v = 0;
      if (tok.size() != 3 || !to_int(tok[1], l) || !to_double(tok[2], v)) {
        ps.error(ov.line, "MALFORMED_LINE", "expected: gamma <element> <value>");
        continue;
      }
      if (!local_ok(l) || net.reduced_index(net.global_of_local(static_cast<int>(l))) < 0) {
        ps.error(ov.line, "BAD_REF", "gamma must target a non-outlet element");
        continue;
      }
      if (v < 0.0) {
        ps.error(ov.line, "BAD_VALUE", "gamma must be nonnegative");
        continue;
      }
      gamma_over.emplace_back(net.reduced_index(net.global_of_local(static_cast<int>(l))), v);
      continue;
    }
    if (tok.size() != 2) {
      ps.error(ov.line, "MALFORMED_LINE", "expected: <key> <value>");
      continue;
    }
    if (seen_params.count(key)) {
      ps.error(ov.line, "DUP_DEF", "parameter '" + key + "' already set");
      continue;
    }
    seen_params[key] = ov.line;
    long long iv = 0;
    double dv = 0;
    if (key == "u0" && to_double(tok[1], dv) && dv > 0) {
      sim.u0 = dv;
    } else if (key == "dt" && to_double(tok[1], dv) && dv > 0 && dv <= 1.0) {
      sim.dt = dv;
    } else if (key == "beta" && to_double(tok[1], dv) && dv > 0) {
      sim.beta = dv;
    } else if (key == "n_tau" && to_int(tok[1], iv) && iv >= 1) {
      sim.n_tau = static_cast<int>(iv);
    } else if (key == "N_tau" && to_int(tok[1], iv) && iv >= 1) {
      sim.big_n_tau = static_cast<int>(iv);
    } else if (key == "steps" && to_int(tok[1], iv) && iv >= 0) {
      sim.steps = static_cast<int>(iv);
    } else if (key == "cadence" && to_int(tok[1], iv) && iv >= 1) {
      sim.cadence = static_cast<int>(iv);
    } else if (key == "seed" && to_int(tok[1], iv) && iv >= 0) {
      sim.seed = static_cast<std::uint64_t>(iv);
    } else if (key == "rho0" && to_double(tok[1], dv) && dv >= 0) {
      rho0 = dv;
      have_rho0 = true;
    } else if (key == "u0" || key == "dt" || key == "beta" || key == "n_tau" ||
               key == "N_tau" || key == "steps" || key == "cadence" || key == "seed" ||
               key == "rho0") {
      ps.error(ov.line, "BAD_VALUE", "out-of-range value for '" + key + "'");
    } else {
      ps.error(ov.line, "PARAM_UNKNOWN", "unknown parameter '" + key + "'");
    }
  }
  if (!saw_params) ps.warn(0, "MISSING_PARAMS", "no [params] section; defaults applied");

  if (have_rho0) {
    for (int i = 0; i < net.reduced_size(); ++i)
      if (!x_explicit[i]) sim.x0[i] = rho0;
  }
  if (!gamma_over.empty()) {
    sim.gamma = VectorX::Ones(net.reduced_size());
    for (const auto& [idx, v] : gamma_over) sim.gamma[idx] = v;
  }

  if (!ps.errors.empty()) return {std::nullopt, std::move(ps.errors), std::move(ps.warnings)};

  try {
    validate_tendency(net, tendency);
  } catch (const std::invalid_argument& ex) {
    ps.error(0, "BAD_VALUE", ex.what());
    return {std::nullopt, std::move(ps.errors), std::move(ps.warnings)};
  }

  Scenario sc;
  sc.net = std::move(net);
  sc.tendency = std::move(tendency);
  sc.table = std::move(table);
  sc.sim = std::move(sim);
  return {std::move(sc), {}, std::move(ps.warnings)};
}

ParseResult load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    ParseResult r;
    r.errors.push_back({0, "IO", "cannot open '" + path + "'"});
    return r;
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

}  // namespace noir
