#pragma once

#include <random>
#include <vector>

#include "noir/conservation.hpp"
#include "noir/network.hpp"
#include "noir/phase.hpp"

namespace fixtures {

struct Fixture {
  noir::Network net;
  noir::TendencyConfig<double> tendency;
  noir::PhaseTable table;
};

// Chain: road 1 EXT->v (2 elements), road 2 v->EXT (1 element).
// Globals after renumbering: 1 = inlet, 2 = outlet, 3 = mid-road interior.
inline Fixture t1prime(double p_interior = 0.5) {
  Fixture f;
  f.net = noir::build_network({{1, noir::NodeKind::Connection}},
                              {{1, noir::kExternal, 1, 2}, {2, 1, noir::kExternal, 1}});
  f.tendency = noir::default_tendency<double>(f.net);
  f.tendency.release[2] = p_interior;  // global 3
  f.table = noir::PhaseTable(f.net, {});
  return f;
}

// Y-junction: inlet roads 1 and 2 (2 elements each) meet signalized
// intersection 1; road 3 (2 elements) leaves to EXT. Phase 1 grants road 1,
// phase 2 grants road 2. Globals: inlets 1,2; outlet 3; interior 4 (tail of
// road 1), 5 (tail of road 2), 6 (head of road 3).
inline Fixture t2(int threshold = 3, double p_interior = 0.8) {
  Fixture f;
  f.net = noir::build_network({{1, noir::NodeKind::Connection}},
                              {{1, noir::kExternal, 1, 2},
                               {2, noir::kExternal, 1, 2},
                               {3, 1, noir::kExternal, 2}});
  f.tendency = noir::default_tendency<double>(f.net, p_interior);
  f.table = noir::PhaseTable(f.net, {{1, threshold, {{1}, {2}}}});
  return f;
}

// Three signalized junctions in a row, each also fed by its own side inlet:
// roads 1,2 -> node 1; node 1 -> node 2 (road 3) joined by inlet road 4;
// node 2 -> node 3 (road 5) joined by inlet road 6; road 7 leaves node 3.
inline Fixture three_signals(int threshold = 2) {
  Fixture f;
  f.net = noir::build_network({{1, noir::NodeKind::Connection},
                               {2, noir::NodeKind::Connection},
                               {3, noir::NodeKind::Connection}},
                              {{1, noir::kExternal, 1, 2},
                               {2, noir::kExternal, 1, 2},
                               {3, 1, 2, 2},
                               {4, noir::kExternal, 2, 2},
                               {5, 2, 3, 2},
                               {6, noir::kExternal, 3, 2},
                               {7, 3, noir::kExternal, 2}});
  f.tendency = noir::default_tendency<double>(f.net);
  f.table = noir::PhaseTable(f.net, {{1, threshold, {{1}, {2}}},
                                     {2, threshold, {{3}, {4}}},
                                     {3, threshold, {{5}, {6}}}});
  return f;
}

// Random layered network, always valid for build_network: intersections in
// layers, roads only flow toward later layers, inlet roads are at least two
// elements long. Node count and road lengths are kept small enough that the
// element count stays below 60.
inline Fixture random_network(std::mt19937_64& rng, bool with_signals) {
  auto pick = [&rng](int lo, int hi) {
    return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
  };

  while (true) {
    const int layers = pick(2, 3);
    std::vector<std::vector<int>> layer_nodes(layers);
    int m = 0;
    for (int l = 0; l < layers; ++l) {
      const int sz = pick(1, 3);
      for (int i = 0; i < sz; ++i) layer_nodes[l].push_back(++m);
    }

    std::vector<noir::Intersection> nodes;
    for (int id = 1; id <= m; ++id)
      nodes.push_back({id, id <= static_cast<int>(layer_nodes[0].size())
                               ? noir::NodeKind::Boundary
                               : noir::NodeKind::Connection});

    std::vector<noir::RoadSpec> roads;
    int next_id = 0;
    std::vector<int> indeg(m + 1, 0);
    for (int v : layer_nodes[0]) {
      roads.push_back({++next_id, noir::kExternal, v, pick(2, 3)});
      indeg[v]++;
    }
    for (int l = 0; l + 1 < layers; ++l) {
      for (int v : layer_nodes[l]) {
        const int fanout = pick(1, 2);
        for (int e = 0; e < fanout; ++e) {
          const auto& below = layer_nodes[l + 1];
          const int w = below[pick(0, static_cast<int>(below.size()) - 1)];
          roads.push_back({++next_id, v, w, pick(1, 3)});
          indeg[w]++;
        }
      }
    }
    for (int l = 1; l < layers; ++l)
      for (int v : layer_nodes[l])
        if (indeg[v] == 0) {
          roads.push_back({++next_id, noir::kExternal, v, pick(2, 3)});
          indeg[v]++;
        }
    for (int v : layer_nodes[layers - 1])
      roads.push_back({++next_id, v, noir::kExternal, pick(1, 3)});

    int total = 0;
    for (const auto& r : roads) total += r.elements;
    if (total > 60) continue;

    Fixture f;
    f.net = noir::build_network(nodes, roads);

    f.tendency = noir::default_tendency<double>(f.net);
    std::uniform_real_distribution<double> rel(0.3, 1.0);
    std::uniform_real_distribution<double> wt(0.2, 1.2);
    for (int g = 1; g <= f.net.size(); ++g) {
      if (f.net.klass(g) == noir::ElementClass::Interior) f.tendency.release[g - 1] = rel(rng);
      auto& row = f.tendency.split[g - 1];
      if (row.size() > 1) {
        double sum = 0;
        for (double& q : row) sum += (q = wt(rng));
        for (double& q : row) q /= sum;
      }
    }

    std::vector<noir::SignalSchedule> schedules;
    if (with_signals) {
      for (int v = 1; v <= m; ++v) {
        const auto& in = f.net.incoming_roads(v);
        if (in.size() < 2 || pick(0, 9) < 3) continue;
        noir::SignalSchedule s;
        s.intersection = v;
        s.threshold = pick(1, 3);
        for (int r : in) s.cycle.push_back({r});
        schedules.push_back(std::move(s));
      }
    }
    f.table = noir::PhaseTable(f.net, std::move(schedules));
    return f;
  }
}

}  // namespace fixtures
