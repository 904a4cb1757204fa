#include "noir/network.hpp"

#include <algorithm>
#include <queue>
#include <stdexcept>
#include <string>

namespace noir {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::invalid_argument(msg); }

}  // namespace

int Network::reduced_index(int g) const {
  if (is_outlet(g)) return -1;
  if (is_inlet(g)) return g - 1;
  return inlets_ + (g - inlets_ - outlets_ - 1);
}

int Network::global_of_reduced(int r) const {
  if (r < 0 || r >= reduced_size()) fail("reduced index out of range: " + std::to_string(r));
  return r < inlets_ ? r + 1 : r + 1 + outlets_;
}

Network build_network(std::vector<Intersection> nodes, std::vector<RoadSpec> roads) {
  std::sort(nodes.begin(), nodes.end(),
            [](const Intersection& a, const Intersection& b) { return a.id < b.id; });
  for (int i = 0; i < static_cast<int>(nodes.size()); ++i) {
    if (nodes[i].id != i + 1)
      fail("intersection ids must be exactly 1..m, got id " + std::to_string(nodes[i].id) +
           " at rank " + std::to_string(i + 1));
  }
  const int m = static_cast<int>(nodes.size());

  std::sort(roads.begin(), roads.end(),
            [](const RoadSpec& a, const RoadSpec& b) { return a.id < b.id; });
  for (int i = 0; i < static_cast<int>(roads.size()); ++i) {
    const RoadSpec& r = roads[i];
    if (r.id != i + 1)
      fail("road ids must be exactly 1..R, got id " + std::to_string(r.id) + " at rank " +
           std::to_string(i + 1));
    if (r.elements < 1)
      fail("road " + std::to_string(r.id) + " must have at least one element");
    if (r.from == kExternal && r.to == kExternal)
      fail("road " + std::to_string(r.id) + " has both endpoints external");
    for (int end : {r.from, r.to}) {
      if (end != kExternal && (end < 1 || end > m))
        fail("road " + std::to_string(r.id) + " references undeclared intersection " +
             std::to_string(end));
    }
    if (r.from == r.to)
      fail("road " + std::to_string(r.id) + " is a self-loop at intersection " +
           std::to_string(r.from));
  }

  Network net;
  net.nodes_ = std::move(nodes);
  net.roads_ = std::move(roads);
  const int R = static_cast<int>(net.roads_.size());

  net.in_roads_.assign(m, {});
  net.out_roads_.assign(m, {});
  for (const RoadSpec& r : net.roads_) {
    if (r.to != kExternal) net.in_roads_[r.to - 1].push_back(r.id);
    if (r.from != kExternal) net.out_roads_[r.from - 1].push_back(r.id);
  }

  int total = 0;
  for (const RoadSpec& r : net.roads_) total += r.elements;
  net.total_ = total;

  // First pass over road-local ids: classify each element.
  std::vector<ElementClass> cls_local(total + 1, ElementClass::Interior);
  {
    int local = 0;
    for (const RoadSpec& r : net.roads_) {
      for (int j = 1; j <= r.elements; ++j) {
        ++local;
        if (j == 1 && r.from == kExternal) cls_local[local] = ElementClass::Inlet;
        if (j == r.elements && r.to == kExternal) cls_local[local] = ElementClass::Outlet;
      }
    }
  }

  // Global renumbering: inlets, then outlets, then interior, each in
  // road-local order.
  net.global_of_.assign(total + 1, 0);
  net.local_of_.assign(total + 1, 0);
  int next = 0;
  for (ElementClass want : {ElementClass::Inlet, ElementClass::Outlet, ElementClass::Interior}) {
    for (int l = 1; l <= total; ++l) {
      if (cls_local[l] != want) continue;
      ++next;
      net.global_of_[l] = next;
      net.local_of_[next] = l;
      if (want == ElementClass::Inlet) net.inlets_ = next;
    }
    if (want == ElementClass::Outlet) net.outlets_ = next - net.inlets_;
  }

  net.class_.assign(total + 1, ElementClass::Interior);
  net.road_of_.assign(total + 1, 0);
  net.pos_of_.assign(total + 1, 0);
  net.gate_.assign(total + 1, 0);
  net.out_.assign(total + 1, {});
  net.in_.assign(total + 1, {});
  net.head_.assign(R, 0);
  net.tail_.assign(R, 0);

  {
    int local = 0;
    for (const RoadSpec& r : net.roads_) {
      for (int j = 1; j <= r.elements; ++j) {
        ++local;
        const int g = net.global_of_[local];
        net.class_[g] = cls_local[local];
        net.road_of_[g] = r.id;
        net.pos_of_[g] = j;
        if (j == 1) net.head_[r.id - 1] = g;
        if (j == r.elements) {
          net.tail_[r.id - 1] = g;
          if (r.to != kExternal) net.gate_[g] = r.to;
        }
      }
    }
  }

  auto link = [&net](int u, int v) {
    net.out_[u].push_back(v);
    net.in_[v].push_back(u);
  };
  for (const RoadSpec& r : net.roads_) {
    for (int j = 1; j < r.elements; ++j) {
      const int l = net.local_of_[net.head_[r.id - 1]] + (j - 1);
      link(net.global_of_[l], net.global_of_[l + 1]);
    }
  }
  for (const RoadSpec& r : net.roads_) {
    if (r.to == kExternal) continue;
    for (int w : net.out_roads_[r.to - 1]) link(net.tail_[r.id - 1], net.head_[w - 1]);
  }

  for (int g = 1; g <= net.inlets_; ++g) {
    const auto& outs = net.out_[g];
    if (outs.size() != 1 || net.klass(outs.empty() ? g : outs[0]) != ElementClass::Interior)
      fail("inlet element (road " + std::to_string(net.road_of_[g]) +
           ") must feed exactly one interior element");
  }

  return net;
}

std::vector<std::pair<int, int>> upstream_pairs(const Network& net) {
  std::vector<std::pair<int, int>> pairs;
  for (int g = 1; g <= net.size(); ++g)
    for (int h : net.out_neighbors(g)) pairs.emplace_back(g, h);
  return pairs;
}

std::vector<int> reachable_from_inlets(const Network& net,
                                       const std::function<bool(int, int)>& edge_active) {
  std::vector<char> seen(net.size() + 1, 0);
  std::queue<int> frontier;
  for (int g = 1; g <= net.num_inlets(); ++g) {
    seen[g] = 1;
    frontier.push(g);
  }
  while (!frontier.empty()) {
    const int u = frontier.front();
    frontier.pop();
    for (int v : net.out_neighbors(u)) {
      if (!seen[v] && edge_active(u, v)) {
        seen[v] = 1;
        frontier.push(v);
      }
    }
  }
  std::vector<int> reached;
  for (int g = 1; g <= net.size(); ++g)
    if (seen[g]) reached.push_back(g);
  return reached;
}

}  // namespace noir
