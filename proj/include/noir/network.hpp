#pragma once

#include <functional>
#include <utility>
#include <vector>

namespace noir {

/// Sentinel endpoint for roads that enter or leave the modeled area.
inline constexpr int kExternal = 0;

enum class NodeKind : unsigned char { Boundary, Connection };

struct Intersection {
  int id = 0;
  NodeKind kind = NodeKind::Connection;
};

/// One unidirectional road, discretized into `elements` serially connected
/// road elements. `from`/`to` are intersection ids or kExternal.
struct RoadSpec {
  int id = 0;
  int from = kExternal;
  int to = kExternal;
  int elements = 1;
};

enum class ElementClass : unsigned char { Inlet, Outlet, Interior };

/// Static topology of a road network: intersections, roads, and the element
/// graph obtained by chopping each road into elements.
///
/// Every element carries two ids. The road-local id enumerates elements road
/// by road in road-id order, so element j of road i sits at
/// (sum of lengths of roads 1..i-1) + j. The global id renumbers elements so
/// that index ranges are contiguous: inlets occupy 1..num_inlets(), outlets
/// the next num_outlets() slots, interior elements the rest. Matrices are
/// indexed by global id (row/col = id - 1); file formats speak road-local ids.
class Network {
 public:
  int size() const { return total_; }
  int num_inlets() const { return inlets_; }
  int num_outlets() const { return outlets_; }
  int num_interior() const { return total_ - inlets_ - outlets_; }
  /// Dimension of the state retained by the reduced dynamics (no outlets).
  int reduced_size() const { return total_ - outlets_; }

  int num_intersections() const { return static_cast<int>(nodes_.size()); }
  int num_roads() const { return static_cast<int>(roads_.size()); }
  const Intersection& intersection(int id) const { return nodes_.at(id - 1); }
  const RoadSpec& road(int id) const { return roads_.at(id - 1); }
  const std::vector<RoadSpec>& roads() const { return roads_; }

  ElementClass klass(int global_id) const { return class_.at(global_id); }
  bool is_inlet(int g) const { return g >= 1 && g <= inlets_; }
  bool is_outlet(int g) const { return g > inlets_ && g <= inlets_ + outlets_; }

  const std::vector<int>& out_neighbors(int g) const { return out_.at(g); }
  const std::vector<int>& in_neighbors(int g) const { return in_.at(g); }

  int road_of(int g) const { return road_of_.at(g); }
  int position_in_road(int g) const { return pos_of_.at(g); }
  int local_of_global(int g) const { return local_of_.at(g); }
  int global_of_local(int l) const { return global_of_.at(l); }

  /// First/last element of a road, as global ids.
  int road_head(int road_id) const { return head_.at(road_id - 1); }
  int road_tail(int road_id) const { return tail_.at(road_id - 1); }

  /// Intersection an element discharges through (0 when its outflow does not
  /// cross an intersection, i.e. mid-road elements and outlets).
  int gate_intersection(int g) const { return gate_.at(g); }

  /// Roads arriving at / leaving an intersection, ascending road id.
  const std::vector<int>& incoming_roads(int node) const { return in_roads_.at(node - 1); }
  const std::vector<int>& outgoing_roads(int node) const { return out_roads_.at(node - 1); }

  /// 0-based position of a non-outlet element in the reduced state vector.
  int reduced_index(int g) const;
  /// Global id of reduced position r.
  int global_of_reduced(int r) const;

 private:
  friend Network build_network(std::vector<Intersection> nodes, std::vector<RoadSpec> roads);

  std::vector<Intersection> nodes_;
  std::vector<RoadSpec> roads_;
  int total_ = 0;
  int inlets_ = 0;
  int outlets_ = 0;
  std::vector<ElementClass> class_;          // by global id
  std::vector<std::vector<int>> out_, in_;   // by global id
  std::vector<int> road_of_, pos_of_, local_of_, global_of_, gate_;
  std::vector<int> head_, tail_;             // by road index
  std::vector<std::vector<int>> in_roads_, out_roads_;
};

/// Assembles the element graph. Intersection ids must be exactly 1..m and
/// road ids exactly 1..R. Rejects roads with both endpoints external, roads
/// referencing undeclared intersections, non-positive lengths, and inlet
/// elements whose successor is not a unique interior element.
Network build_network(std::vector<Intersection> nodes, std::vector<RoadSpec> roads);

/// Every (upstream, downstream) element pair, i.e. every edge of the element
/// graph exactly once. Ordered by upstream global id, then stored neighbor
/// order (road-id order across intersections).
std::vector<std::pair<int, int>> upstream_pairs(const Network& net);

/// Breadth-first closure of the inlet set under an edge predicate.
/// `edge_active(u, v)` decides whether the edge u -> v may be traversed.
/// Returns reached global ids in ascending order.
std::vector<int> reachable_from_inlets(
    const Network& net, const std::function<bool(int, int)>& edge_active);

}  // namespace noir
