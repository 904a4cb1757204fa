#include <doctest.h>

#include <stdexcept>

#include "noir/network.hpp"
#include "support/fixtures.hpp"

using namespace noir;

TEST_CASE("road with both endpoints external is rejected") {
  CHECK_THROWS_AS(build_network({}, {{1, kExternal, kExternal, 3}}), std::invalid_argument);
}

TEST_CASE("chain fixture partitions and renumbers elements") {
  const Network net = fixtures::t1prime().net;
  CHECK(net.size() == 3);
  CHECK(net.num_inlets() == 1);
  CHECK(net.num_outlets() == 1);
  CHECK(net.num_interior() == 1);
  CHECK(net.reduced_size() == 2);

  CHECK(net.klass(1) == ElementClass::Inlet);
  CHECK(net.klass(2) == ElementClass::Outlet);
  CHECK(net.klass(3) == ElementClass::Interior);

  // Road 1 holds locals 1,2; road 2 holds local 3. The interior element is
  // local 2, the outlet local 3.
  CHECK(net.global_of_local(1) == 1);
  CHECK(net.global_of_local(2) == 3);
  CHECK(net.global_of_local(3) == 2);
  CHECK(net.local_of_global(1) == 1);
  CHECK(net.local_of_global(2) == 3);
  CHECK(net.local_of_global(3) == 2);

  CHECK(net.road_of(3) == 1);
  CHECK(net.position_in_road(3) == 2);
  CHECK(net.road_head(1) == 1);
  CHECK(net.road_tail(1) == 3);
  CHECK(net.road_head(2) == 2);
  CHECK(net.road_tail(2) == 2);

  CHECK(net.gate_intersection(3) == 1);
  CHECK(net.gate_intersection(1) == 0);
  CHECK(net.gate_intersection(2) == 0);

  CHECK(net.reduced_index(1) == 0);
  CHECK(net.reduced_index(3) == 1);
  CHECK(net.reduced_index(2) == -1);
  CHECK(net.global_of_reduced(0) == 1);
  CHECK(net.global_of_reduced(1) == 3);
}

TEST_CASE("chain fixture edge list") {
  const Network net = fixtures::t1prime().net;
  const auto pairs = upstream_pairs(net);
  REQUIRE(pairs.size() == 2);
  CHECK(pairs[0] == std::pair<int, int>{1, 3});
  CHECK(pairs[1] == std::pair<int, int>{3, 2});
}

TEST_CASE("junction fixture layout") {
  const Network net = fixtures::t2().net;
  CHECK(net.size() == 6);
  CHECK(net.num_inlets() == 2);
  CHECK(net.num_outlets() == 1);
  CHECK(net.reduced_size() == 5);

  CHECK(net.road_tail(1) == 4);
  CHECK(net.road_tail(2) == 5);
  CHECK(net.road_head(3) == 6);
  CHECK(net.road_tail(3) == 3);

  const auto pairs = upstream_pairs(net);
  REQUIRE(pairs.size() == 5);
  CHECK(pairs[0] == std::pair<int, int>{1, 4});
  CHECK(pairs[1] == std::pair<int, int>{2, 5});
  CHECK(pairs[2] == std::pair<int, int>{4, 6});
  CHECK(pairs[3] == std::pair<int, int>{5, 6});
  CHECK(pairs[4] == std::pair<int, int>{6, 3});

  CHECK(net.incoming_roads(1) == std::vector<int>{1, 2});
  CHECK(net.outgoing_roads(1) == std::vector<int>{3});
  CHECK(net.in_neighbors(6) == std::vector<int>{4, 5});
}

TEST_CASE("closure under edge predicates") {
  const Network t1 = fixtures::t1prime().net;
  CHECK(reachable_from_inlets(t1, [](int, int) { return true; }) ==
        std::vector<int>{1, 2, 3});

  const Network t2 = fixtures::t2().net;
  CHECK(reachable_from_inlets(t2, [](int, int) { return true; }) ==
        std::vector<int>{1, 2, 3, 4, 5, 6});
  // Both junction tails held red: the downstream road head is unreachable.
  const auto blocked =
      reachable_from_inlets(t2, [](int u, int) { return u != 4 && u != 5; });
  CHECK(blocked == std::vector<int>{1, 2, 4, 5});
}

TEST_CASE("builder validation") {
  CHECK_THROWS_AS(build_network({{1, NodeKind::Boundary}, {1, NodeKind::Boundary}},
                                {{1, kExternal, 1, 2}, {2, 1, kExternal, 1}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(build_network({{2, NodeKind::Boundary}},
                                {{1, kExternal, 2, 2}, {2, 2, kExternal, 1}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(build_network({{1, NodeKind::Boundary}},
                                {{1, kExternal, 1, 2}, {3, 1, kExternal, 1}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(build_network({{1, NodeKind::Boundary}},
                                {{1, kExternal, 5, 2}, {2, 1, kExternal, 1}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(build_network({{1, NodeKind::Boundary}},
                                {{1, kExternal, 1, 0}, {2, 1, kExternal, 1}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(build_network({{1, NodeKind::Connection}, {2, NodeKind::Connection}},
                                {{1, kExternal, 1, 2}, {2, 1, 1, 1}, {3, 1, kExternal, 1}}),
                  std::invalid_argument);

  // Single-element inlet road feeding a two-way fork: the inlet would have
  // two out-neighbors.
  CHECK_THROWS_AS(build_network({{1, NodeKind::Connection}, {2, NodeKind::Connection}},
                                {{1, kExternal, 1, 1},
                                 {2, 1, 2, 2},
                                 {3, 1, kExternal, 2},
                                 {4, 2, kExternal, 1}}),
                  std::invalid_argument);
  // Single-element inlet road feeding a single-element outlet road.
  CHECK_THROWS_AS(build_network({{1, NodeKind::Connection}},
                                {{1, kExternal, 1, 1}, {2, 1, kExternal, 1}}),
                  std::invalid_argument);
  // Same shapes with a two-element inlet road are fine.
  CHECK_NOTHROW(build_network({{1, NodeKind::Connection}},
                              {{1, kExternal, 1, 2}, {2, 1, kExternal, 1}}));
}

TEST_CASE("random fixtures are structurally sound") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 30; ++trial) {
    const fixtures::Fixture f = fixtures::random_network(rng, true);
    CHECK(f.net.size() <= 60);
    CHECK(f.net.num_inlets() >= 1);
    CHECK(f.net.num_outlets() >= 1);
    CHECK_NOTHROW(validate_tendency(f.net, f.tendency));
    for (int g = 1; g <= f.net.num_inlets(); ++g) {
      REQUIRE(f.net.out_neighbors(g).size() == 1);
      CHECK(f.net.klass(f.net.out_neighbors(g)[0]) == ElementClass::Interior);
    }
    for (int l = 1; l <= f.net.size(); ++l)
      CHECK(f.net.local_of_global(f.net.global_of_local(l)) == l);
  }
}
