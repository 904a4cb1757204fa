#include <doctest.h>

#include <random>
#include <stdexcept>

#include "noir/rho.hpp"
#include "support/fixtures.hpp"

using namespace noir;

namespace {

// Deliberately naive re-derivation of the lookahead: dense per-phase
// matrices, explicit state copies, and a linear scan over the public
// admissible-action list. Used as the oracle for choose_action.
double naive_cost(const fixtures::Fixture& f, const PhaseState& st,
                  const std::vector<Action>& first, const VectorX& x, const VectorX& u,
                  double dt, const RhoConfig<double>& cfg) {
  PhaseState s = st;
  std::vector<Action> act = first;
  VectorX cur = x;
  double cost = 0;
  for (int step = 0; step < cfg.horizon; ++step) {
    s = apply_action(f.table, s, act);
    for (int k = 0; k < f.table.num_signals(); ++k)
      if (act[k] == Action::Switch) s.timer[k] = 1;
    const auto mask = active_gating(f.table, f.net, s);
    const auto pm = assemble_phase(f.net, f.tendency, mask);
    cur = step_density(pm.generator, cur, u, dt);
    for (int i = 0; i < cur.size(); ++i)
      cost += (cfg.weight.size() > 0 ? cfg.weight[i] : 1.0) * cur[i] * cur[i];
    for (int k = 0; k < f.table.num_signals(); ++k) {
      const bool stay =
          f.table.signal(k).cycle.size() == 1 || s.timer[k] < f.table.signal(k).threshold;
      act[k] = stay ? Action::Continue : Action::Switch;
    }
  }
  return cost;
}

RhoDecision<double> naive_choose(const fixtures::Fixture& f, const PhaseState& st,
                                 const VectorX& x, const VectorX& u, double dt,
                                 const RhoConfig<double>& cfg) {
  RhoDecision<double> best;
  bool have = false;
  for (const auto& tuple : admissible_actions(f.table, st)) {
    const double c = naive_cost(f, st, tuple, x, u, dt, cfg);
    if (!have || c < best.cost) {
      best = {tuple, c};
      have = true;
    }
  }
  return best;
}

PhaseState random_state(const fixtures::Fixture& f, std::mt19937_64& rng) {
  PhaseState st = initial_state(f.table);
  for (int k = 0; k < f.table.num_signals(); ++k) {
    const auto& s = f.table.signal(k);
    st.active[k] = static_cast<int>(rng() % s.cycle.size());
    st.timer[k] = static_cast<int>(rng() % (s.threshold + 1));
  }
  return st;
}

}  // namespace

TEST_CASE("horizon cost matches the dense rollout") {
  const fixtures::Fixture f = fixtures::t2();
  std::mt19937_64 rng(91);
  std::uniform_real_distribution<double> unif(0.0, 6.0);
  RhoConfig<double> cfg;
  cfg.horizon = 3;

  for (int trial = 0; trial < 20; ++trial) {
    const PhaseState st = random_state(f, rng);
    VectorX x(5), u(2);
    for (int i = 0; i < 5; ++i) x[i] = unif(rng);
    for (int i = 0; i < 2; ++i) u[i] = unif(rng) + 0.1;
    for (const auto& tuple : admissible_actions(f.table, st)) {
      const double fast = horizon_cost(f.net, f.tendency, f.table, st, tuple, x, u, 1.0, cfg);
      const double slow = naive_cost(f, st, tuple, x, u, 1.0, cfg);
      CHECK(fast == doctest::Approx(slow).epsilon(1e-12));
    }
  }
}

TEST_CASE("queued mass pulls the green its way") {
  const fixtures::Fixture f = fixtures::t2();
  RhoConfig<double> cfg;
  cfg.horizon = 3;

  // All mass sits on road 1's tail; keeping its green must beat switching.
  VectorX x = VectorX::Zero(5);
  x[f.net.reduced_index(f.net.road_tail(1))] = 10.0;
  VectorX u(2);
  u << 0.5, 0.5;
  const PhaseState st = initial_state(f.table);

  const double keep = horizon_cost(f.net, f.tendency, f.table, st, {Action::Continue}, x, u,
                                   1.0, cfg);
  const double flip = horizon_cost(f.net, f.tendency, f.table, st, {Action::Switch}, x, u,
                                   1.0, cfg);
  CHECK(keep < flip);

  const auto dec = choose_action(f.net, f.tendency, f.table, st, x, u, 1.0, cfg);
  CHECK(dec.action == std::vector<Action>{Action::Continue});
  CHECK(dec.cost == doctest::Approx(keep).epsilon(1e-14));
}

TEST_CASE("exhaustive choice equals the naive oracle on the junction") {
  const fixtures::Fixture f = fixtures::t2();
  std::mt19937_64 rng(92);
  std::uniform_real_distribution<double> unif(0.0, 8.0);
  RhoConfig<double> cfg;
  cfg.horizon = 3;

  for (int trial = 0; trial < 40; ++trial) {
    const PhaseState st = random_state(f, rng);
    VectorX x(5), u(2);
    for (int i = 0; i < 5; ++i) x[i] = unif(rng);
    for (int i = 0; i < 2; ++i) u[i] = unif(rng) + 0.1;

    const auto fast = choose_action(f.net, f.tendency, f.table, st, x, u, 1.0, cfg);
    const auto slow = naive_choose(f, st, x, u, 1.0, cfg);
    CHECK(fast.action == slow.action);
    CHECK(fast.cost == doctest::Approx(slow.cost).epsilon(1e-12));
  }
}

TEST_CASE("exhaustive choice equals the naive oracle with three signals") {
  const fixtures::Fixture f = fixtures::three_signals();
  const int r = f.net.reduced_size();
  const int n_in = f.net.num_inlets();
  std::mt19937_64 rng(93);
  std::uniform_real_distribution<double> unif(0.0, 8.0);
  RhoConfig<double> cfg;
  cfg.horizon = 2;

  for (int trial = 0; trial < 25; ++trial) {
    const PhaseState st = random_state(f, rng);
    VectorX x(r), u(n_in);
    for (int i = 0; i < r; ++i) x[i] = unif(rng);
    for (int i = 0; i < n_in; ++i) u[i] = unif(rng) + 0.1;

    const auto fast = choose_action(f.net, f.tendency, f.table, st, x, u, 1.0, cfg);
    const auto slow = naive_choose(f, st, x, u, 1.0, cfg);
    CHECK(fast.action == slow.action);
    CHECK(fast.cost == doctest::Approx(slow.cost).epsilon(1e-12));
  }
}

TEST_CASE("uniform state penalty scaling keeps the argmin") {
  const fixtures::Fixture f = fixtures::three_signals();
  const int r = f.net.reduced_size();
  const int n_in = f.net.num_inlets();
  std::mt19937_64 rng(94);
  std::uniform_real_distribution<double> unif(0.0, 8.0);

  RhoConfig<double> plain, scaled;
  plain.horizon = 3;
  scaled.horizon = 3;
  scaled.weight = VectorX::Constant(r, 7.25);

  for (int trial = 0; trial < 15; ++trial) {
    const PhaseState st = random_state(f, rng);
    VectorX x(r), u(n_in);
    for (int i = 0; i < r; ++i) x[i] = unif(rng);
    for (int i = 0; i < n_in; ++i) u[i] = unif(rng) + 0.1;

    const auto a = choose_action(f.net, f.tendency, f.table, st, x, u, 1.0, plain);
    const auto b = choose_action(f.net, f.tendency, f.table, st, x, u, 1.0, scaled);
    CHECK(a.action == b.action);
    CHECK(b.cost == doctest::Approx(7.25 * a.cost).epsilon(1e-12));
  }
}

TEST_CASE("thresholds force a switch in the chosen tuple") {
  const fixtures::Fixture f = fixtures::t2(2);
  PhaseState st = initial_state(f.table);
  st.timer[0] = 2;
  RhoConfig<double> cfg;
  cfg.horizon = 2;
  VectorX x = VectorX::Constant(5, 1.0);
  VectorX u = VectorX::Constant(2, 0.5);
  const auto dec = choose_action(f.net, f.tendency, f.table, st, x, u, 1.0, cfg);
  CHECK(dec.action == std::vector<Action>{Action::Switch});
}

TEST_CASE("configuration validation") {
  const fixtures::Fixture f = fixtures::t2();
  VectorX x = VectorX::Zero(5), u = VectorX::Constant(2, 1.0);
  RhoConfig<double> cfg;
  cfg.horizon = 0;
  CHECK_THROWS_AS(choose_action(f.net, f.tendency, f.table, initial_state(f.table), x, u, 1.0,
                                cfg),
                  std::invalid_argument);
  cfg.horizon = 2;
  cfg.weight = VectorX::Ones(3);
  CHECK_THROWS_AS(choose_action(f.net, f.tendency, f.table, initial_state(f.table), x, u, 1.0,
                                cfg),
                  std::invalid_argument);
}
