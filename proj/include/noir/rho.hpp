#pragma once

#include <stdexcept>
#include <vector>

#include "noir/conservation.hpp"
#include "noir/network.hpp"
#include "noir/phase.hpp"
#include "noir/types.hpp"

namespace noir {

template <class Scalar>
struct RhoConfig {
  int horizon = 1;
  Vec<Scalar> weight;  // diagonal state penalty over reduced elements; empty means identity
};

template <class Scalar>
struct RhoDecision {
  std::vector<Action> action;
  Scalar cost = Scalar(0);
};

namespace detail {

template <class Scalar>
class RolloutScratch {
 public:
  RolloutScratch(const Network& net, const TendencyConfig<Scalar>& t)
      : stepper_(net, t), net_(&net) {}

  /// Density cost accumulated over the horizon when `first` is applied now
  /// and the signals hold their phases (switching only when forced) after.
  Scalar evaluate(const PhaseTable& table, const PhaseState& st,
                  const std::vector<Action>& first, const Vec<Scalar>& x, const Vec<Scalar>& u,
                  Scalar dt, const RhoConfig<Scalar>& cfg) {
    state_ = st;
    action_ = first;
    cur_ = x;
    Scalar cost = Scalar(0);
    for (int step = 0; step < cfg.horizon; ++step) {
      state_ = step_phases(table, state_, action_);
      gating_into(table, *net_, state_.active, mask_);
      stepper_.step(mask_, cur_, u, dt, next_);
      if (cfg.weight.size() > 0)
        cost += next_.cwiseAbs2().dot(cfg.weight);
      else
        cost += next_.squaredNorm();
      cur_.swap(next_);
      action_ = hold_action(table, state_);
    }
    return cost;
  }

 private:
  GatedStepper<Scalar> stepper_;
  const Network* net_;
  PhaseState state_;
  std::vector<Action> action_;
  std::vector<std::uint8_t> mask_;
  Vec<Scalar> cur_, next_;
};

}  // namespace detail

/// Cost of committing to `first` for the next step, judged by rolling the
/// gated dynamics forward under held phases and constant demand.
template <class Scalar>
Scalar horizon_cost(const Network& net, const TendencyConfig<Scalar>& t, const PhaseTable& table,
                    const PhaseState& st, const std::vector<Action>& first, const Vec<Scalar>& x,
                    const Vec<Scalar>& u, Scalar dt, const RhoConfig<Scalar>& cfg) {
  detail::RolloutScratch<Scalar> scratch(net, t);
  return scratch.evaluate(table, st, first, x, u, dt, cfg);
}

/// Exhaustive one-step lookahead over the admissible action tuples. Tuples
/// are scanned lexicographically with Continue before Switch, and only a
/// strictly smaller cost displaces the incumbent, so ties resolve to the
/// lexicographically least tuple and the choice is deterministic.
template <class Scalar>
RhoDecision<Scalar> choose_action(const Network& net, const TendencyConfig<Scalar>& t,
                                  const PhaseTable& table, const PhaseState& st,
                                  const Vec<Scalar>& x, const Vec<Scalar>& u, Scalar dt,
                                  const RhoConfig<Scalar>& cfg) {
  if (cfg.horizon < 1) throw std::invalid_argument("lookahead horizon must be at least 1");
  if (cfg.weight.size() > 0 && cfg.weight.size() != x.size())
    throw std::invalid_argument("state penalty size does not match reduced state");
  if (x.size() != net.reduced_size())
    throw std::invalid_argument("state size does not match network");

  const int s = table.num_signals();
  std::vector<std::vector<Action>> options(s);
  for (int k = 0; k < s; ++k) options[k] = signal_options(table, st, k);

  detail::RolloutScratch<Scalar> scratch(net, t);
  RhoDecision<Scalar> best;
  bool have_best = false;
  std::vector<std::size_t> pick(s, 0);
  std::vector<Action> tuple(s);
  while (true) {
    for (int k = 0; k < s; ++k) tuple[k] = options[k][pick[k]];
    const Scalar cost = scratch.evaluate(table, st, tuple, x, u, dt, cfg);
    if (!have_best || cost < best.cost) {
      best.action = tuple;
      best.cost = cost;
      have_best = true;
    }
    int k = s - 1;
    for (; k >= 0; --k) {
      if (++pick[k] < options[k].size()) break;
      pick[k] = 0;
    }
    if (k < 0) break;
  }
  return best;
}

}  // namespace noir
