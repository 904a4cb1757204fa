#include "noir/phase.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <string>

namespace noir {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::invalid_argument(msg); }

}  // namespace

PhaseTable::PhaseTable(const Network& net, std::vector<SignalSchedule> schedules) {
  std::sort(schedules.begin(), schedules.end(),
            [](const SignalSchedule& a, const SignalSchedule& b) {
              return a.intersection < b.intersection;
            });
  for (std::size_t k = 0; k + 1 < schedules.size(); ++k) {
    if (schedules[k].intersection == schedules[k + 1].intersection)
      fail("duplicate signal at intersection " + std::to_string(schedules[k].intersection));
  }
  for (const SignalSchedule& s : schedules) {
    const std::string at = " at intersection " + std::to_string(s.intersection);
    if (s.intersection < 1 || s.intersection > net.num_intersections())
      fail("signal references undeclared intersection " + std::to_string(s.intersection));
    if (s.threshold < 1) fail("signal threshold must be positive" + at);
    if (s.cycle.empty()) fail("signal cycle must have at least one phase" + at);

    const std::vector<int>& incoming = net.incoming_roads(s.intersection);
    std::vector<char> granted(incoming.size(), 0);
    for (const std::vector<int>& phase : s.cycle) {
      if (phase.empty()) fail("empty phase" + at);
      for (int r : phase) {
        auto it = std::find(incoming.begin(), incoming.end(), r);
        if (it == incoming.end())
          fail("phase grants road " + std::to_string(r) + " which does not arrive" + at);
        granted[it - incoming.begin()] = 1;
      }
    }
    for (std::size_t i = 0; i < incoming.size(); ++i) {
      if (!granted[i])
        fail("road " + std::to_string(incoming[i]) + " is never granted discharge" + at);
    }
    if (s.cycle.size() > 1) {
      auto sorted = [](std::vector<int> v) {
        std::sort(v.begin(), v.end());
        return v;
      };
      for (std::size_t k = 0; k < s.cycle.size(); ++k) {
        const auto& a = s.cycle[k];
        const auto& b = s.cycle[(k + 1) % s.cycle.size()];
        if (sorted(a) == sorted(b)) fail("consecutive phases grant identical roads" + at);
      }
    }
  }

  signals_ = std::move(schedules);
  blocked_.resize(signals_.size());
  for (std::size_t k = 0; k < signals_.size(); ++k) {
    const SignalSchedule& s = signals_[k];
    blocked_[k].resize(s.cycle.size());
    for (std::size_t ph = 0; ph < s.cycle.size(); ++ph) {
      for (int r : net.incoming_roads(s.intersection)) {
        const auto& grant = s.cycle[ph];
        if (std::find(grant.begin(), grant.end(), r) == grant.end())
          blocked_[k][ph].push_back(net.road_tail(r));
      }
    }
  }
}

int PhaseTable::signal_index(int intersection) const {
  for (int k = 0; k < num_signals(); ++k)
    if (signals_[k].intersection == intersection) return k;
  return -1;
}

int PhaseTable::green_count(int k, int road_id) const {
  int count = 0;
  for (const std::vector<int>& phase : signals_.at(k).cycle)
    if (std::find(phase.begin(), phase.end(), road_id) != phase.end()) ++count;
  return count;
}

PhaseState initial_state(const PhaseTable& table) {
  PhaseState st;
  st.active.assign(table.num_signals(), 0);
  st.timer.assign(table.num_signals(), 0);
  return st;
}

std::uint64_t phase_space_size(const PhaseTable& table) {
  std::uint64_t n = 1;
  for (int k = 0; k < table.num_signals(); ++k) {
    const auto m = static_cast<std::uint64_t>(table.signal(k).cycle.size());
    if (n > std::numeric_limits<std::uint64_t>::max() / m)
      throw std::overflow_error("joint phase count exceeds uint64 range");
    n *= m;
  }
  return n;
}

std::vector<std::vector<int>> enumerate_active_tuples(const PhaseTable& table,
                                                      std::uint64_t cap) {
  const std::uint64_t n = phase_space_size(table);
  if (n > cap)
    throw std::length_error("joint phase count " + std::to_string(n) +
                            " exceeds enumeration cap " + std::to_string(cap));
  std::vector<std::vector<int>> tuples;
  tuples.reserve(n);
  std::vector<int> cur(table.num_signals(), 0);
  for (std::uint64_t i = 0; i < n; ++i) {
    tuples.push_back(cur);
    for (int k = table.num_signals() - 1; k >= 0; --k) {
      if (++cur[k] < static_cast<int>(table.signal(k).cycle.size())) break;
      cur[k] = 0;
    }
  }
  return tuples;
}

std::vector<Action> signal_options(const PhaseTable& table, const PhaseState& st, int k) {
  const SignalSchedule& s = table.signal(k);
  if (s.cycle.size() == 1) return {Action::Continue};
  if (st.timer.at(k) < s.threshold) return {Action::Continue, Action::Switch};
  return {Action::Switch};
}

std::vector<std::vector<Action>> admissible_actions(const PhaseTable& table,
                                                    const PhaseState& st) {
  std::vector<std::vector<Action>> options(table.num_signals());
  std::size_t n = 1;
  for (int k = 0; k < table.num_signals(); ++k) {
    options[k] = signal_options(table, st, k);
    n *= options[k].size();
  }
  std::vector<std::vector<Action>> tuples;
  tuples.reserve(n);
  std::vector<std::size_t> pick(table.num_signals(), 0);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<Action> a(table.num_signals());
    for (int k = 0; k < table.num_signals(); ++k) a[k] = options[k][pick[k]];
    tuples.push_back(std::move(a));
    for (int k = table.num_signals() - 1; k >= 0; --k) {
      if (++pick[k] < options[k].size()) break;
      pick[k] = 0;
    }
  }
  return tuples;
}

PhaseState apply_action(const PhaseTable& table, const PhaseState& st,
                        const std::vector<Action>& actions) {
  if (static_cast<int>(actions.size()) != table.num_signals() ||
      static_cast<int>(st.active.size()) != table.num_signals() ||
      static_cast<int>(st.timer.size()) != table.num_signals())
    fail("action/state size does not match signal count");
  PhaseState out = st;
  for (int k = 0; k < table.num_signals(); ++k) {
    const SignalSchedule& s = table.signal(k);
    const int m = static_cast<int>(s.cycle.size());
    if (actions[k] == Action::Switch) {
      if (m == 1) fail("single-phase signal cannot switch (signal " + std::to_string(k) + ")");
      out.active[k] = (st.active[k] + 1) % m;
      out.timer[k] = 0;
    } else {
      if (m == 1) continue;
      if (st.timer[k] >= s.threshold)
        fail("phase held past its threshold (signal " + std::to_string(k) + ")");
      out.timer[k] = st.timer[k] + 1;
    }
  }
  return out;
}

PhaseState step_phases(const PhaseTable& table, const PhaseState& st,
                       const std::vector<Action>& actions) {
  PhaseState out = apply_action(table, st, actions);
  for (int k = 0; k < table.num_signals(); ++k)
    if (actions[k] == Action::Switch) out.timer[k] = 1;
  return out;
}

std::vector<std::uint8_t> active_gating(const PhaseTable& table, const Network& net,
                                        const PhaseState& st) {
  return gating_for_phases(table, net, st.active);
}

std::vector<std::uint8_t> gating_for_phases(const PhaseTable& table, const Network& net,
                                            const std::vector<int>& active) {
  std::vector<std::uint8_t> mask;
  gating_into(table, net, active, mask);
  return mask;
}

void gating_into(const PhaseTable& table, const Network& net, const std::vector<int>& active,
                 std::vector<std::uint8_t>& mask) {
  if (static_cast<int>(active.size()) != table.num_signals())
    fail("phase tuple size does not match signal count");
  mask.assign(net.size() + 1, 0);
  for (int k = 0; k < table.num_signals(); ++k)
    for (int g : table.blocked_tails(k, active[k])) mask[g] = 1;
}

std::vector<Action> hold_action(const PhaseTable& table, const PhaseState& st) {
  std::vector<Action> act(table.num_signals());
  for (int k = 0; k < table.num_signals(); ++k) {
    const SignalSchedule& s = table.signal(k);
    const bool can_stay = s.cycle.size() == 1 || st.timer.at(k) < s.threshold;
    act[k] = can_stay ? Action::Continue : Action::Switch;
  }
  return act;
}

}  // namespace noir
