#pragma once

#include <cstdint>
#include <vector>

#include "noir/network.hpp"

namespace noir {

enum class Action : unsigned char { Continue = 0, Switch = 1 };

/// Signal program for one intersection. `cycle[k]` lists the road ids whose
/// tails may discharge while phase k is active; phases advance cyclically.
/// `threshold` caps how many consecutive steps a phase may stay active.
struct SignalSchedule {
  int intersection = 0;
  int threshold = 1;
  std::vector<std::vector<int>> cycle;
};

/// Validated set of signal programs over a network. Signals are kept in
/// ascending intersection-id order; action vectors and phase states index
/// them in that order.
class PhaseTable {
 public:
  PhaseTable() = default;
  PhaseTable(const Network& net, std::vector<SignalSchedule> schedules);

  int num_signals() const { return static_cast<int>(signals_.size()); }
  const SignalSchedule& signal(int k) const { return signals_.at(k); }
  /// Index of the signal at an intersection, -1 if unsignalized.
  int signal_index(int intersection) const;
  /// Tail elements (global ids) that phase `phase` of signal `k` holds red.
  const std::vector<int>& blocked_tails(int k, int phase) const {
    return blocked_.at(k).at(phase);
  }
  /// How many phases of signal `k` grant road `road_id` discharge.
  int green_count(int k, int road_id) const;

 private:
  std::vector<SignalSchedule> signals_;
  std::vector<std::vector<std::vector<int>>> blocked_;
};

/// Active phase index and elapsed-step counter per signal.
struct PhaseState {
  std::vector<int> active;
  std::vector<int> timer;
};

/// All signals on their first phase with zero elapsed steps.
PhaseState initial_state(const PhaseTable& table);

/// Number of joint phase assignments (product of cycle lengths).
/// Throws std::overflow_error if the product exceeds uint64 range.
std::uint64_t phase_space_size(const PhaseTable& table);

/// Every joint assignment of active phases, lexicographic in signal order.
/// Caller should consult phase_space_size() first; throws if it exceeds `cap`.
std::vector<std::vector<int>> enumerate_active_tuples(const PhaseTable& table,
                                                      std::uint64_t cap = 1u << 20);

/// Admissible actions for signal `k` in state `st`: a single-phase signal only
/// continues; otherwise Continue is allowed while the timer is below the
/// threshold, and Switch is always allowed.
std::vector<Action> signal_options(const PhaseTable& table, const PhaseState& st, int k);

/// Cartesian product of per-signal options, lexicographic with Continue
/// ordered before Switch.
std::vector<std::vector<Action>> admissible_actions(const PhaseTable& table,
                                                    const PhaseState& st);

/// Applies one action tuple: Switch advances the cycle and clears the timer,
/// Continue increments it (single-phase signals stay at zero). Throws
/// std::invalid_argument on inadmissible actions or size mismatch.
PhaseState apply_action(const PhaseTable& table, const PhaseState& st,
                        const std::vector<Action>& actions);

/// apply_action, then counts the step being taken: signals that switched have
/// their timer set to 1, so the timer always equals the number of steps the
/// active phase has been in force.
PhaseState step_phases(const PhaseTable& table, const PhaseState& st,
                       const std::vector<Action>& actions);

/// Per-element red mask for a joint phase state: mask[g] == 1 when element
/// g's discharge is blocked by the active phases. Size is net.size() + 1,
/// indexed by global id; unsignalized intersections block nothing.
std::vector<std::uint8_t> active_gating(const PhaseTable& table, const Network& net,
                                        const PhaseState& st);

/// Same mask from active phase indices alone (timers do not affect gating).
std::vector<std::uint8_t> gating_for_phases(const PhaseTable& table, const Network& net,
                                            const std::vector<int>& active);

/// In-place variant for hot loops; resizes and clears `mask` as needed.
void gating_into(const PhaseTable& table, const Network& net, const std::vector<int>& active,
                 std::vector<std::uint8_t>& mask);

/// The lazy continuation: Continue wherever admissible, Switch where the
/// threshold forces it.
std::vector<Action> hold_action(const PhaseTable& table, const PhaseState& st);

}  // namespace noir
