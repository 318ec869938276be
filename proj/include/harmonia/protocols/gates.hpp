#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "harmonia/core/types.hpp"

namespace harmonia::protocols {

enum class GateDecision { ServeLocal, ForwardNormal };

// Read-ahead protocols (PB, CR): a replica may hold writes that are not yet
// committed, so it serves locally only if the switch had already seen the
// object's version committed.
constexpr GateDecision gate_read_ahead(SeqNum q_commit, SeqNum obj_seq) {
  return q_commit >= obj_seq ? GateDecision::ServeLocal : GateDecision::ForwardNormal;
}

// Read-behind protocols (VR): a replica may lag the commit point, so it
// serves locally only once it has executed everything the switch saw
// committed.
constexpr GateDecision gate_read_behind(SeqNum q_commit, SeqNum last_executed) {
  return q_commit <= last_executed ? GateDecision::ServeLocal : GateDecision::ForwardNormal;
}

// Per-replica permission for one switch incarnation to send fast-path reads.
struct LeaseState {
  std::uint64_t current_switch_id = 1;
  SimTime expiry = 0;
  std::uint64_t refused_below = 0;

  bool permits(std::uint64_t switch_id, SimTime now) const {
    return switch_id == current_switch_id && switch_id >= refused_below && now < expiry;
  }

  // Extends the current switch's lease.
  void tick(SimTime now, SimTime duration) { expiry = now + duration; }

  // Hands the lease to `switch_id` and refuses every smaller id from now on.
  // Returns false (and changes nothing) for an id that is already refused.
  bool refuse_below(std::uint64_t switch_id, SimTime now, SimTime duration) {
    if (switch_id < refused_below || switch_id < current_switch_id) return false;
    refused_below = switch_id;
    current_switch_id = switch_id;
    expiry = now + duration;
    return true;
  }
};

enum class CompletionDelay { Quorum, All, Timeout };

// When the VR leader tells the switch a write is complete. A quorum of
// executions is always required; `All` also waits for every live replica,
// `Timeout` waits for every live replica or `timeout` after the quorum.
struct CompletionPolicy {
  CompletionDelay kind = CompletionDelay::All;
  SimTime timeout = 0;
};

// "quorum", "all" or "ms:<k>". Throws std::invalid_argument.
CompletionPolicy parse_completion_policy(std::string_view text);
std::string to_string(const CompletionPolicy& p);

}  // namespace harmonia::protocols
