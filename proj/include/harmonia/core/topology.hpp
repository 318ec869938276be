#pragma once

#include <cstddef>
#include <cstdint>

#include "harmonia/core/types.hpp"

namespace harmonia {

// Node-id layout shared by the simulator: replicas first, then one id per
// switch incarnation, then clients.
inline constexpr NodeId kSwitchBase = 100;
inline constexpr NodeId kClientBase = 1000;
inline constexpr std::size_t kMaxReplicas = kSwitchBase;
inline constexpr std::uint64_t kMaxSwitchId = kClientBase - kSwitchBase - 1;

constexpr NodeId replica_node(std::size_t index) { return static_cast<NodeId>(index); }
constexpr NodeId switch_node(std::uint64_t switch_id) {
  return kSwitchBase + static_cast<NodeId>(switch_id);
}
constexpr NodeId client_node(std::size_t index) { return kClientBase + static_cast<NodeId>(index); }

constexpr bool is_replica_node(NodeId n) { return n < kSwitchBase; }
constexpr bool is_switch_node(NodeId n) { return n >= kSwitchBase && n < kClientBase; }
constexpr bool is_client_node(NodeId n) { return n >= kClientBase && n != kNoNode; }

}  // namespace harmonia
