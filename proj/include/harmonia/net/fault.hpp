#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "harmonia/core/types.hpp"

namespace harmonia::net {

class Network;

struct FaultEntry {
  enum class Kind { CrashSwitch, ActivateSwitch, CrashServer, RecoverServer, Partition };
  Kind kind = Kind::CrashSwitch;
  SimTime at = 0;
  SimTime until = 0;             // Partition only
  std::uint64_t switch_id = 0;   // ActivateSwitch only
  NodeId node = kNoNode;         // CrashServer / RecoverServer (replica index)
  std::vector<NodeId> side;      // Partition (replica indices)
};

// Text form used in run configs:
//   crash-switch@20s
//   activate-switch@25s id=2
//   crash-server@1s node=1
//   recover-server@2s node=1
//   partition@1s-2s nodes=0,1
FaultEntry parse_fault(std::string_view text);
std::string to_string(const FaultEntry& e);

// Rejects schedules that contradict themselves: crashing a crashed node,
// recovering a live one, non-increasing switch ids, crashing an already
// crashed switch, empty partitions or replica indices out of range.
// Returns the entries sorted by time. Throws std::invalid_argument.
std::vector<FaultEntry> validate_schedule(std::vector<FaultEntry> entries, std::size_t replicas);

using FaultHandler = std::function<void(const FaultEntry&)>;

// Arranges for `handler(entry)` to run at entry.at.
void inject_fault(Network& net, const FaultEntry& entry, FaultHandler handler);

}  // namespace harmonia::net
