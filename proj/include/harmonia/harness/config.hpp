#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "harmonia/net/fault.hpp"
#include "harmonia/net/network.hpp"
#include "harmonia/protocols/replica.hpp"
#include "harmonia/switch/scheduler.hpp"
#include "harmonia/workload/workload.hpp"

namespace harmonia::harness {

// Everything a run depends on. A run is reproducible from this alone.
struct RunConfig {
  protocols::ProtocolConfig protocol;
  net::NetConfig net;
  workload::WorkloadConfig workload;
  switching::Geometry geometry;
  SimTime gc_interval = 100 * kMicrosecond;
  // Replica index -> extra delay on replication traffic into it from other
  // replicas, making it lag the rest of the group.
  std::map<std::size_t, SimTime> lagging_replicas;
  std::vector<net::FaultEntry> faults;

  SimTime client_timeout = 100 * kMicrosecond;
  // Extra open-loop client issuing one write per period (0 disables).
  SimTime writer_period = 0;
  // One write at t=0 so the first switch can enable fast-path reads even in
  // read-only workloads.
  bool prime = true;
  // After activate-switch, each client moves to the new switch at a uniform
  // random time within this window (0: immediately).
  SimTime rebind_window = 0;
  // Handoff: how often a new switch resends its lease revocation.
  SimTime revoke_retry = 200 * kMicrosecond;

  std::uint64_t seed = 1;
  SimTime duration = 20 * kMillisecond;
  SimTime warmup = 2 * kMillisecond;
  SimTime bucket = 500 * kMicrosecond;
  bool stop_on_violation = false;
  std::size_t witness_events = 64;

  // Throws std::invalid_argument describing the first problem found.
  void validate() const;
};

// Text format: one `key = value` per line, `#` starts a comment, keys are
// hyphenated. `fault` and `slow-replica` may repeat. See README for keys.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::string& path);
std::string to_text(const RunConfig& cfg);

// Applies one `key = value` pair (used by the parser and CLI overrides).
void apply_setting(RunConfig& cfg, std::string_view key, std::string_view value);

}  // namespace harmonia::harness
