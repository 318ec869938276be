#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "harmonia/checker/monitor.hpp"
#include "harmonia/harness/config.hpp"

namespace harmonia::harness {

struct Metrics {
  SimTime window = 0;  // measured span: [warmup, duration)
  std::uint64_t reads = 0;
  std::uint64_t writes = 0;
  double read_throughput = 0;  // operations per simulated second
  double write_throughput = 0;
  double total_throughput = 0;
  SimTime p50_latency = 0;
  SimTime p99_latency = 0;

  SimTime bucket = 0;
  std::vector<std::uint64_t> timeline_reads;  // completions per bucket, whole run
  std::vector<std::uint64_t> timeline_writes;

  std::vector<std::uint64_t> replica_reads;  // reads answered per replica
  std::uint64_t fast_reads = 0;              // reads the switches sent to a single replica
  std::uint64_t normal_reads = 0;
  std::uint64_t gate_rejects = 0;
  std::uint64_t dropped_writes = 0;  // dirty set full
  std::uint64_t handoff_drops = 0;   // writes refused while a new switch collected grants
  std::uint64_t client_retries = 0;
  std::vector<std::pair<SimTime, std::size_t>> dirty_occupancy;
  // Switch id -> time its first own write completion enabled fast-path reads.
  std::vector<std::pair<std::uint64_t, SimTime>> fast_path_enabled_at;

  std::size_t violations = 0;
  protocols::MessageCounters messages;
  net::NetStats net;

  nlohmann::json to_json() const;
};

struct RunResult {
  Metrics metrics;
  checker::Report report;
  std::string trace;  // JSON lines, only when requested
  std::vector<std::vector<WriteRecord>> replica_logs;

  bool ok() const { return report.ok(); }
};

struct RunOptions {
  bool trace = false;
};

// Builds the topology described by `cfg`, runs it to cfg.duration and
// returns metrics plus the checker report.
RunResult run(const RunConfig& cfg, const RunOptions& options = {});

}  // namespace harmonia::harness
