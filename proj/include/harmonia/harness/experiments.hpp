#pragma once

#include <cstdint>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "harmonia/harness/config.hpp"
#include "harmonia/harness/simulation.hpp"

namespace harmonia::harness {

// One measured point. The CSV column order below is frozen.
struct Row {
  std::string experiment;
  std::string workload;  // read-only, write-only, mixed, ...
  Protocol protocol = Protocol::Chain;
  bool harmonia = false;
  std::size_t replicas = 0;
  double write_ratio = 0;
  std::string distribution = "uniform";
  std::size_t slots = 0;            // total dirty-set slots (stages x per-stage)
  double offered_write_rate = 0;    // open-loop writer rate, 0 if closed loop
  double throughput = 0;            // ops per simulated second
  double read_throughput = 0;
  double write_throughput = 0;
  double p50_us = 0;
  double p99_us = 0;
  std::uint64_t dropped_writes = 0;
  std::size_t violations = 0;
  std::uint64_t seed = 0;
};

extern const char* const kCsvHeader;
void write_csv(std::ostream& os, const std::vector<Row>& rows);

// Common knobs for every sweep. `base` supplies everything not swept.
struct SweepOptions {
  RunConfig base;
  std::vector<Protocol> protocols;
  std::size_t max_replicas = 10;
  // Invoked after every run (progress output, early abort on violations).
  std::function<void(const Row&)> progress;
};

// Desk-scale defaults: loss-free network, 10^4 uniform keys, enough
// closed-loop clients to saturate ten replicas.
RunConfig default_experiment_config();

// Replica count 1..max_replicas, Harmonia off and on, for the read-only,
// write-only and 5%-write workloads.
std::vector<Row> experiment_scalability(const SweepOptions& opts);

// Three replicas, write ratio swept from 0 to 1.
std::vector<Row> experiment_write_ratio(const SweepOptions& opts);

// Three replicas. Writes arrive open loop at a fixed rate while closed-loop
// readers saturate the group; the write rate is swept as fractions of the
// first protocol's write-only saturation throughput.
std::vector<Row> experiment_read_vs_write(const SweepOptions& opts,
                                          const std::vector<double>& fractions = {});

// Same as read_vs_write for chain replication with Harmonia against CRAQ.
std::vector<Row> experiment_craq(const SweepOptions& opts);

// Fewer clients than the scalability default and a 1 ms client timeout, so
// writes dropped by a full dirty set show up as lost throughput.
RunConfig default_memory_config();

// Three replicas, 5% writes, total slots swept for uniform and zipf-0.9.
std::vector<Row> experiment_memory(const SweepOptions& opts,
                                   const std::vector<std::size_t>& total_slots = {});

struct TimelinePoint {
  SimTime start = 0;
  double read_throughput = 0;
  double write_throughput = 0;
  double throughput = 0;
};

struct FailoverTimeline {
  Protocol protocol = Protocol::Chain;
  SimTime crash_at = 0;
  SimTime activate_at = 0;
  std::uint64_t new_switch_id = 0;
  SimTime fast_path_at = -1;  // first completion carrying the new switch id
  double pre_failure = 0;     // mean throughput before the crash
  double harmonia_off = 0;    // same workload, Harmonia disabled, steady state
  std::vector<TimelinePoint> points;
  std::size_t violations = 0;
};

// Read-only clients plus one write every 2 ms on three replicas; the switch
// crashes at 6.2 ms and switch 2 takes over at 6.6 ms, so the replacement
// runs on the normal path until the write issued at 8 ms completes.
RunConfig default_failover_config();

// Runs `opts.base` (which must crash and activate a switch) with Harmonia on
// and records per-bucket throughput, plus the same run with Harmonia off as
// the reference level.
FailoverTimeline experiment_failover(const SweepOptions& opts, Protocol protocol);
void write_timeline_csv(std::ostream& os, const FailoverTimeline& t);

Row row_from(const std::string& experiment, const std::string& workload, const RunConfig& cfg,
             const RunResult& r);

}  // namespace harmonia::harness
