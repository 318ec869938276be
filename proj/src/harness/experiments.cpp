#include "harmonia/harness/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace harmonia::harness {

const char* const kCsvHeader =
    "experiment,workload,protocol,harmonia,replicas,write_ratio,distribution,slots,"
    "offered_write_rate,throughput,read_throughput,write_throughput,p50_us,p99_us,"
    "dropped_writes,violations,seed";

void write_csv(std::ostream& os, const std::vector<Row>& rows) {
  os << kCsvHeader << "\n";
  auto old = os.flags();
  for (const auto& r : rows) {
    os << r.experiment << ',' << r.workload << ',' << to_string(r.protocol) << ','
       << (r.harmonia ? 1 : 0) << ',' << r.replicas << ',' << r.write_ratio << ','
       << r.distribution << ',' << r.slots << ',' << std::fixed << std::setprecision(0)
       << r.offered_write_rate << ',' << r.throughput << ',' << r.read_throughput << ','
       << r.write_throughput << ',' << std::setprecision(2) << r.p50_us << ',' << r.p99_us << ','
       << r.dropped_writes << ',' << r.violations << ',' << r.seed << "\n";
    os.flags(old);
  }
}

RunConfig default_experiment_config() {
  RunConfig c;
  c.protocol.protocol = Protocol::Chain;
  c.protocol.replicas = 3;
  c.protocol.harmonia = true;
  c.workload.num_keys = 10'000;
  c.workload.write_ratio = 0.05;
  c.workload.clients = 400;
  // Well above the worst queueing delay, so saturated runs do not turn into
  // retry storms. Only writes dropped by a full dirty set ever time out.
  c.client_timeout = 5 * kMillisecond;
  c.duration = 20 * kMillisecond;
  c.warmup = 2 * kMillisecond;
  return c;
}

RunConfig default_memory_config() {
  RunConfig c = default_experiment_config();
  // Below saturation, so a dropped write costs its client a full timeout
  // instead of merely shifting load inside an overloaded group.
  c.workload.clients = 64;
  c.client_timeout = kMillisecond;
  return c;
}

RunConfig default_failover_config() {
  RunConfig c = default_experiment_config();
  c.workload.write_ratio = 0;
  c.workload.clients = 96;
  c.client_timeout = 300 * kMicrosecond;
  c.writer_period = 2 * kMillisecond;
  c.duration = 12 * kMillisecond;
  c.bucket = 50 * kMicrosecond;
  c.faults = {net::parse_fault("crash-switch@6200us"),
              net::parse_fault("activate-switch@6600us id=2")};
  return c;
}

Row row_from(const std::string& experiment, const std::string& workload, const RunConfig& cfg,
             const RunResult& r) {
  Row row;
  row.experiment = experiment;
  row.workload = workload;
  row.protocol = cfg.protocol.protocol;
  row.harmonia = cfg.protocol.harmonia;
  row.replicas = cfg.protocol.replicas;
  row.write_ratio = cfg.workload.write_ratio;
  row.distribution = "uniform";
  if (cfg.workload.distribution == workload::Distribution::Zipf) {
    std::ostringstream os;
    os << "zipf-" << cfg.workload.theta;
    row.distribution = os.str();
  }
  row.slots = cfg.geometry.stages * cfg.geometry.slots;
  row.offered_write_rate =
      cfg.writer_period > 0 ? 1e9 / static_cast<double>(cfg.writer_period) : 0.0;
  row.throughput = r.metrics.total_throughput;
  row.read_throughput = r.metrics.read_throughput;
  row.write_throughput = r.metrics.write_throughput;
  row.p50_us = static_cast<double>(r.metrics.p50_latency) / kMicrosecond;
  row.p99_us = static_cast<double>(r.metrics.p99_latency) / kMicrosecond;
  row.dropped_writes = r.metrics.dropped_writes;
  row.violations = r.report.violations.size();
  row.seed = cfg.seed;
  return row;
}

namespace {

std::vector<Protocol> protocols_or(const SweepOptions& opts, std::vector<Protocol> fallback) {
  return opts.protocols.empty() ? fallback : opts.protocols;
}

// CRAQ has no Harmonia variant, so it is measured once.
std::vector<bool> harmonia_modes(Protocol p) {
  if (p == Protocol::Craq) return {false};
  return {false, true};
}

Row measure(const SweepOptions& opts, const std::string& experiment, const std::string& workload,
            const RunConfig& cfg) {
  Row row = row_from(experiment, workload, cfg, run(cfg));
  if (opts.progress) opts.progress(row);
  return row;
}

struct WorkloadShape {
  const char* name;
  double write_ratio;
};

}  // namespace

std::vector<Row> experiment_scalability(const SweepOptions& opts) {
  std::vector<Row> rows;
  const WorkloadShape shapes[] = {{"read-only", 0.0}, {"write-only", 1.0}, {"mixed", 0.05}};
  for (const auto& shape : shapes) {
    for (Protocol p : protocols_or(opts, {Protocol::Chain})) {
      for (bool h : harmonia_modes(p)) {
        for (std::size_t n = 1; n <= opts.max_replicas; ++n) {
          RunConfig cfg = opts.base;
          cfg.protocol.protocol = p;
          cfg.protocol.harmonia = h;
          cfg.protocol.replicas = n;
          cfg.workload.write_ratio = shape.write_ratio;
          rows.push_back(measure(opts, "scalability", shape.name, cfg));
        }
      }
    }
  }
  return rows;
}

std::vector<Row> experiment_write_ratio(const SweepOptions& opts) {
  std::vector<Row> rows;
  for (Protocol p : protocols_or(opts, {Protocol::PrimaryBackup, Protocol::Chain,
                                        Protocol::Viewstamped})) {
    for (bool h : harmonia_modes(p)) {
      for (double wr : {0.0, 0.01, 0.05, 0.1, 0.2, 0.3, 0.5, 0.75, 1.0}) {
        RunConfig cfg = opts.base;
        cfg.protocol.protocol = p;
        cfg.protocol.harmonia = h;
        cfg.workload.write_ratio = wr;
        rows.push_back(measure(opts, "write-ratio", "mixed", cfg));
      }
    }
  }
  return rows;
}

std::vector<Row> experiment_read_vs_write(const SweepOptions& opts,
                                          const std::vector<double>& fractions_in) {
  std::vector<Protocol> protos = protocols_or(opts, {Protocol::Chain});
  std::vector<double> fractions = fractions_in;
  if (fractions.empty()) fractions = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};

  // Write saturation of the first protocol without Harmonia.
  RunConfig sat = opts.base;
  sat.protocol.protocol = protos.front();
  sat.protocol.harmonia = false;
  sat.workload.write_ratio = 1.0;
  Row sat_row = measure(opts, "read-vs-write", "write-saturation", sat);
  std::vector<Row> rows{sat_row};
  double saturation = sat_row.write_throughput;
  if (saturation <= 0) throw std::runtime_error("write saturation run completed no writes");

  for (Protocol p : protos) {
    for (bool h : harmonia_modes(p)) {
      for (double f : fractions) {
        RunConfig cfg = opts.base;
        cfg.protocol.protocol = p;
        cfg.protocol.harmonia = h;
        cfg.workload.write_ratio = 0.0;
        cfg.writer_period = f > 0 ? static_cast<SimTime>(std::llround(1e9 / (f * saturation))) : 0;
        rows.push_back(measure(opts, "read-vs-write", "fixed-write-rate", cfg));
      }
    }
  }
  return rows;
}

std::vector<Row> experiment_craq(const SweepOptions& opts) {
  SweepOptions o = opts;
  o.protocols = {Protocol::Chain, Protocol::Craq};
  auto rows = experiment_read_vs_write(o);
  for (auto& r : rows) r.experiment = "craq";
  return rows;
}

std::vector<Row> experiment_memory(const SweepOptions& opts,
                                   const std::vector<std::size_t>& totals_in) {
  std::vector<std::size_t> totals = totals_in;
  if (totals.empty()) totals = {3, 6, 12, 24, 48, 96, 192, 384, 768, 1536, 3072};
  std::vector<Row> rows;
  for (Protocol p : protocols_or(opts, {Protocol::Chain})) {
    for (double theta : {0.0, 0.9}) {
      for (std::size_t total : totals) {
        RunConfig cfg = opts.base;
        cfg.protocol.protocol = p;
        cfg.protocol.harmonia = true;
        cfg.workload.write_ratio = 0.05;
        cfg.workload.distribution =
            theta == 0.0 ? workload::Distribution::Uniform : workload::Distribution::Zipf;
        cfg.workload.theta = theta;
        cfg.geometry.slots = std::max<std::size_t>(1, total / cfg.geometry.stages);
        rows.push_back(measure(opts, "memory", "mixed", cfg));
      }
    }
  }
  return rows;
}

FailoverTimeline experiment_failover(const SweepOptions& opts, Protocol protocol) {
  FailoverTimeline t;
  t.protocol = protocol;
  RunConfig cfg = opts.base;
  cfg.protocol.protocol = protocol;
  cfg.protocol.harmonia = true;
  for (const auto& f : cfg.faults) {
    if (f.kind == net::FaultEntry::Kind::CrashSwitch && t.crash_at == 0) t.crash_at = f.at;
    if (f.kind == net::FaultEntry::Kind::ActivateSwitch && t.activate_at == 0) {
      t.activate_at = f.at;
      t.new_switch_id = f.switch_id;
    }
  }
  if (t.crash_at == 0 || t.activate_at == 0) {
    throw std::invalid_argument("failover experiment needs crash-switch and activate-switch faults");
  }

  RunResult r = run(cfg);
  t.violations = r.report.violations.size();
  for (const auto& [sid, at] : r.metrics.fast_path_enabled_at) {
    if (sid == t.new_switch_id) {
      t.fast_path_at = at;
      break;
    }
  }
  const double per_second = 1e9 / static_cast<double>(cfg.bucket);
  double pre_sum = 0;
  std::size_t pre_n = 0;
  for (std::size_t b = 0; b < r.metrics.timeline_reads.size(); ++b) {
    TimelinePoint p;
    p.start = static_cast<SimTime>(b) * cfg.bucket;
    p.read_throughput = static_cast<double>(r.metrics.timeline_reads[b]) * per_second;
    p.write_throughput = static_cast<double>(r.metrics.timeline_writes[b]) * per_second;
    p.throughput = p.read_throughput + p.write_throughput;
    if (p.start >= cfg.warmup && p.start + cfg.bucket <= t.crash_at) {
      pre_sum += p.throughput;
      ++pre_n;
    }
    t.points.push_back(p);
  }
  t.pre_failure = pre_n ? pre_sum / static_cast<double>(pre_n) : 0.0;

  RunConfig off = cfg;
  off.protocol.harmonia = false;
  off.faults.clear();
  RunResult ro = run(off);
  t.harmonia_off = ro.metrics.total_throughput;
  t.violations += ro.report.violations.size();

  if (opts.progress) {
    Row row = row_from("failover", "timeline", cfg, r);
    opts.progress(row);
  }
  return t;
}

void write_timeline_csv(std::ostream& os, const FailoverTimeline& t) {
  os << "# protocol=" << to_string(t.protocol) << " crash_at_us=" << t.crash_at / kMicrosecond
     << " activate_at_us=" << t.activate_at / kMicrosecond
     << " new_switch=" << t.new_switch_id << " fast_path_at_us="
     << (t.fast_path_at < 0 ? -1 : t.fast_path_at / kMicrosecond) << " pre_failure="
     << std::llround(t.pre_failure) << " harmonia_off=" << std::llround(t.harmonia_off)
     << " violations=" << t.violations << "\n";
  os << "time_us,throughput,read_throughput,write_throughput\n";
  for (const auto& p : t.points) {
    os << static_cast<double>(p.start) / kMicrosecond << ',' << std::llround(p.throughput) << ','
       << std::llround(p.read_throughput) << ',' << std::llround(p.write_throughput) << "\n";
  }
}

}  // namespace harmonia::harness
