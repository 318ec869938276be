#include "harmonia/harness/simulation.hpp"

#include <algorithm>
#include <memory>
#include <sstream>

#include "harmonia/checker/oracle.hpp"
#include "harmonia/harness/switch_node.hpp"
#include "harmonia/workload/client.hpp"

namespace harmonia::harness {

nlohmann::json Metrics::to_json() const {
  nlohmann::json j;
  j["window_ns"] = window;
  j["reads"] = reads;
  j["writes"] = writes;
  j["read_throughput"] = read_throughput;
  j["write_throughput"] = write_throughput;
  j["total_throughput"] = total_throughput;
  j["p50_latency_ns"] = p50_latency;
  j["p99_latency_ns"] = p99_latency;
  j["bucket_ns"] = bucket;
  j["timeline_reads"] = timeline_reads;
  j["timeline_writes"] = timeline_writes;
  j["replica_reads"] = replica_reads;
  j["fast_reads"] = fast_reads;
  j["normal_reads"] = normal_reads;
  j["gate_rejects"] = gate_rejects;
  j["dropped_writes"] = dropped_writes;
  j["handoff_drops"] = handoff_drops;
  j["client_retries"] = client_retries;
  j["violations"] = violations;
  nlohmann::json enabled = nlohmann::json::array();
  for (const auto& [sid, t] : fast_path_enabled_at) enabled.push_back({{"switch", sid}, {"t", t}});
  j["fast_path_enabled_at"] = enabled;
  nlohmann::json msgs;
  for (int k = 0; k < kMessageKindCount; ++k) {
    msgs[std::string(to_string(static_cast<MessageKind>(k)))] = messages.sent[k];
  }
  msgs["piggybacked"] = messages.piggybacked;
  msgs["retransmissions"] = messages.retransmissions;
  j["messages"] = msgs;
  j["net"] = {{"sends", net.sends},
              {"deliveries", net.deliveries},
              {"drops", net.drops},
              {"duplicates", net.duplicates},
              {"dead_letters", net.dead_letters}};
  return j;
}

namespace {

// Feeds protocol instrumentation into the oracle and monitor.
class CheckingObserver : public protocols::Observer {
 public:
  CheckingObserver(net::Network& net, checker::Oracle& oracle, checker::Monitor& monitor,
                   std::size_t completion_quorum, std::vector<std::uint64_t>& replica_reads,
                   std::uint64_t& gate_rejects)
      : net_(net),
        oracle_(oracle),
        monitor_(monitor),
        quorum_(completion_quorum),
        replica_reads_(replica_reads),
        gate_rejects_(gate_rejects) {}

  void on_decided(const WriteRecord& w) override { oracle_.record_decided(w); }
  void on_applied(std::size_t r, std::uint64_t index) override { oracle_.record_applied(r, index); }
  void on_completion(std::size_t, SeqNum s) override {
    monitor_.check_completion(s, quorum_, net_.now());
  }
  void on_read_served(std::size_t r, const Message& req, SeqNum version) override {
    ++replica_reads_[r];
    monitor_.on_read_response(req.object, version, req.ghost_last_response, net_.now(),
                              replica_node(r));
  }
  void on_gate_reject(std::size_t, const Message&) override { ++gate_rejects_; }
  void on_membership(std::size_t r, bool member) override { oracle_.set_member(r, member); }

 private:
  net::Network& net_;
  checker::Oracle& oracle_;
  checker::Monitor& monitor_;
  std::size_t quorum_;
  std::vector<std::uint64_t>& replica_reads_;
  std::uint64_t& gate_rejects_;
};

std::uint64_t mix(std::uint64_t seed, std::uint64_t salt) { return workload::client_seed(seed, salt); }

SimTime percentile(std::vector<SimTime>& v, double q) {
  if (v.empty()) return 0;
  std::size_t k = static_cast<std::size_t>(q * static_cast<double>(v.size() - 1));
  std::nth_element(v.begin(), v.begin() + k, v.end());
  return v[k];
}

}  // namespace

RunResult run(const RunConfig& cfg_in, const RunOptions& options) {
  RunConfig cfg = cfg_in;
  cfg.validate();
  auto faults = net::validate_schedule(cfg.faults, cfg.protocol.replicas);
  cfg.net.rng_seed = mix(cfg.seed, 0xA11CE);
  for (const auto& [r, d] : cfg.lagging_replicas) {
    for (std::size_t j = 0; j < cfg.protocol.replicas; ++j) {
      if (j != r) cfg.net.link_extra_delay[{replica_node(j), replica_node(r)}] = d;
    }
  }

  net::Network net(cfg.net);
  std::ostringstream trace;
  if (options.trace) net.set_trace(&trace);

  const bool read_behind = cfg.protocol.read_behind();
  checker::Oracle oracle(read_behind ? checker::Mode::ReadBehind : checker::Mode::ReadAhead,
                         cfg.protocol.replicas);
  checker::Monitor monitor(oracle, cfg.witness_events);

  Metrics metrics;
  metrics.bucket = cfg.bucket;
  metrics.replica_reads.assign(cfg.protocol.replicas, 0);
  const std::size_t nbuckets = static_cast<std::size_t>((cfg.duration + cfg.bucket - 1) / cfg.bucket);
  metrics.timeline_reads.assign(nbuckets, 0);
  metrics.timeline_writes.assign(nbuckets, 0);

  CheckingObserver observer(net, oracle, monitor, read_behind ? cfg.protocol.quorum() : 0,
                            metrics.replica_reads, metrics.gate_rejects);
  protocols::ReplicaGroup group(net, cfg.protocol, &observer);

  // Switch incarnations: 1 plus every id that the schedule activates.
  std::uint64_t active_id = 1;
  std::vector<std::unique_ptr<SwitchNode>> switches;
  auto find_switch = [&](std::uint64_t sid) -> SwitchNode* {
    for (auto& s : switches) {
      if (s->switch_id() == sid) return s.get();
    }
    return nullptr;
  };
  SwitchNode::Hooks hooks;
  hooks.read_issued = [&](ObjectId o) { return monitor.on_read_issued(o, net.now()); };
  hooks.fast_read = [&](const SwitchNode& sw, ObjectId o, SeqNum lc) {
    if (sw.switch_id() == active_id) monitor.check_fast_read(o, false, lc, net.now());
  };
  hooks.removal = [&](ObjectId o, SeqNum removed, SeqNum lc) {
    monitor.check_removal(o, removed, lc, net.now());
  };
  hooks.fast_path_enabled = [&](const SwitchNode& sw) {
    metrics.fast_path_enabled_at.emplace_back(sw.switch_id(), net.now());
  };
  hooks.gc_sample = [&](std::size_t occ) { metrics.dirty_occupancy.emplace_back(net.now(), occ); };

  std::vector<std::uint64_t> switch_ids{1};
  for (const auto& f : faults) {
    if (f.kind == net::FaultEntry::Kind::ActivateSwitch) switch_ids.push_back(f.switch_id);
  }
  for (std::uint64_t sid : switch_ids) {
    auto sw = std::make_unique<SwitchNode>(net, group, sid, cfg.geometry, cfg.protocol.harmonia,
                                           cfg.gc_interval, cfg.revoke_retry, mix(cfg.seed, 0x5000 + sid),
                                           hooks);
    net.add_node(sw->node(), sw.get());
    switches.push_back(std::move(sw));
  }

  // Clients.
  std::vector<SimTime> latencies;
  auto on_done = [&](const workload::Completion& c) {
    std::size_t b = static_cast<std::size_t>(c.finished / cfg.bucket);
    bool write = c.kind == workload::OpKind::Write;
    if (b < nbuckets) (write ? metrics.timeline_writes : metrics.timeline_reads)[b]++;
    if (c.finished >= cfg.warmup && c.finished < cfg.duration) {
      (write ? metrics.writes : metrics.reads)++;
      latencies.push_back(c.finished - c.first_issued);
    }
  };
  std::vector<std::unique_ptr<workload::Client>> clients;
  auto add_client = [&](workload::ClientOptions opts, std::uint64_t salt) {
    NodeId id = client_node(clients.size());
    auto c = std::make_unique<workload::Client>(
        net, id, workload::Generator(cfg.workload, mix(cfg.seed, salt)), opts, on_done);
    net.add_node(id, c.get());
    c->bind(switch_node(1));
    clients.push_back(std::move(c));
  };
  for (std::uint32_t i = 0; i < cfg.workload.clients; ++i) {
    workload::ClientOptions opts;
    opts.timeout = cfg.client_timeout;
    opts.mode = cfg.workload.mode;
    if (opts.mode == workload::LoopMode::Open) {
      opts.period = std::max<SimTime>(1, static_cast<SimTime>(1e9 / cfg.workload.open_rate));
    }
    opts.stop_at = cfg.duration;
    add_client(opts, 1 + i);
  }
  if (cfg.writer_period > 0) {
    workload::ClientOptions opts;
    opts.timeout = cfg.client_timeout;
    opts.mode = workload::LoopMode::Open;
    opts.period = cfg.writer_period;
    opts.only = workload::OpKind::Write;
    opts.stop_at = cfg.duration;
    add_client(opts, 0xB0B);
  }
  if (cfg.prime) {
    workload::ClientOptions opts;
    opts.timeout = cfg.client_timeout;
    opts.only = workload::OpKind::Write;
    opts.stop_at = 1;  // exactly one operation, retried until answered
    add_client(opts, 0xF00D);
  }

  // Faults.
  std::mt19937_64 fault_rng(mix(cfg.seed, 0xFA017));
  for (const auto& f : faults) {
    using K = net::FaultEntry::Kind;
    switch (f.kind) {
      case K::CrashSwitch:
        net::inject_fault(net, f, [&](const net::FaultEntry&) { net.crash(switch_node(active_id)); });
        break;
      case K::ActivateSwitch: {
        SimTime window = cfg.rebind_window;
        net::inject_fault(net, f, [&, window](const net::FaultEntry& e) {
          active_id = e.switch_id;
          find_switch(e.switch_id)->activate(false);
          for (auto& c : clients) {
            workload::Client* cp = c.get();
            NodeId target = switch_node(e.switch_id);
            if (window == 0) {
              cp->bind(target);
            } else {
              SimTime at = net.now() + std::uniform_int_distribution<SimTime>(0, window)(fault_rng);
              net.at(at, [cp, target] { cp->bind(target); });
            }
          }
        });
        break;
      }
      case K::CrashServer:
      case K::RecoverServer:
        net::inject_fault(net, f, [&](const net::FaultEntry& e) {
          if (e.kind == K::CrashServer) {
            group.crash(e.node);
          } else {
            group.recover(e.node);
          }
          for (auto& s : switches) s->refresh_replicas();
        });
        break;
      case K::Partition: {
        std::vector<NodeId> side;
        for (NodeId r : f.side) side.push_back(replica_node(r));
        net.partition(f.at, f.until, side);
        break;
      }
    }
  }

  group.start();
  switches.front()->activate(true);
  for (auto& c : clients) c->start();

  if (cfg.stop_on_violation) {
    const SimTime slice = std::max<SimTime>(cfg.bucket, 100 * kMicrosecond);
    for (SimTime t = slice; ; t += slice) {
      net.run_until(std::min(t, cfg.duration));
      if (monitor.violation_count() > 0 || t >= cfg.duration) break;
    }
  } else {
    net.run_until(cfg.duration);
  }

  RunResult result;
  result.replica_logs = group.logs();
  result.report = monitor.final_sweep(result.replica_logs);

  metrics.window = cfg.duration - cfg.warmup;
  const double secs = static_cast<double>(metrics.window) / 1e9;
  metrics.read_throughput = static_cast<double>(metrics.reads) / secs;
  metrics.write_throughput = static_cast<double>(metrics.writes) / secs;
  metrics.total_throughput = metrics.read_throughput + metrics.write_throughput;
  metrics.p50_latency = percentile(latencies, 0.50);
  metrics.p99_latency = percentile(latencies, 0.99);
  for (const auto& s : switches) {
    metrics.fast_reads += s->scheduler().stats().reads_single;
    metrics.normal_reads += s->normal_reads();
    metrics.dropped_writes += s->scheduler().stats().writes_dropped;
    metrics.handoff_drops += s->handoff_drops();
  }
  for (const auto& c : clients) metrics.client_retries += c->retries();
  metrics.violations = result.report.violations.size();
  metrics.messages = group.counters();
  metrics.net = net.stats();
  result.metrics = std::move(metrics);
  if (options.trace) result.trace = trace.str();
  return result;
}

}  // namespace harmonia::harness
