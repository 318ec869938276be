#include "harmonia/harness/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "harmonia/core/duration.hpp"

namespace harmonia::harness {

namespace {

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

bool parse_bool(const std::string& v) {
  if (v == "on" || v == "true" || v == "yes" || v == "1") return true;
  if (v == "off" || v == "false" || v == "no" || v == "0") return false;
  throw std::invalid_argument("expected on/off, got '" + v + "'");
}

std::uint64_t parse_u64(const std::string& v) {
  std::size_t pos = 0;
  unsigned long long x = 0;
  try {
    x = std::stoull(v, &pos);
  } catch (const std::exception&) {
    throw std::invalid_argument("expected an integer, got '" + v + "'");
  }
  if (pos != v.size() || v.front() == '-') {
    throw std::invalid_argument("expected an integer, got '" + v + "'");
  }
  return x;
}

double parse_double(const std::string& v) {
  std::size_t pos = 0;
  double x = 0;
  try {
    x = std::stod(v, &pos);
  } catch (const std::exception&) {
    throw std::invalid_argument("expected a number, got '" + v + "'");
  }
  if (pos != v.size()) throw std::invalid_argument("expected a number, got '" + v + "'");
  return x;
}

std::string fmt_double(double d) {
  std::ostringstream os;
  os.precision(17);
  os << d;
  return os.str();
}

const char* on_off(bool b) { return b ? "on" : "off"; }

}  // namespace

void RunConfig::validate() const {
  protocol.validate();
  net.validate();
  workload.validate();
  if (geometry.stages == 0 || geometry.slots == 0) {
    throw std::invalid_argument("switch stages and slots must be >= 1");
  }
  if (gc_interval <= 0) throw std::invalid_argument("gc-interval must be positive");
  if (client_timeout <= 0) throw std::invalid_argument("client-timeout must be positive");
  if (writer_period < 0 || rebind_window < 0) {
    throw std::invalid_argument("writer-period and rebind-window must be non-negative");
  }
  if (revoke_retry <= 0) throw std::invalid_argument("revoke-retry must be positive");
  if (duration <= 0) throw std::invalid_argument("duration must be positive");
  if (warmup < 0 || warmup >= duration) throw std::invalid_argument("warmup must be in [0, duration)");
  if (bucket <= 0) throw std::invalid_argument("bucket must be positive");
  for (const auto& [node, d] : net.node_extra_delay) {
    if (!is_replica_node(node) || node >= protocol.replicas) {
      throw std::invalid_argument("slow-replica index out of range");
    }
  }
  for (const auto& [r, d] : lagging_replicas) {
    if (r >= protocol.replicas) throw std::invalid_argument("lagging-replica index out of range");
    if (d < 0) throw std::invalid_argument("lagging-replica delay must be non-negative");
  }
  auto sorted = net::validate_schedule(faults, protocol.replicas);
  // Server faults must be ones the protocol can handle.
  for (const auto& f : sorted) {
    using K = net::FaultEntry::Kind;
    if (f.kind == K::CrashServer) {
      if (protocol.protocol == Protocol::Craq) {
        throw std::invalid_argument("server faults are not supported for CRAQ");
      }
      if (f.node == 0) {
        throw std::invalid_argument(
            "crash-server node=0 would remove the primary/head/leader, which is out of scope");
      }
    } else if (f.kind == K::ActivateSwitch && f.switch_id > kMaxSwitchId) {
      throw std::invalid_argument("switch id too large");
    }
  }
  if (protocol.protocol == Protocol::Viewstamped) {
    // Every crash must leave a quorum alive.
    std::size_t dead = 0;
    for (const auto& f : sorted) {
      if (f.kind == net::FaultEntry::Kind::CrashServer) ++dead;
      if (f.kind == net::FaultEntry::Kind::RecoverServer) --dead;
      if (protocol.replicas - dead < protocol.quorum()) {
        throw std::invalid_argument("fault schedule leaves VR without a quorum");
      }
    }
  }
}

void apply_setting(RunConfig& cfg, std::string_view key_in, std::string_view value_in) {
  const std::string key(key_in);
  const std::string v = trim(value_in);
  auto& p = cfg.protocol;
  auto& n = cfg.net;
  auto& w = cfg.workload;
  if (key == "protocol") {
    auto proto = parse_protocol(v);
    if (!proto) throw std::invalid_argument("unknown protocol '" + v + "'");
    p.protocol = *proto;
    if (p.protocol == Protocol::Craq) p.harmonia = false;
  } else if (key == "harmonia") {
    p.harmonia = parse_bool(v);
  } else if (key == "replicas") {
    p.replicas = parse_u64(v);
  } else if (key == "read-cost") {
    p.read_cost = parse_duration(v);
  } else if (key == "write-cost") {
    p.write_cost = parse_duration(v);
  } else if (key == "control-cost") {
    p.control_cost = parse_duration(v);
  } else if (key == "retransmit") {
    p.retransmit = parse_duration(v);
  } else if (key == "ack-interval") {
    p.ack_interval = parse_duration(v);
  } else if (key == "lease") {
    p.lease_duration = parse_duration(v);
  } else if (key == "completion-delay") {
    p.completion = protocols::parse_completion_policy(v);
  } else if (key == "mutate") {
    if (v == "read-ahead-gate-off") p.read_ahead_gate = false;
    else if (v == "read-behind-gate-off") p.read_behind_gate = false;
    else if (v == "stale-switch-reads") p.lease_check = false;
    else if (v == "none") {
      p.read_ahead_gate = p.read_behind_gate = p.lease_check = true;
    } else {
      throw std::invalid_argument("unknown mutation '" + v + "'");
    }
  } else if (key == "base-delay") {
    n.base_delay = parse_duration(v);
  } else if (key == "jitter") {
    n.jitter = parse_duration(v);
  } else if (key == "drop-prob") {
    n.drop_prob = parse_double(v);
  } else if (key == "duplicate-prob") {
    n.duplicate_prob = parse_double(v);
  } else if (key == "reorder") {
    n.adversarial_reorder = parse_bool(v);
  } else if (key == "reorder-prob") {
    n.reorder_prob = parse_double(v);
  } else if (key == "reorder-window") {
    n.reorder_window = parse_duration(v);
  } else if (key == "slow-replica") {
    auto colon = v.find(':');
    if (colon == std::string::npos) throw std::invalid_argument("slow-replica needs <index>:<delay>");
    n.node_extra_delay[replica_node(parse_u64(v.substr(0, colon)))] =
        parse_duration(v.substr(colon + 1));
  } else if (key == "lagging-replica") {
    auto colon = v.find(':');
    if (colon == std::string::npos) {
      throw std::invalid_argument("lagging-replica needs <index>:<delay>");
    }
    cfg.lagging_replicas[parse_u64(v.substr(0, colon))] = parse_duration(v.substr(colon + 1));
  } else if (key == "keys") {
    w.num_keys = static_cast<std::uint32_t>(parse_u64(v));
  } else if (key == "distribution") {
    if (v == "uniform") {
      w.distribution = workload::Distribution::Uniform;
    } else if (v == "zipf") {
      w.distribution = workload::Distribution::Zipf;
    } else if (v.rfind("zipf-", 0) == 0) {
      w.distribution = workload::Distribution::Zipf;
      w.theta = parse_double(v.substr(5));
    } else {
      throw std::invalid_argument("distribution must be uniform, zipf or zipf-<theta>");
    }
  } else if (key == "theta") {
    w.theta = parse_double(v);
  } else if (key == "write-ratio") {
    w.write_ratio = parse_double(v);
  } else if (key == "clients") {
    w.clients = static_cast<std::uint32_t>(parse_u64(v));
  } else if (key == "loop") {
    if (v == "closed") w.mode = workload::LoopMode::Closed;
    else if (v == "open") w.mode = workload::LoopMode::Open;
    else throw std::invalid_argument("loop must be closed or open");
  } else if (key == "rate") {
    w.open_rate = parse_double(v);
  } else if (key == "client-timeout") {
    cfg.client_timeout = parse_duration(v);
  } else if (key == "writer-period") {
    cfg.writer_period = parse_duration(v);
  } else if (key == "stages") {
    cfg.geometry.stages = parse_u64(v);
  } else if (key == "slots") {
    cfg.geometry.slots = parse_u64(v);
  } else if (key == "gc-interval") {
    cfg.gc_interval = parse_duration(v);
  } else if (key == "fault") {
    cfg.faults.push_back(net::parse_fault(v));
  } else if (key == "rebind-window") {
    cfg.rebind_window = parse_duration(v);
  } else if (key == "revoke-retry") {
    cfg.revoke_retry = parse_duration(v);
  } else if (key == "prime") {
    cfg.prime = parse_bool(v);
  } else if (key == "seed") {
    cfg.seed = parse_u64(v);
  } else if (key == "duration") {
    cfg.duration = parse_duration(v);
  } else if (key == "warmup") {
    cfg.warmup = parse_duration(v);
  } else if (key == "bucket") {
    cfg.bucket = parse_duration(v);
  } else if (key == "stop-on-violation") {
    cfg.stop_on_violation = parse_bool(v);
  } else if (key == "witness-events") {
    cfg.witness_events = parse_u64(v);
  } else {
    throw std::invalid_argument("unknown config key '" + key + "'");
  }
}

RunConfig parse_config(std::string_view text) {
  RunConfig cfg;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    std::string l = trim(line);
    if (l.empty()) continue;
    auto eq = l.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("line " + std::to_string(line_no) + ": expected key = value");
    }
    try {
      apply_setting(cfg, trim(std::string_view(l).substr(0, eq)),
                    std::string_view(l).substr(eq + 1));
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("line " + std::to_string(line_no) + ": " + e.what());
    }
    if (end == text.size()) break;
  }
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string to_text(const RunConfig& cfg) {
  const auto& p = cfg.protocol;
  const auto& n = cfg.net;
  const auto& w = cfg.workload;
  std::ostringstream os;
  os << "protocol = " << to_string(p.protocol) << "\n"
     << "harmonia = " << on_off(p.harmonia) << "\n"
     << "replicas = " << p.replicas << "\n"
     << "read-cost = " << format_duration(p.read_cost) << "\n"
     << "write-cost = " << format_duration(p.write_cost) << "\n"
     << "control-cost = " << format_duration(p.control_cost) << "\n"
     << "retransmit = " << format_duration(p.retransmit) << "\n"
     << "ack-interval = " << format_duration(p.ack_interval) << "\n"
     << "lease = " << format_duration(p.lease_duration) << "\n"
     << "completion-delay = " << protocols::to_string(p.completion) << "\n";
  if (!p.read_ahead_gate) os << "mutate = read-ahead-gate-off\n";
  if (!p.read_behind_gate) os << "mutate = read-behind-gate-off\n";
  if (!p.lease_check) os << "mutate = stale-switch-reads\n";
  os << "base-delay = " << format_duration(n.base_delay) << "\n"
     << "jitter = " << format_duration(n.jitter) << "\n"
     << "drop-prob = " << fmt_double(n.drop_prob) << "\n"
     << "duplicate-prob = " << fmt_double(n.duplicate_prob) << "\n"
     << "reorder = " << on_off(n.adversarial_reorder) << "\n"
     << "reorder-prob = " << fmt_double(n.reorder_prob) << "\n"
     << "reorder-window = " << format_duration(n.reorder_window) << "\n";
  for (const auto& [node, d] : n.node_extra_delay) {
    os << "slow-replica = " << node << ":" << format_duration(d) << "\n";
  }
  for (const auto& [r, d] : cfg.lagging_replicas) {
    os << "lagging-replica = " << r << ":" << format_duration(d) << "\n";
  }
  os << "keys = " << w.num_keys << "\n"
     << "distribution = " << (w.distribution == workload::Distribution::Uniform ? "uniform" : "zipf")
     << "\n"
     << "theta = " << fmt_double(w.theta) << "\n"
     << "write-ratio = " << fmt_double(w.write_ratio) << "\n"
     << "clients = " << w.clients << "\n"
     << "loop = " << (w.mode == workload::LoopMode::Closed ? "closed" : "open") << "\n";
  if (w.mode == workload::LoopMode::Open) os << "rate = " << fmt_double(w.open_rate) << "\n";
  os << "client-timeout = " << format_duration(cfg.client_timeout) << "\n"
     << "writer-period = " << format_duration(cfg.writer_period) << "\n"
     << "stages = " << cfg.geometry.stages << "\n"
     << "slots = " << cfg.geometry.slots << "\n"
     << "gc-interval = " << format_duration(cfg.gc_interval) << "\n";
  for (const auto& f : cfg.faults) os << "fault = " << net::to_string(f) << "\n";
  os << "rebind-window = " << format_duration(cfg.rebind_window) << "\n"
     << "revoke-retry = " << format_duration(cfg.revoke_retry) << "\n"
     << "prime = " << on_off(cfg.prime) << "\n"
     << "seed = " << cfg.seed << "\n"
     << "duration = " << format_duration(cfg.duration) << "\n"
     << "warmup = " << format_duration(cfg.warmup) << "\n"
     << "bucket = " << format_duration(cfg.bucket) << "\n"
     << "stop-on-violation = " << on_off(cfg.stop_on_violation) << "\n"
     << "witness-events = " << cfg.witness_events << "\n";
  return os.str();
}

}  // namespace harmonia::harness
