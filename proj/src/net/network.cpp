#include "harmonia/net/network.hpp"

#include <algorithm>

namespace harmonia::net {

void NetConfig::validate() const {
  auto prob = [](double p, const char* what) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw std::invalid_argument(std::string(what) + " must be in [0, 1]");
    }
  };
  prob(drop_prob, "drop probability");
  prob(duplicate_prob, "duplicate probability");
  prob(reorder_prob, "reorder probability");
  for (const auto& [link, p] : link_drop_prob) prob(p, "link drop probability");
  if (base_delay < 0 || jitter < 0 || reorder_window < 0) {
    throw std::invalid_argument("network delays must be non-negative");
  }
  for (const auto& [node, d] : node_extra_delay) {
    if (d < 0) throw std::invalid_argument("node delay must be non-negative");
  }
  for (const auto& [link, d] : link_extra_delay) {
    if (d < 0) throw std::invalid_argument("link delay must be non-negative");
  }
}

Network::Network(NetConfig config) : config_(std::move(config)), rng_(config_.rng_seed) {
  config_.validate();
}

void Network::add_node(NodeId id, Node* node) {
  if (id >= nodes_.size()) {
    nodes_.resize(id + 1, nullptr);
    crashed_.resize(id + 1, false);
  }
  if (nodes_[id] != nullptr) throw std::invalid_argument("duplicate node id");
  nodes_[id] = node;
}

bool Network::crashed(NodeId node) const { return node < crashed_.size() && crashed_[node]; }

void Network::crash(NodeId node) {
  if (node >= crashed_.size()) throw std::invalid_argument("unknown node");
  crashed_[node] = true;
  if (trace_) *trace_ << "{\"t\":" << now() << ",\"ev\":\"crash\",\"node\":" << node << "}\n";
}

void Network::recover(NodeId node) {
  if (node >= crashed_.size()) throw std::invalid_argument("unknown node");
  crashed_[node] = false;
  if (trace_) *trace_ << "{\"t\":" << now() << ",\"ev\":\"recover\",\"node\":" << node << "}\n";
}

void Network::partition(SimTime from, SimTime until, std::vector<NodeId> side) {
  std::sort(side.begin(), side.end());
  partitions_.push_back(Partition{from, until, std::move(side)});
}

bool Network::blocked(NodeId a, NodeId b) const {
  const SimTime t = now();
  for (const auto& p : partitions_) {
    if (t < p.from || t >= p.until) continue;
    bool ia = std::binary_search(p.side.begin(), p.side.end(), a);
    bool ib = std::binary_search(p.side.begin(), p.side.end(), b);
    if (ia != ib) return true;
  }
  return false;
}

SimTime Network::delay_for(NodeId from, NodeId to) {
  SimTime d = config_.base_delay;
  if (config_.jitter > 0) {
    d += std::uniform_int_distribution<SimTime>(0, config_.jitter)(rng_);
  }
  if (auto it = config_.node_extra_delay.find(from); it != config_.node_extra_delay.end()) {
    d += it->second;
  }
  if (auto it = config_.node_extra_delay.find(to); it != config_.node_extra_delay.end()) {
    d += it->second;
  }
  if (auto it = config_.link_extra_delay.find({from, to}); it != config_.link_extra_delay.end()) {
    d += it->second;
  }
  if (config_.adversarial_reorder && config_.reorder_window > 0) {
    if (std::uniform_real_distribution<double>(0, 1)(rng_) < config_.reorder_prob) {
      const SimTime w = config_.reorder_window;
      const SimTime t = now();
      const SimTime window_end = (t / w + 1) * w;
      // Later sends in the same window land earlier.
      d += (window_end - t) + (window_end - t);
    }
  }
  return d;
}

void Network::trace_msg(const char* what, const Message& msg, SimTime at) {
  *trace_ << "{\"t\":" << now() << ",\"ev\":\"" << what << "\",\"at\":" << at << ",\"kind\":\""
          << to_string(msg.kind) << "\",\"src\":" << msg.src << ",\"dst\":" << msg.dst
          << ",\"obj\":" << msg.object.id << ",\"seq\":\"" << msg.seq << "\",\"idx\":" << msg.index
          << ",\"client\":" << msg.client << ",\"req\":" << msg.request_id << "}\n";
}

void Network::send(Message msg, NodeId from, NodeId to) {
  if (crashed(from)) return;
  msg.src = from;
  msg.dst = to;
  ++stats_.sends;
  double drop = config_.drop_prob;
  if (auto it = config_.link_drop_prob.find({from, to}); it != config_.link_drop_prob.end()) {
    drop = it->second;
  }
  std::uniform_real_distribution<double> coin(0, 1);
  if (blocked(from, to) || (drop > 0 && coin(rng_) < drop)) {
    ++stats_.drops;
    if (trace_) trace_msg("drop", msg, now());
    return;
  }
  int copies = 1;
  if (config_.duplicate_prob > 0 && coin(rng_) < config_.duplicate_prob) {
    copies = 2;
    ++stats_.duplicates;
  }
  for (int i = 0; i < copies; ++i) {
    SimTime at = now() + delay_for(from, to);
    if (trace_) trace_msg("send", msg, at);
    queue_.push(at, Delivery{msg});
  }
}

void Network::send_reliable(Message msg, NodeId from, NodeId to, SimTime delay) {
  msg.src = from;
  msg.dst = to;
  ++stats_.sends;
  if (trace_) trace_msg("send", msg, now() + delay);
  queue_.push(now() + delay, Delivery{std::move(msg)});
}

void Network::set_timer(NodeId node, SimTime delay, std::uint64_t tag) {
  queue_.push(now() + delay, Timer{node, tag});
}

void Network::at(SimTime when, std::function<void()> fn) {
  queue_.push(std::max(when, now()), Callback{std::move(fn)});
}

void Network::dispatch(Event& e) {
  ++events_;
  if (auto* d = std::get_if<Delivery>(&e.body)) {
    NodeId to = d->msg.dst;
    if (to >= nodes_.size() || nodes_[to] == nullptr) {
      throw std::logic_error("delivery to unknown node " + std::to_string(to));
    }
    if (crashed(to)) {
      ++stats_.dead_letters;
      return;
    }
    ++stats_.deliveries;
    if (trace_) trace_msg("recv", d->msg, e.at);
    nodes_[to]->on_message(d->msg);
  } else if (auto* t = std::get_if<Timer>(&e.body)) {
    if (crashed(t->node)) return;
    nodes_[t->node]->on_timer(t->tag);
  } else if (auto* c = std::get_if<Callback>(&e.body)) {
    c->fn();
  }
}

bool Network::step() {
  auto e = queue_.pop();
  if (!e) return false;
  dispatch(*e);
  return true;
}

void Network::run_until(SimTime t) {
  while (true) {
    auto next = queue_.next_time();
    if (!next || *next > t) break;
    step();
  }
  if (queue_.now() < t) {
    // Advance the clock by pushing a no-op at t.
    queue_.push(t, Callback{[] {}});
    step();
  }
}

bool Network::run_until(const std::function<bool()>& pred, std::uint64_t max_events) {
  std::uint64_t budget = max_events;
  while (!pred()) {
    if (budget-- == 0) {
      throw LivelockError("event budget of " + std::to_string(max_events) +
                          " exhausted at t=" + std::to_string(now()) + "ns with " +
                          std::to_string(queue_.size()) + " events pending");
    }
    if (!step()) return false;
  }
  return true;
}

void Network::run_until_quiescent(std::uint64_t max_events) {
  run_until([] { return false; }, max_events);
}

}  // namespace harmonia::net
