#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "harmonia/core/message.hpp"
#include "harmonia/net/event_queue.hpp"

namespace harmonia::net {

struct NetConfig {
  SimTime base_delay = 5 * kMicrosecond;  // one way
  SimTime jitter = 0;                     // uniform extra delay in [0, jitter]
  double drop_prob = 0;
  double duplicate_prob = 0;
  // Adversarial reordering: a message is held to the end of its reorder
  // window and then delivered in reverse send order within that window.
  bool adversarial_reorder = false;
  double reorder_prob = 1.0;
  SimTime reorder_window = 0;
  // Extra one-way delay on every message to or from a node.
  std::map<NodeId, SimTime> node_extra_delay;
  // Extra one-way delay on a directed link (from, to).
  std::map<std::pair<NodeId, NodeId>, SimTime> link_extra_delay;
  // Per-link drop probability overriding drop_prob.
  std::map<std::pair<NodeId, NodeId>, double> link_drop_prob;
  std::uint64_t rng_seed = 1;

  // Throws std::invalid_argument when a probability is outside [0, 1] or a
  // duration is negative.
  void validate() const;
};

class Node {
 public:
  virtual ~Node() = default;
  virtual void on_message(const Message& msg) = 0;
  virtual void on_timer(std::uint64_t /*tag*/) {}
};

class LivelockError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct NetStats {
  std::uint64_t sends = 0;
  std::uint64_t deliveries = 0;
  std::uint64_t drops = 0;
  std::uint64_t duplicates = 0;
  std::uint64_t dead_letters = 0;  // deliveries suppressed by a crashed receiver
};

// Deterministic single-threaded discrete-event network.
class Network {
 public:
  explicit Network(NetConfig config);

  void add_node(NodeId id, Node* node);

  // Schedules 0, 1 or 2 deliveries of msg to `to`.
  void send(Message msg, NodeId from, NodeId to);
  // Lossless delivery after `delay` (control plane, operator actions).
  void send_reliable(Message msg, NodeId from, NodeId to, SimTime delay);

  void set_timer(NodeId node, SimTime delay, std::uint64_t tag);
  void at(SimTime when, std::function<void()> fn);

  void crash(NodeId node);
  void recover(NodeId node);
  bool crashed(NodeId node) const;

  // Messages between `side` and the rest of the nodes are dropped in [from, until).
  void partition(SimTime from, SimTime until, std::vector<NodeId> side);

  // Runs events with time <= t, then sets the clock to t.
  void run_until(SimTime t);
  // Runs until pred() holds (checked after every event), the queue drains,
  // or the event budget is exhausted (throws LivelockError).
  bool run_until(const std::function<bool()>& pred, std::uint64_t max_events);
  void run_until_quiescent(std::uint64_t max_events);

  SimTime now() const { return queue_.now(); }
  const NetStats& stats() const { return stats_; }
  std::uint64_t events_processed() const { return events_; }
  const NetConfig& config() const { return config_; }
  std::mt19937_64& rng() { return rng_; }

  // JSON-lines event trace; nullptr disables tracing.
  void set_trace(std::ostream* out) { trace_ = out; }
  std::ostream* trace() const { return trace_; }

 private:
  bool step();
  void dispatch(Event& e);
  bool blocked(NodeId a, NodeId b) const;
  SimTime delay_for(NodeId from, NodeId to);
  void trace_msg(const char* what, const Message& msg, SimTime at);

  NetConfig config_;
  EventQueue queue_;
  std::mt19937_64 rng_;
  std::vector<Node*> nodes_;
  std::vector<bool> crashed_;
  struct Partition {
    SimTime from;
    SimTime until;
    std::vector<NodeId> side;
  };
  std::vector<Partition> partitions_;
  NetStats stats_;
  std::uint64_t events_ = 0;
  std::ostream* trace_ = nullptr;
};

}  // namespace harmonia::net
