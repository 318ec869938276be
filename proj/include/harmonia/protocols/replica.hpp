#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <vector>

#include "harmonia/core/message.hpp"
#include "harmonia/core/topology.hpp"
#include "harmonia/net/network.hpp"
#include "harmonia/protocols/gates.hpp"
#include "harmonia/store/replica_store.hpp"

namespace harmonia::protocols {

struct ProtocolConfig {
  Protocol protocol = Protocol::Chain;
  std::size_t replicas = 3;
  bool harmonia = true;

  // Per-operation service time on a replica's single-server queue.
  SimTime read_cost = 1 * kMicrosecond;
  SimTime write_cost = 1250;
  SimTime control_cost = 250;

  SimTime retransmit = 1 * kMillisecond;  // resend unacknowledged protocol messages
  SimTime ack_interval = 20 * kMicrosecond;  // chain background ack period
  SimTime lease_duration = 10 * kMillisecond;
  CompletionPolicy completion;

  // Fault-injection switches for checker mutation tests. All true in
  // correct runs.
  bool read_ahead_gate = true;
  bool read_behind_gate = true;
  bool lease_check = true;

  std::size_t quorum() const { return replicas / 2 + 1; }
  bool read_behind() const { return !is_read_ahead(protocol); }

  // Throws std::invalid_argument.
  void validate() const;
};

// Instrumentation hooks feeding the checker and metrics. Protocol logic
// never depends on what an observer does.
class Observer {
 public:
  virtual ~Observer() = default;
  virtual void on_decided(const WriteRecord&) {}
  virtual void on_applied(std::size_t /*replica*/, std::uint64_t /*index*/) {}
  virtual void on_completion(std::size_t /*replica*/, SeqNum) {}
  virtual void on_read_served(std::size_t /*replica*/, const Message& /*req*/, SeqNum /*version*/) {}
  virtual void on_gate_reject(std::size_t /*replica*/, const Message& /*req*/) {}
  virtual void on_membership(std::size_t /*replica*/, bool /*member*/) {}
};

struct MessageCounters {
  std::array<std::uint64_t, kMessageKindCount> sent{};
  // Logical messages that ride inside another one (completion on a write
  // reply, VR commit-ack on the next prepare-ok).
  std::uint64_t piggybacked = 0;
  std::uint64_t retransmissions = 0;

  std::uint64_t of(MessageKind k) const { return sent[static_cast<std::size_t>(k)]; }
  // Gross logical messages on the write path after the client's request.
  std::uint64_t write_path() const;
  void reset() { *this = MessageCounters{}; }
};

class ReplicaGroup;

// One replica: versioned store, lease state and a FIFO single-server queue.
// Protocol subclasses implement handle().
class Replica : public net::Node {
 public:
  Replica(ReplicaGroup& group, std::size_t index);

  void on_message(const Message& msg) final;
  void on_timer(std::uint64_t tag) final;

  std::size_t index() const { return index_; }
  NodeId node() const { return replica_node(index_); }
  const store::ReplicaStore& store() const { return store_; }
  const LeaseState& lease() const { return lease_; }
  std::uint64_t reads_served() const { return reads_served_; }
  std::uint64_t gate_rejects() const { return gate_rejects_; }
  SimTime busy_time() const { return busy_total_; }

  void start();

  // Operator actions, called by ReplicaGroup.
  virtual void on_peer_crashed(std::size_t /*peer*/) {}
  virtual void on_peer_recovered(std::size_t /*peer*/) {}
  // State transfer for a recovering replica: store and lease state from the
  // donor, then protocol-specific catch-up.
  void catch_up_from(const Replica& donor);
  void reset_volatile();

 protected:
  // Log entry with the request bookkeeping needed to answer the client.
  struct Entry {
    WriteRecord w;
    NodeId client = kNoNode;
    std::uint64_t request_id = 0;
  };

  virtual SimTime cost(const Message& msg) const;
  virtual void handle(const Message& msg) = 0;
  virtual void catch_up(const Replica& donor) = 0;
  virtual void on_tick() {}
  // Where a rejected fast-path read goes (primary / tail / leader).
  virtual NodeId normal_read_node() const = 0;
  virtual bool gate_allows(const Message& read) const = 0;

  void handle_fast_read(const Message& read);
  void serve_read(const Message& read);
  void forward_normal(const Message& read);

  void send(Message m, NodeId to);
  void send_to_switch(Message m, std::uint64_t switch_id);
  Message entry_message(MessageKind kind, const Entry& e, std::uint64_t index) const;
  Entry entry_from(const Message& m) const;
  // Replies to the client through the switch that stamped the write;
  // piggybacks the completion when Harmonia is on and `completion` is set.
  void reply_write(const Entry& e, bool completion);
  void send_completion(const Entry& e);

  ReplicaGroup& group_;
  std::size_t index_;
  store::ReplicaStore store_;
  LeaseState lease_;

 private:
  void process(const Message& msg);
  void handle_lease_revoke(const Message& msg);
  void arm_timer(std::uint64_t kind, SimTime delay);

  SimTime busy_until_ = 0;
  SimTime busy_total_ = 0;
  std::uint64_t epoch_ = 0;
  std::uint64_t reads_served_ = 0;
  std::uint64_t gate_rejects_ = 0;
};

// The replica group of one protocol instance plus the operator role for
// server failures (membership changes are applied atomically by the group).
class ReplicaGroup {
 public:
  ReplicaGroup(net::Network& net, ProtocolConfig config, Observer* observer = nullptr);
  ~ReplicaGroup();
  ReplicaGroup(const ReplicaGroup&) = delete;
  ReplicaGroup& operator=(const ReplicaGroup&) = delete;

  void start();

  std::size_t size() const { return replicas_.size(); }
  Replica& replica(std::size_t i) { return *replicas_.at(i); }
  const Replica& replica(std::size_t i) const { return *replicas_.at(i); }
  bool live(std::size_t i) const { return live_.at(i); }
  std::vector<std::size_t> live_indices() const;
  std::vector<NodeId> live_nodes() const;

  // Entry points of the normal protocol for requests arriving at a switch.
  NodeId normal_write_target() const;
  NodeId normal_read_target(std::mt19937_64& rng) const;

  // Whether a server fault on replica i is supported by this protocol.
  bool can_crash(std::size_t i) const;
  bool can_recover(std::size_t i) const;
  void crash(std::size_t i);    // throws std::invalid_argument when unsupported
  void recover(std::size_t i);  // catch-up state transfer, then rejoin

  // Chain order over live replicas (head first). Starts as 0..n-1; a
  // recovered replica rejoins at the tail.
  const std::vector<std::size_t>& chain() const { return chain_; }
  std::optional<std::size_t> live_successor(std::size_t i) const;
  std::optional<std::size_t> live_predecessor(std::size_t i) const;
  std::size_t live_head() const { return chain_.front(); }
  std::size_t live_tail() const { return chain_.back(); }

  std::vector<std::vector<WriteRecord>> logs() const;

  net::Network& net() { return net_; }
  const ProtocolConfig& config() const { return config_; }
  Observer& observer() { return *observer_; }
  MessageCounters& counters() { return counters_; }
  const MessageCounters& counters() const { return counters_; }

 private:
  net::Network& net_;
  ProtocolConfig config_;
  Observer null_observer_;
  Observer* observer_;
  std::vector<std::unique_ptr<Replica>> replicas_;
  std::vector<bool> live_;
  std::vector<std::size_t> chain_;
  MessageCounters counters_;
};

}  // namespace harmonia::protocols
