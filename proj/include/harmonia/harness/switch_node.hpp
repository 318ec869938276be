#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <set>

#include "harmonia/net/network.hpp"
#include "harmonia/protocols/replica.hpp"
#include "harmonia/switch/scheduler.hpp"

namespace harmonia::harness {

// One switch incarnation on the path between clients and replicas. With
// Harmonia on it runs the scheduler; with it off it only stamps sequence
// numbers and routes everything along the normal protocol path.
class SwitchNode : public net::Node {
 public:
  struct Hooks {
    std::function<SeqNum(ObjectId)> read_issued;
    // Fast-path read leaving this switch (object is not dirty here).
    std::function<void(const SwitchNode&, ObjectId, SeqNum last_committed)> fast_read;
    std::function<void(ObjectId, SeqNum removed, SeqNum last_committed)> removal;
    std::function<void(const SwitchNode&)> fast_path_enabled;
    std::function<void(std::size_t occupancy)> gc_sample;
  };

  SwitchNode(net::Network& net, protocols::ReplicaGroup& group, std::uint64_t switch_id,
             switching::Geometry geometry, bool harmonia, SimTime gc_interval,
             SimTime revoke_retry, std::uint64_t seed, Hooks hooks);

  // The first switch starts with the replicas' initial lease and may write
  // at once. A replacement first revokes the old lease on every live
  // replica and drops writes until all of them have granted.
  void activate(bool initial);

  void on_message(const Message& msg) override;
  void on_timer(std::uint64_t tag) override;

  void refresh_replicas();

  std::uint64_t switch_id() const { return switch_id_; }
  NodeId node() const { return switch_node(switch_id_); }
  bool harmonia() const { return harmonia_; }
  bool active() const { return active_; }
  bool writes_enabled() const { return writes_enabled_; }
  bool fast_path_enabled() const { return harmonia_ && scheduler_.single_replica_enabled(); }
  const switching::Scheduler& scheduler() const { return scheduler_; }

  std::uint64_t handoff_drops() const { return handoff_drops_; }
  std::uint64_t normal_reads() const { return normal_reads_; }

 private:
  void client_write(Message msg);
  void client_read(Message msg);
  void completion(const Message& msg);
  void send_revokes();

  net::Network& net_;
  protocols::ReplicaGroup& group_;
  std::uint64_t switch_id_;
  bool harmonia_;
  SimTime gc_interval_;
  SimTime revoke_retry_;
  switching::Scheduler scheduler_;
  std::mt19937_64 rng_;
  Hooks hooks_;

  bool active_ = false;
  bool writes_enabled_ = false;
  bool announced_enabled_ = false;
  std::set<NodeId> grants_;
  std::uint64_t plain_counter_ = 0;  // Harmonia off
  std::uint64_t handoff_drops_ = 0;
  std::uint64_t normal_reads_ = 0;
};

}  // namespace harmonia::harness
