#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "harmonia/core/message.hpp"
#include "harmonia/switch/multi_stage_table.hpp"

namespace harmonia::switching {

struct Geometry {
  std::size_t stages = 3;
  std::size_t slots = 64'000;
};

struct SchedulingOutcome {
  enum class Action { ForwardNormal, ForwardSingleReplica, DropWrite };
  Action action = Action::ForwardNormal;
  NodeId dst = kNoNode;
  SeqNum stamp;  // last_committed stamped on single-replica reads

  friend bool operator==(const SchedulingOutcome&, const SchedulingOutcome&) = default;
};

// In-switch request scheduler: sequence counter, dirty set and
// last-committed point for one switch incarnation.
class Scheduler {
 public:
  // Called for every entry leaving the dirty set, after last_committed has
  // been updated for the packet that caused the removal.
  using RemovalListener = std::function<void(ObjectId, SeqNum removed, SeqNum last_committed)>;

  Scheduler(std::uint64_t switch_id, Geometry geometry, std::vector<NodeId> replicas,
            std::uint64_t rng_seed);

  // Dispatches Write / WriteCompletion / Read; everything else passes
  // through to pkt.dst. Mutates pkt (sequence stamp, destination, read stamp).
  SchedulingOutcome process_packet(Message& pkt);

  SchedulingOutcome handle_write(Message& pkt);
  SchedulingOutcome handle_write_completion(const Message& pkt);
  SchedulingOutcome handle_read(Message& pkt);

  // Removes every dirty entry already covered by last_committed.
  std::size_t gc_stray_entries();

  void set_replica_set(std::vector<NodeId> replicas);
  const std::vector<NodeId>& replicas() const { return replicas_; }

  void set_removal_listener(RemovalListener listener) { on_remove_ = std::move(listener); }

  std::uint64_t switch_id() const { return switch_id_; }
  std::uint64_t counter() const { return counter_; }
  SeqNum last_committed() const { return last_committed_; }
  bool single_replica_enabled() const { return single_replica_enabled_; }
  const MultiStageTable& dirty_set() const { return table_; }

  struct Stats {
    std::uint64_t writes_stamped = 0;
    std::uint64_t writes_dropped = 0;
    std::uint64_t completions = 0;
    std::uint64_t reads_normal = 0;
    std::uint64_t reads_single = 0;
    std::uint64_t gc_removed = 0;
  };
  const Stats& stats() const { return stats_; }

 private:
  void remove_entry(ObjectId o, SeqNum s);

  std::uint64_t switch_id_;
  std::uint64_t counter_ = 0;
  MultiStageTable table_;
  SeqNum last_committed_ = kBottomWrite;
  std::vector<NodeId> replicas_;
  bool single_replica_enabled_ = false;
  std::mt19937_64 rng_;
  RemovalListener on_remove_;
  Stats stats_;
};

}  // namespace harmonia::switching
