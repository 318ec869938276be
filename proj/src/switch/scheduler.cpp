#include "harmonia/switch/scheduler.hpp"

#include <stdexcept>

namespace harmonia::switching {

using Action = SchedulingOutcome::Action;

Scheduler::Scheduler(std::uint64_t switch_id, Geometry geometry, std::vector<NodeId> replicas,
                     std::uint64_t rng_seed)
    : switch_id_(switch_id),
      table_(geometry.stages, geometry.slots),
      replicas_(std::move(replicas)),
      rng_(rng_seed) {
  if (switch_id == 0) {
    throw std::invalid_argument("switch id 0 is reserved for the bottom write");
  }
}

SchedulingOutcome Scheduler::process_packet(Message& pkt) {
  switch (pkt.kind) {
    case MessageKind::Write:
      return handle_write(pkt);
    case MessageKind::WriteCompletion:
      return handle_write_completion(pkt);
    case MessageKind::Read:
      return handle_read(pkt);
    case MessageKind::WriteReply:
      if (pkt.carries_completion) handle_write_completion(pkt);
      return {Action::ForwardNormal, pkt.dst, {}};
    default:
      return {Action::ForwardNormal, pkt.dst, {}};
  }
}

SchedulingOutcome Scheduler::handle_write(Message& pkt) {
  SeqNum seq{switch_id_, counter_ + 1};
  auto result = table_.insert(pkt.object, seq);
  if (result.kind == MultiStageTable::InsertKind::Full) {
    ++stats_.writes_dropped;
    return {Action::DropWrite, kNoNode, {}};
  }
  // The counter only advances for writes that actually leave the switch.
  counter_ = seq.counter;
  pkt.seq = seq;
  ++stats_.writes_stamped;
  return {Action::ForwardNormal, pkt.dst, {}};
}

SchedulingOutcome Scheduler::handle_write_completion(const Message& pkt) {
  ++stats_.completions;
  if (pkt.seq > last_committed_) last_committed_ = pkt.seq;
  if (auto resident = table_.search(pkt.object); resident && pkt.seq >= *resident) {
    table_.erase(pkt.object);
    remove_entry(pkt.object, *resident);
  }
  if (pkt.seq.switch_id == switch_id_) single_replica_enabled_ = true;
  return {Action::ForwardNormal, pkt.dst, {}};
}

SchedulingOutcome Scheduler::handle_read(Message& pkt) {
  auto resident = table_.search(pkt.object);
  if (resident && *resident <= last_committed_) {
    table_.erase(pkt.object);
    ++stats_.gc_removed;
    remove_entry(pkt.object, *resident);
    resident.reset();
  }
  if (resident || !single_replica_enabled_ || replicas_.empty()) {
    ++stats_.reads_normal;
    return {Action::ForwardNormal, pkt.dst, {}};
  }
  std::uniform_int_distribution<std::size_t> pick(0, replicas_.size() - 1);
  NodeId dst = replicas_[pick(rng_)];
  pkt.dst = dst;
  pkt.last_committed = last_committed_;
  pkt.single_replica = true;
  pkt.switch_id = switch_id_;
  ++stats_.reads_single;
  return {Action::ForwardSingleReplica, dst, last_committed_};
}

std::size_t Scheduler::gc_stray_entries() {
  auto removed = table_.sweep_at_or_below(last_committed_);
  for (const auto& e : removed) remove_entry(e.object, e.seq);
  stats_.gc_removed += removed.size();
  return removed.size();
}

void Scheduler::set_replica_set(std::vector<NodeId> replicas) { replicas_ = std::move(replicas); }

void Scheduler::remove_entry(ObjectId o, SeqNum s) {
  if (on_remove_) on_remove_(o, s, last_committed_);
}

}  // namespace harmonia::switching
