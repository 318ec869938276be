#include "harmonia/harness/switch_node.hpp"

#include <algorithm>

namespace harmonia::harness {

namespace {
constexpr std::uint64_t kGcTimer = 1;
constexpr std::uint64_t kRevokeTimer = 2;
}  // namespace

SwitchNode::SwitchNode(net::Network& net, protocols::ReplicaGroup& group, std::uint64_t switch_id,
                       switching::Geometry geometry, bool harmonia, SimTime gc_interval,
                       SimTime revoke_retry, std::uint64_t seed, Hooks hooks)
    : net_(net),
      group_(group),
      switch_id_(switch_id),
      harmonia_(harmonia),
      gc_interval_(gc_interval),
      revoke_retry_(revoke_retry),
      scheduler_(switch_id, geometry, group.live_nodes(), seed),
      rng_(seed ^ 0x5DEECE66Dull),
      hooks_(std::move(hooks)) {
  if (hooks_.removal) scheduler_.set_removal_listener(hooks_.removal);
}

void SwitchNode::refresh_replicas() {
  scheduler_.set_replica_set(group_.live_nodes());
  if (active_ && !writes_enabled_) {
    // A replica that crashed mid-handoff no longer needs to grant.
    send_revokes();
  }
}

void SwitchNode::activate(bool initial) {
  active_ = true;
  scheduler_.set_replica_set(group_.live_nodes());
  if (harmonia_) net_.set_timer(node(), gc_interval_, kGcTimer);
  if (initial) {
    writes_enabled_ = true;
    return;
  }
  send_revokes();
}

void SwitchNode::send_revokes() {
  bool all = true;
  for (NodeId r : group_.live_nodes()) {
    if (grants_.count(r)) continue;
    all = false;
    Message m;
    m.kind = MessageKind::LeaseRevoke;
    m.switch_id = switch_id_;
    net_.send(std::move(m), node(), r);
  }
  if (all) {
    writes_enabled_ = true;
    return;
  }
  net_.set_timer(node(), revoke_retry_, kRevokeTimer);
}

void SwitchNode::on_timer(std::uint64_t tag) {
  if (tag == kGcTimer) {
    scheduler_.gc_stray_entries();
    if (hooks_.gc_sample) hooks_.gc_sample(scheduler_.dirty_set().size());
    net_.set_timer(node(), gc_interval_, kGcTimer);
  } else if (tag == kRevokeTimer && !writes_enabled_) {
    send_revokes();
  }
}

void SwitchNode::on_message(const Message& in) {
  switch (in.kind) {
    case MessageKind::Write:
      client_write(in);
      break;
    case MessageKind::Read:
      client_read(in);
      break;
    case MessageKind::WriteReply:
      if (in.carries_completion) completion(in);
      if (is_client_node(in.client)) net_.send(in, node(), in.client);
      break;
    case MessageKind::WriteCompletion:
      completion(in);
      break;
    case MessageKind::ReadReply:
      if (is_client_node(in.client)) net_.send(in, node(), in.client);
      break;
    case MessageKind::LeaseGrant:
      if (in.switch_id == switch_id_ && !writes_enabled_) {
        grants_.insert(in.src);
        auto live = group_.live_nodes();
        if (std::all_of(live.begin(), live.end(), [&](NodeId r) { return grants_.count(r) > 0; })) {
          writes_enabled_ = true;
        }
      }
      break;
    default:
      break;
  }
}

void SwitchNode::client_write(Message msg) {
  if (!writes_enabled_) {
    ++handoff_drops_;
    return;
  }
  if (harmonia_) {
    auto out = scheduler_.handle_write(msg);
    if (out.action == switching::SchedulingOutcome::Action::DropWrite) return;
  } else {
    msg.seq = SeqNum{switch_id_, ++plain_counter_};
  }
  msg.switch_id = switch_id_;
  net_.send(std::move(msg), node(), group_.normal_write_target());
}

void SwitchNode::client_read(Message msg) {
  msg.switch_id = switch_id_;
  if (hooks_.read_issued) msg.ghost_last_response = hooks_.read_issued(msg.object);
  if (harmonia_) {
    auto out = scheduler_.handle_read(msg);
    if (out.action == switching::SchedulingOutcome::Action::ForwardSingleReplica) {
      if (hooks_.fast_read) hooks_.fast_read(*this, msg.object, out.stamp);
      msg.switch_id = switch_id_;
      net_.send(std::move(msg), node(), out.dst);
      return;
    }
  }
  ++normal_reads_;
  net_.send(std::move(msg), node(), group_.normal_read_target(rng_));
}

void SwitchNode::completion(const Message& msg) {
  if (!harmonia_) return;
  scheduler_.handle_write_completion(msg);
  if (!announced_enabled_ && scheduler_.single_replica_enabled()) {
    announced_enabled_ = true;
    if (hooks_.fast_path_enabled) hooks_.fast_path_enabled(*this);
  }
}

}  // namespace harmonia::harness
