#include "harmonia/protocols/replica.hpp"

#include <algorithm>
#include <stdexcept>

#include "impl.hpp"

namespace harmonia::protocols {

namespace {
constexpr std::uint64_t kTickTimer = 1;
constexpr std::uint64_t kLeaseTimer = 2;
}  // namespace

void ProtocolConfig::validate() const {
  if (replicas == 0 || replicas >= kMaxReplicas) {
    throw std::invalid_argument("replica count must be in [1, " + std::to_string(kMaxReplicas - 1) +
                                "]");
  }
  if (read_cost < 0 || write_cost < 0 || control_cost < 0) {
    throw std::invalid_argument("service costs must be non-negative");
  }
  if (retransmit <= 0 || ack_interval <= 0 || lease_duration <= 0) {
    throw std::invalid_argument("protocol timers must be positive");
  }
  if (protocol == Protocol::Craq && harmonia) {
    throw std::invalid_argument("CRAQ runs without the Harmonia scheduler");
  }
}

std::uint64_t MessageCounters::write_path() const {
  std::uint64_t n = 0;
  for (MessageKind k :
       {MessageKind::StateUpdate, MessageKind::StateUpdateAck, MessageKind::ChainForward,
        MessageKind::CraqDirtyMark, MessageKind::CraqCommit, MessageKind::Prepare,
        MessageKind::PrepareOk, MessageKind::Commit, MessageKind::CommitAck,
        MessageKind::WriteReply, MessageKind::WriteCompletion}) {
    n += of(k);
  }
  return n;
}

Replica::Replica(ReplicaGroup& group, std::size_t index) : group_(group), index_(index) {}

SimTime Replica::cost(const Message& msg) const {
  const auto& c = group_.config();
  switch (msg.kind) {
    case MessageKind::Read:
      return c.read_cost;
    case MessageKind::Write:
    case MessageKind::StateUpdate:
    case MessageKind::ChainForward:
    case MessageKind::Prepare:
    case MessageKind::CraqDirtyMark:
    case MessageKind::CraqCommit:
      return c.write_cost;
    case MessageKind::CommitAck:
      return 0;  // rides on the next prepare-ok
    default:
      return c.control_cost;
  }
}

void Replica::on_message(const Message& msg) {
  SimTime c = cost(msg);
  if (c == 0) {
    process(msg);
    return;
  }
  auto& net = group_.net();
  SimTime start = std::max(net.now(), busy_until_);
  busy_until_ = start + c;
  busy_total_ += c;
  std::uint64_t epoch = epoch_;
  net.at(busy_until_, [this, msg, epoch] {
    if (epoch == epoch_ && !group_.net().crashed(node())) process(msg);
  });
}

void Replica::process(const Message& msg) {
  if (msg.kind == MessageKind::LeaseRevoke) {
    handle_lease_revoke(msg);
  } else if (msg.kind == MessageKind::Read && msg.single_replica) {
    handle_fast_read(msg);
  } else {
    handle(msg);
  }
}

void Replica::arm_timer(std::uint64_t kind, SimTime delay) {
  group_.net().set_timer(node(), delay, (epoch_ << 4) | kind);
}

void Replica::start() {
  const auto& c = group_.config();
  lease_.tick(group_.net().now(), c.lease_duration);
  arm_timer(kTickTimer, c.ack_interval);
  arm_timer(kLeaseTimer, c.lease_duration / 2);
}

void Replica::on_timer(std::uint64_t tag) {
  if ((tag >> 4) != epoch_) return;
  const auto& c = group_.config();
  switch (tag & 0xF) {
    case kTickTimer:
      on_tick();
      arm_timer(kTickTimer, c.ack_interval);
      break;
    case kLeaseTimer:
      lease_.tick(group_.net().now(), c.lease_duration);
      arm_timer(kLeaseTimer, c.lease_duration / 2);
      break;
    default:
      break;
  }
}

void Replica::reset_volatile() {
  ++epoch_;
  busy_until_ = group_.net().now();
}

void Replica::catch_up_from(const Replica& donor) {
  store_ = donor.store_;
  lease_ = donor.lease_;
  catch_up(donor);
}

void Replica::handle_lease_revoke(const Message& msg) {
  const auto& c = group_.config();
  bool fresh = lease_.refuse_below(msg.switch_id, group_.net().now(), c.lease_duration);
  if (!fresh && msg.switch_id != lease_.current_switch_id) return;
  Message grant;
  grant.kind = MessageKind::LeaseGrant;
  grant.switch_id = msg.switch_id;
  grant.lease_expiry = lease_.expiry;
  send(std::move(grant), msg.src);
}

void Replica::handle_fast_read(const Message& read) {
  const auto& c = group_.config();
  bool allowed = !c.lease_check || lease_.permits(read.switch_id, group_.net().now());
  if (allowed && gate_allows(read)) {
    serve_read(read);
    return;
  }
  ++gate_rejects_;
  group_.observer().on_gate_reject(index_, read);
  forward_normal(read);
}

void Replica::forward_normal(const Message& read) {
  Message m = read;
  m.single_replica = false;
  NodeId to = normal_read_node();
  if (to == node()) {
    handle(m);
  } else {
    send(std::move(m), to);
  }
}

void Replica::serve_read(const Message& read) {
  auto local = store_.read_local(read.object);
  ++reads_served_;
  group_.observer().on_read_served(index_, read, local.version);
  Message r;
  r.kind = MessageKind::ReadReply;
  r.object = read.object;
  r.version = local.version;
  if (local.value) r.payload = *local.value;
  r.client = read.client;
  r.request_id = read.request_id;
  r.issued_at = read.issued_at;
  r.switch_id = read.switch_id;
  r.single_replica = read.single_replica;
  r.ghost_last_response = read.ghost_last_response;
  send_to_switch(std::move(r), read.switch_id);
}

void Replica::send(Message m, NodeId to) {
  auto& counters = group_.counters();
  ++counters.sent[static_cast<std::size_t>(m.kind)];
  if (m.kind == MessageKind::WriteReply && m.carries_completion) {
    ++counters.sent[static_cast<std::size_t>(MessageKind::WriteCompletion)];
    ++counters.piggybacked;
  }
  if (m.kind == MessageKind::CommitAck) ++counters.piggybacked;
  group_.net().send(std::move(m), node(), to);
}

void Replica::send_to_switch(Message m, std::uint64_t switch_id) {
  if (switch_id == 0 || switch_id > kMaxSwitchId) return;
  send(std::move(m), switch_node(switch_id));
}

Message Replica::entry_message(MessageKind kind, const Entry& e, std::uint64_t index) const {
  Message m;
  m.kind = kind;
  m.object = e.w.object;
  m.seq = e.w.seq;
  m.payload = e.w.value;
  m.client = e.client;
  m.request_id = e.request_id;
  m.index = index;
  return m;
}

Replica::Entry Replica::entry_from(const Message& m) const {
  return Entry{WriteRecord{m.seq, m.object, m.payload}, m.client, m.request_id};
}

void Replica::reply_write(const Entry& e, bool completion) {
  Message m;
  m.kind = MessageKind::WriteReply;
  m.object = e.w.object;
  m.seq = e.w.seq;
  m.client = e.client;
  m.request_id = e.request_id;
  m.carries_completion = completion && group_.config().harmonia;
  if (m.carries_completion) group_.observer().on_completion(index_, e.w.seq);
  send_to_switch(std::move(m), e.w.seq.switch_id);
}

void Replica::send_completion(const Entry& e) {
  if (!group_.config().harmonia) return;
  group_.observer().on_completion(index_, e.w.seq);
  Message m;
  m.kind = MessageKind::WriteCompletion;
  m.object = e.w.object;
  m.seq = e.w.seq;
  send_to_switch(std::move(m), e.w.seq.switch_id);
}

// ---------------------------------------------------------------------------

ReplicaGroup::ReplicaGroup(net::Network& net, ProtocolConfig config, Observer* observer)
    : net_(net), config_(std::move(config)), observer_(observer ? observer : &null_observer_) {
  config_.validate();
  for (std::size_t i = 0; i < config_.replicas; ++i) {
    switch (config_.protocol) {
      case Protocol::PrimaryBackup:
        replicas_.push_back(detail::make_primary_backup(*this, i));
        break;
      case Protocol::Chain:
        replicas_.push_back(detail::make_chain(*this, i));
        break;
      case Protocol::Craq:
        replicas_.push_back(detail::make_craq(*this, i));
        break;
      case Protocol::Viewstamped:
        replicas_.push_back(detail::make_viewstamped(*this, i));
        break;
    }
    net_.add_node(replica_node(i), replicas_.back().get());
    live_.push_back(true);
    chain_.push_back(i);
  }
}

ReplicaGroup::~ReplicaGroup() = default;

void ReplicaGroup::start() {
  for (auto& r : replicas_) r->start();
}

std::vector<std::size_t> ReplicaGroup::live_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < live_.size(); ++i) {
    if (live_[i]) out.push_back(i);
  }
  return out;
}

std::vector<NodeId> ReplicaGroup::live_nodes() const {
  std::vector<NodeId> out;
  for (std::size_t i : live_indices()) out.push_back(replica_node(i));
  return out;
}

NodeId ReplicaGroup::normal_write_target() const { return replica_node(live_head()); }

NodeId ReplicaGroup::normal_read_target(std::mt19937_64& rng) const {
  switch (config_.protocol) {
    case Protocol::Chain:
      return replica_node(live_tail());
    case Protocol::Craq: {
      auto live = live_indices();
      std::uniform_int_distribution<std::size_t> pick(0, live.size() - 1);
      return replica_node(live[pick(rng)]);
    }
    case Protocol::PrimaryBackup:
    case Protocol::Viewstamped:
      return replica_node(0);
  }
  return replica_node(0);
}

std::optional<std::size_t> ReplicaGroup::live_successor(std::size_t i) const {
  auto it = std::find(chain_.begin(), chain_.end(), i);
  if (it == chain_.end() || std::next(it) == chain_.end()) return std::nullopt;
  return *std::next(it);
}

std::optional<std::size_t> ReplicaGroup::live_predecessor(std::size_t i) const {
  auto it = std::find(chain_.begin(), chain_.end(), i);
  if (it == chain_.end() || it == chain_.begin()) return std::nullopt;
  return *std::prev(it);
}

bool ReplicaGroup::can_crash(std::size_t i) const {
  if (i >= size() || !live_[i]) return false;
  if (config_.protocol == Protocol::Craq) return false;
  // The primary / head / leader is the fixed entry point of the protocol.
  if (i == 0) return false;
  return live_indices().size() > 1;
}

bool ReplicaGroup::can_recover(std::size_t i) const {
  return i < size() && !live_[i] && config_.protocol != Protocol::Craq;
}

void ReplicaGroup::crash(std::size_t i) {
  if (!can_crash(i)) {
    throw std::invalid_argument("crash of replica " + std::to_string(i) + " is not supported for " +
                                std::string(to_string(config_.protocol)));
  }
  net_.crash(replica_node(i));
  live_[i] = false;
  chain_.erase(std::find(chain_.begin(), chain_.end(), i));
  observer_->on_membership(i, false);
  for (std::size_t j : live_indices()) replicas_[j]->on_peer_crashed(i);
}

void ReplicaGroup::recover(std::size_t i) {
  if (!can_recover(i)) {
    throw std::invalid_argument("recovery of replica " + std::to_string(i) + " is not supported");
  }
  const Replica& donor =
      config_.protocol == Protocol::Chain ? *replicas_[live_tail()] : *replicas_[0];
  net_.recover(replica_node(i));
  replicas_[i]->reset_volatile();
  replicas_[i]->catch_up_from(donor);
  live_[i] = true;
  chain_.push_back(i);
  for (std::size_t j : live_indices()) {
    if (j != i) replicas_[j]->on_peer_recovered(i);
  }
  observer_->on_membership(i, true);
  replicas_[i]->start();
}

std::vector<std::vector<WriteRecord>> ReplicaGroup::logs() const {
  std::vector<std::vector<WriteRecord>> out;
  for (const auto& r : replicas_) out.push_back(r->store().log());
  return out;
}

}  // namespace harmonia::protocols
