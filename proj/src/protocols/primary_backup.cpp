#include <algorithm>
#include <map>
#include <unordered_map>

#include "impl.hpp"

namespace harmonia::protocols::detail {

namespace {

// Replica 0 is the primary: it executes writes, pushes state updates to the
// backups and answers once every live backup has acknowledged.
class PrimaryBackupReplica : public Replica {
 public:
  PrimaryBackupReplica(ReplicaGroup& g, std::size_t index)
      : Replica(g, index), acked_(g.config().replicas, 0), progress_(g.config().replicas, 0) {}

 protected:
  bool primary() const { return index_ == 0; }

  NodeId normal_read_node() const override { return replica_node(0); }

  bool gate_allows(const Message& read) const override {
    if (!group_.config().read_ahead_gate) return true;
    return gate_read_ahead(read.last_committed, store_.read_local(read.object).version) ==
           GateDecision::ServeLocal;
  }

  void handle(const Message& msg) override {
    if (primary()) {
      handle_primary(msg);
    } else {
      handle_backup(msg);
    }
  }

  void on_tick() override {
    if (!primary()) return;
    const SimTime now = group_.net().now();
    const SimTime rto = group_.config().retransmit;
    for (std::size_t b : group_.live_indices()) {
      if (b == 0 || acked_[b] >= log_.size() || now - progress_[b] < rto) continue;
      std::uint64_t end = std::min<std::uint64_t>(log_.size(), acked_[b] + kRetransmitBatch);
      for (std::uint64_t i = acked_[b] + 1; i <= end; ++i) {
        send(entry_message(MessageKind::StateUpdate, log_[i - 1], i), replica_node(b));
        ++group_.counters().retransmissions;
      }
      progress_[b] = now;
    }
  }

  void on_peer_crashed(std::size_t) override {
    if (primary()) try_commit();
  }

  void on_peer_recovered(std::size_t peer) override {
    if (!primary()) return;
    acked_[peer] = log_.size();
    progress_[peer] = group_.net().now();
  }

  void catch_up(const Replica& donor) override {
    const auto& d = static_cast<const PrimaryBackupReplica&>(donor);
    log_ = d.log_;
    buffer_.clear();
    group_.observer().on_applied(index_, log_.size());
  }

 private:
  void handle_primary(const Message& msg) {
    switch (msg.kind) {
      case MessageKind::Write: {
        Entry e = entry_from(msg);
        if (store_.apply_write(e.w) != store::ApplyResult::Applied) return;
        log_.push_back(e);
        const std::uint64_t idx = log_.size();
        latest_index_[e.w.object] = idx;
        group_.observer().on_decided(e.w);
        group_.observer().on_applied(index_, idx);
        for (std::size_t b : group_.live_indices()) {
          if (b == 0) continue;
          if (acked_[b] + 1 == idx) progress_[b] = group_.net().now();
          send(entry_message(MessageKind::StateUpdate, e, idx), replica_node(b));
        }
        try_commit();
        break;
      }
      case MessageKind::StateUpdateAck: {
        std::size_t b = msg.src;
        if (b < acked_.size() && msg.index > acked_[b]) {
          acked_[b] = std::min<std::uint64_t>(msg.index, log_.size());
          progress_[b] = group_.net().now();
          try_commit();
        }
        break;
      }
      case MessageKind::Read: {
        auto it = latest_index_.find(msg.object);
        if (it != latest_index_.end() && it->second > committed_) {
          // Executed but not yet on every backup: answer after it commits.
          waiting_[msg.object].push_back(msg);
        } else {
          serve_read(msg);
        }
        break;
      }
      default:
        break;
    }
  }

  void try_commit() {
    std::uint64_t target = log_.size();
    for (std::size_t b : group_.live_indices()) {
      if (b != 0) target = std::min(target, acked_[b]);
    }
    while (committed_ < target) {
      ++committed_;
      const Entry& e = log_[committed_ - 1];
      reply_write(e, true);
      auto w = waiting_.find(e.w.object);
      if (w != waiting_.end() && latest_index_[e.w.object] <= committed_) {
        auto reads = std::move(w->second);
        waiting_.erase(w);
        for (const auto& r : reads) serve_read(r);
      }
    }
  }

  void handle_backup(const Message& msg) {
    switch (msg.kind) {
      case MessageKind::StateUpdate: {
        if (msg.index > log_.size()) buffer_.emplace(msg.index, entry_from(msg));
        while (!buffer_.empty() && buffer_.begin()->first <= log_.size() + 1) {
          auto node = buffer_.extract(buffer_.begin());
          if (node.key() != log_.size() + 1) continue;
          store_.apply_write(node.mapped().w);
          log_.push_back(std::move(node.mapped()));
          group_.observer().on_applied(index_, log_.size());
        }
        Message ack;
        ack.kind = MessageKind::StateUpdateAck;
        ack.index = log_.size();
        send(std::move(ack), replica_node(0));
        break;
      }
      case MessageKind::Read:
        send(msg, replica_node(0));
        break;
      default:
        break;
    }
  }

  std::vector<Entry> log_;
  // Primary side.
  std::uint64_t committed_ = 0;
  std::vector<std::uint64_t> acked_;
  std::vector<SimTime> progress_;
  std::unordered_map<ObjectId, std::uint64_t> latest_index_;
  std::unordered_map<ObjectId, std::vector<Message>> waiting_;
  // Backup side: updates that arrived ahead of a gap.
  std::map<std::uint64_t, Entry> buffer_;
};

}  // namespace

std::unique_ptr<Replica> make_primary_backup(ReplicaGroup& g, std::size_t index) {
  return std::make_unique<PrimaryBackupReplica>(g, index);
}

}  // namespace harmonia::protocols::detail
