#include <algorithm>
#include <map>

#include "impl.hpp"

namespace harmonia::protocols::detail {

namespace {

// Chain replication. Writes enter at the head and are applied in index
// order down the chain; the tail answers the client. Each node acknowledges
// its predecessor cumulatively in the background so lost forwards can be
// resent.
class ChainReplica : public Replica {
 public:
  ChainReplica(ReplicaGroup& g, std::size_t index) : Replica(g, index) {
    if (index + 1 < g.config().replicas) known_succ_ = index + 1;
  }

 protected:
  bool is_head() const { return group_.live_head() == index_; }
  bool is_tail() const { return group_.live_tail() == index_; }

  NodeId normal_read_node() const override { return replica_node(group_.live_tail()); }

  bool gate_allows(const Message& read) const override {
    if (!group_.config().read_ahead_gate) return true;
    return gate_read_ahead(read.last_committed, store_.read_local(read.object).version) ==
           GateDecision::ServeLocal;
  }

  void handle(const Message& msg) override {
    switch (msg.kind) {
      case MessageKind::Write: {
        if (!is_head()) return;
        Entry e = entry_from(msg);
        if (store_.apply_write(e.w) != store::ApplyResult::Applied) return;
        log_.push_back(std::move(e));
        group_.observer().on_decided(log_.back().w);
        group_.observer().on_applied(index_, log_.size());
        after_append(log_.size());
        break;
      }
      case MessageKind::ChainForward: {
        if (msg.index <= log_.size()) {
          // Duplicate or retransmission: tell the sender where we are.
          send_ack();
          break;
        }
        buffer_.emplace(msg.index, entry_from(msg));
        while (!buffer_.empty() && buffer_.begin()->first <= log_.size() + 1) {
          auto node = buffer_.extract(buffer_.begin());
          if (node.key() != log_.size() + 1) continue;
          store_.apply_write(node.mapped().w);
          log_.push_back(std::move(node.mapped()));
          group_.observer().on_applied(index_, log_.size());
          after_append(log_.size());
        }
        break;
      }
      case MessageKind::ChainAck: {
        auto succ = group_.live_successor(index_);
        if (succ && msg.src == replica_node(*succ) && msg.index > succ_acked_) {
          succ_acked_ = std::min<std::uint64_t>(msg.index, log_.size());
          progress_ = group_.net().now();
        }
        break;
      }
      case MessageKind::Read:
        if (is_tail()) {
          serve_read(msg);
        } else {
          send(msg, normal_read_node());
        }
        break;
      default:
        break;
    }
  }

  void on_tick() override {
    if (!is_head() && log_.size() > last_ack_sent_) send_ack();
    auto succ = group_.live_successor(index_);
    if (!succ) return;
    const SimTime now = group_.net().now();
    if (succ_acked_ >= log_.size() || now - progress_ < group_.config().retransmit) return;
    std::uint64_t end = std::min<std::uint64_t>(log_.size(), succ_acked_ + kRetransmitBatch);
    for (std::uint64_t i = succ_acked_ + 1; i <= end; ++i) {
      send(entry_message(MessageKind::ChainForward, log_[i - 1], i), replica_node(*succ));
      ++group_.counters().retransmissions;
    }
    progress_ = now;
  }

  void on_peer_crashed(std::size_t peer) override {
    last_ack_sent_ = 0;
    if (known_succ_ != peer) return;
    known_succ_ = group_.live_successor(index_);
    if (known_succ_) {
      // The operator hands us the new successor's position; resend from there.
      const auto& s = static_cast<const ChainReplica&>(group_.replica(*known_succ_));
      succ_acked_ = s.log_.size();
      progress_ = group_.net().now() - group_.config().retransmit;
    } else {
      // We are the new tail. The old tail answered everything it had
      // acknowledged; answer the rest.
      for (std::uint64_t i = succ_acked_ + 1; i <= log_.size(); ++i) reply_write(log_[i - 1], true);
    }
  }

  void on_peer_recovered(std::size_t peer) override {
    if (group_.live_successor(index_) == peer) {
      known_succ_ = peer;
      succ_acked_ = log_.size();
      progress_ = group_.net().now();
    }
  }

  void catch_up(const Replica& donor) override {
    const auto& d = static_cast<const ChainReplica&>(donor);
    log_ = d.log_;
    buffer_.clear();
    succ_acked_ = 0;
    last_ack_sent_ = 0;
    known_succ_.reset();
    group_.observer().on_applied(index_, log_.size());
  }

 private:
  void after_append(std::uint64_t idx) {
    auto succ = group_.live_successor(index_);
    if (!succ) {
      reply_write(log_[idx - 1], true);
      return;
    }
    if (succ_acked_ + 1 == idx) progress_ = group_.net().now();
    send(entry_message(MessageKind::ChainForward, log_[idx - 1], idx), replica_node(*succ));
  }

  void send_ack() {
    auto pred = group_.live_predecessor(index_);
    if (!pred) return;
    Message ack;
    ack.kind = MessageKind::ChainAck;
    ack.index = log_.size();
    last_ack_sent_ = log_.size();
    send(std::move(ack), replica_node(*pred));
  }

  std::vector<Entry> log_;
  std::map<std::uint64_t, Entry> buffer_;
  std::uint64_t succ_acked_ = 0;
  SimTime progress_ = 0;
  std::uint64_t last_ack_sent_ = 0;
  std::optional<std::size_t> known_succ_;
};

}  // namespace

std::unique_ptr<Replica> make_chain(ReplicaGroup& g, std::size_t index) {
  return std::make_unique<ChainReplica>(g, index);
}

}  // namespace harmonia::protocols::detail
