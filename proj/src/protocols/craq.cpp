#include <algorithm>
#include <map>
#include <unordered_map>

#include "impl.hpp"

namespace harmonia::protocols::detail {

namespace {

// CRAQ baseline: a write first marks the object dirty on its way down the
// chain and is committed on the way back up. Any replica answers reads for
// clean objects; reads of dirty objects go to the tail.
class CraqReplica : public Replica {
 public:
  using Replica::Replica;

 protected:
  bool is_tail() const { return group_.live_tail() == index_; }

  NodeId normal_read_node() const override { return replica_node(group_.live_tail()); }
  bool gate_allows(const Message&) const override { return false; }

  void handle(const Message& msg) override {
    switch (msg.kind) {
      case MessageKind::Write: {
        if (group_.live_head() != index_) return;
        Entry e = entry_from(msg);
        if (store_.apply_write(e.w) != store::ApplyResult::Applied) return;
        log_.push_back(std::move(e));
        group_.observer().on_decided(log_.back().w);
        group_.observer().on_applied(index_, log_.size());
        after_append(log_.size());
        break;
      }
      case MessageKind::CraqDirtyMark: {
        if (msg.index <= log_.size()) {
          send_commit(committed_);
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
      case MessageKind::CraqCommit: {
        succ_committed_ = std::max(succ_committed_, std::min<std::uint64_t>(msg.index, log_.size()));
        progress_ = group_.net().now();
        if (succ_committed_ > committed_) {
          committed_ = succ_committed_;
          send_commit(committed_);
        }
        break;
      }
      case MessageKind::Read: {
        auto it = latest_index_.find(msg.object);
        bool dirty = it != latest_index_.end() && it->second > committed_;
        if (!dirty || is_tail()) {
          serve_read(msg);
        } else {
          send(msg, normal_read_node());
        }
        break;
      }
      default:
        break;
    }
  }

  void on_tick() override {
    auto succ = group_.live_successor(index_);
    if (!succ) return;
    const SimTime now = group_.net().now();
    if (succ_committed_ >= log_.size() || now - progress_ < group_.config().retransmit) return;
    std::uint64_t end = std::min<std::uint64_t>(log_.size(), succ_committed_ + kRetransmitBatch);
    for (std::uint64_t i = succ_committed_ + 1; i <= end; ++i) {
      send(entry_message(MessageKind::CraqDirtyMark, log_[i - 1], i), replica_node(*succ));
      ++group_.counters().retransmissions;
    }
    progress_ = now;
  }

  void catch_up(const Replica&) override {}

 private:
  void after_append(std::uint64_t idx) {
    latest_index_[log_[idx - 1].w.object] = idx;
    auto succ = group_.live_successor(index_);
    if (!succ) {
      committed_ = idx;
      reply_write(log_[idx - 1], false);
      send_commit(committed_);
      return;
    }
    if (succ_committed_ + 1 == idx) progress_ = group_.net().now();
    send(entry_message(MessageKind::CraqDirtyMark, log_[idx - 1], idx), replica_node(*succ));
  }

  void send_commit(std::uint64_t upto) {
    auto pred = group_.live_predecessor(index_);
    if (!pred) return;
    Message m;
    m.kind = MessageKind::CraqCommit;
    m.index = upto;
    send(std::move(m), replica_node(*pred));
  }

  std::vector<Entry> log_;
  std::map<std::uint64_t, Entry> buffer_;
  std::unordered_map<ObjectId, std::uint64_t> latest_index_;
  std::uint64_t committed_ = 0;
  std::uint64_t succ_committed_ = 0;
  SimTime progress_ = 0;
};

}  // namespace

std::unique_ptr<Replica> make_craq(ReplicaGroup& g, std::size_t index) {
  return std::make_unique<CraqReplica>(g, index);
}

}  // namespace harmonia::protocols::detail
