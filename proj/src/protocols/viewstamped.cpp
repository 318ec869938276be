#include <algorithm>
#include <functional>
#include <map>

#include "impl.hpp"

namespace harmonia::protocols::detail {

namespace {

// Viewstamped Replication with a fixed leader (replica 0). The leader
// commits at a quorum of prepare-oks and executes; followers execute when
// told of the commit and, with Harmonia on, acknowledge with a commit-ack so
// the leader knows when to tell the switch the write is complete.
class VrReplica : public Replica {
 public:
  VrReplica(ReplicaGroup& g, std::size_t index)
      : Replica(g, index),
        prepared_(g.config().replicas, 0),
        executed_by_(g.config().replicas, 0),
        prep_progress_(g.config().replicas, 0),
        commit_progress_(g.config().replicas, 0) {}

 protected:
  bool leader() const { return index_ == 0; }

  NodeId normal_read_node() const override { return replica_node(0); }

  bool gate_allows(const Message& read) const override {
    if (!group_.config().read_behind_gate) return true;
    return gate_read_behind(read.last_committed, store_.last_executed()) ==
           GateDecision::ServeLocal;
  }

  void handle(const Message& msg) override {
    if (leader()) {
      handle_leader(msg);
    } else {
      handle_follower(msg);
    }
  }

  void on_tick() override {
    if (!leader()) return;
    const SimTime now = group_.net().now();
    const SimTime rto = group_.config().retransmit;
    for (std::size_t f : group_.live_indices()) {
      if (f == 0) continue;
      if (prepared_[f] < log_.size() && now - prep_progress_[f] >= rto) {
        std::uint64_t end = std::min<std::uint64_t>(log_.size(), prepared_[f] + kRetransmitBatch);
        for (std::uint64_t i = prepared_[f] + 1; i <= end; ++i) {
          send(prepare(i), replica_node(f));
          ++group_.counters().retransmissions;
        }
        prep_progress_[f] = now;
      }
      if (group_.config().harmonia && executed_by_[f] < commit_ &&
          now - commit_progress_[f] >= rto) {
        send(commit_message(), replica_node(f));
        ++group_.counters().retransmissions;
        commit_progress_[f] = now;
      }
    }
    try_complete();
  }

  void on_peer_crashed(std::size_t) override {
    if (leader()) try_complete();
  }

  void on_peer_recovered(std::size_t peer) override {
    if (!leader()) return;
    prepared_[peer] = log_.size();
    executed_by_[peer] = commit_;
    prep_progress_[peer] = commit_progress_[peer] = group_.net().now();
  }

  void catch_up(const Replica& donor) override {
    const auto& d = static_cast<const VrReplica&>(donor);
    log_ = d.log_;
    buffer_.clear();
    commit_ = executed_ = d.commit_;
    group_.observer().on_applied(index_, executed_);
  }

 private:
  Message prepare(std::uint64_t idx) const {
    Message m = entry_message(MessageKind::Prepare, log_[idx - 1], idx);
    m.commit_index = commit_;
    return m;
  }

  Message commit_message() const {
    Message m;
    m.kind = MessageKind::Commit;
    m.commit_index = commit_;
    return m;
  }

  void handle_leader(const Message& msg) {
    switch (msg.kind) {
      case MessageKind::Write: {
        if (!log_.empty() && !(log_.back().w.seq < msg.seq)) return;
        log_.push_back(entry_from(msg));
        const std::uint64_t idx = log_.size();
        for (std::size_t f : group_.live_indices()) {
          if (f == 0) continue;
          if (prepared_[f] + 1 == idx) prep_progress_[f] = group_.net().now();
          send(prepare(idx), replica_node(f));
        }
        try_commit();
        break;
      }
      case MessageKind::PrepareOk: {
        std::size_t f = msg.src;
        if (f < prepared_.size() && msg.index > prepared_[f]) {
          prepared_[f] = std::min<std::uint64_t>(msg.index, log_.size());
          prep_progress_[f] = group_.net().now();
          try_commit();
        }
        break;
      }
      case MessageKind::CommitAck: {
        std::size_t f = msg.src;
        if (f < executed_by_.size() && msg.index > executed_by_[f]) {
          executed_by_[f] = std::min(msg.index, commit_);
          commit_progress_[f] = group_.net().now();
          try_complete();
        }
        break;
      }
      case MessageKind::Read:
        serve_read(msg);
        break;
      default:
        break;
    }
  }

  void try_commit() {
    std::vector<std::uint64_t> have;
    have.push_back(log_.size());
    for (std::size_t f = 1; f < prepared_.size(); ++f) have.push_back(prepared_[f]);
    const std::size_t q = group_.config().quorum();
    std::nth_element(have.begin(), have.begin() + (q - 1), have.end(), std::greater<>());
    const std::uint64_t target = have[q - 1];
    if (target <= commit_) return;
    while (commit_ < target) {
      ++commit_;
      const Entry& e = log_[commit_ - 1];
      store_.apply_write(e.w);
      commit_time_.push_back(group_.net().now());
      group_.observer().on_decided(e.w);
      group_.observer().on_applied(index_, commit_);
      reply_write(e, false);
    }
    for (std::size_t f : group_.live_indices()) {
      if (f == 0) continue;
      commit_progress_[f] = group_.net().now();
      send(commit_message(), replica_node(f));
    }
    try_complete();
  }

  // Emits write completions in log order once the policy is satisfied.
  void try_complete() {
    if (!group_.config().harmonia) return;
    const auto& cfg = group_.config();
    const SimTime now = group_.net().now();
    while (completed_ < commit_) {
      const std::uint64_t i = completed_ + 1;
      std::size_t executed = 1;  // the leader executed at commit
      bool all_live = true;
      for (std::size_t f = 1; f < executed_by_.size(); ++f) {
        bool done = executed_by_[f] >= i;
        if (done) ++executed;
        if (group_.live(f) && !done) all_live = false;
      }
      bool quorum = executed >= cfg.quorum();
      bool ok = false;
      switch (cfg.completion.kind) {
        case CompletionDelay::Quorum:
          ok = quorum;
          break;
        case CompletionDelay::All:
          ok = quorum && all_live;
          break;
        case CompletionDelay::Timeout:
          ok = quorum && (all_live || now >= commit_time_[i - 1] + cfg.completion.timeout);
          break;
      }
      if (!ok) break;
      completed_ = i;
      send_completion(log_[i - 1]);
    }
  }

  void handle_follower(const Message& msg) {
    switch (msg.kind) {
      case MessageKind::Prepare: {
        if (msg.index > log_.size()) buffer_.emplace(msg.index, entry_from(msg));
        while (!buffer_.empty() && buffer_.begin()->first <= log_.size() + 1) {
          auto node = buffer_.extract(buffer_.begin());
          if (node.key() != log_.size() + 1) continue;
          log_.push_back(std::move(node.mapped()));
        }
        Message ok;
        ok.kind = MessageKind::PrepareOk;
        ok.index = log_.size();
        send(std::move(ok), replica_node(0));
        learn_commit(msg.commit_index);
        break;
      }
      case MessageKind::Commit: {
        learn_commit(msg.commit_index);
        if (group_.config().harmonia) {
          Message ack;
          ack.kind = MessageKind::CommitAck;
          ack.index = executed_;
          send(std::move(ack), replica_node(0));
        }
        break;
      }
      case MessageKind::Read:
        send(msg, replica_node(0));
        break;
      default:
        break;
    }
  }

  void learn_commit(std::uint64_t c) {
    commit_ = std::max(commit_, c);
    while (executed_ < std::min<std::uint64_t>(commit_, log_.size())) {
      ++executed_;
      store_.apply_write(log_[executed_ - 1].w);
      group_.observer().on_applied(index_, executed_);
    }
  }

  std::vector<Entry> log_;
  std::map<std::uint64_t, Entry> buffer_;
  std::uint64_t commit_ = 0;
  std::uint64_t executed_ = 0;  // follower
  // Leader bookkeeping.
  std::vector<std::uint64_t> prepared_;
  std::vector<std::uint64_t> executed_by_;
  std::vector<SimTime> prep_progress_;
  std::vector<SimTime> commit_progress_;
  std::vector<SimTime> commit_time_;
  std::uint64_t completed_ = 0;
};

}  // namespace

std::unique_ptr<Replica> make_viewstamped(ReplicaGroup& g, std::size_t index) {
  return std::make_unique<VrReplica>(g, index);
}

}  // namespace harmonia::protocols::detail
