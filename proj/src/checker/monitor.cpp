#include "harmonia/checker/monitor.hpp"

#include <algorithm>

namespace harmonia::checker {

std::string_view to_string(ViolationKind k) {
  switch (k) {
    case ViolationKind::Visibility: return "visibility";
    case ViolationKind::Integrity: return "integrity";
    case ViolationKind::CompletionBeforeApply: return "completion-before-apply";
    case ViolationKind::RemovalAboveCommitted: return "removal-above-committed";
    case ViolationKind::UncoveredFastRead: return "uncovered-fast-read";
    case ViolationKind::UnorderedReplicaLog: return "unordered-replica-log";
  }
  return "?";
}

nlohmann::json Report::to_json() const {
  nlohmann::json j;
  j["ok"] = ok();
  j["reads_checked"] = reads_checked;
  j["completions_checked"] = completions_checked;
  j["fast_reads_checked"] = fast_reads_checked;
  j["removals_checked"] = removals_checked;
  j["violations"] = nlohmann::json::array();
  for (const auto& v : violations) {
    j["violations"].push_back({{"kind", std::string(to_string(v.kind))},
                               {"t", v.at},
                               {"object", v.object.id},
                               {"returned", to_string(v.returned)},
                               {"ghost", to_string(v.ghost)},
                               {"detail", v.detail}});
  }
  j["witness"] = witness;
  return j;
}

Monitor::Monitor(Oracle& oracle, std::size_t witness_events)
    : oracle_(oracle), witness_cap_(witness_events) {}

void Monitor::note(nlohmann::json ev) {
  if (witness_cap_ == 0) return;
  if (recent_.size() == witness_cap_) recent_.pop_front();
  recent_.push_back(std::move(ev));
}

void Monitor::violate(Violation v) {
  note({{"ev", "violation"}, {"kind", std::string(to_string(v.kind))}, {"t", v.at}});
  if (report_.violations.empty()) {
    // Freeze the prefix that led to the first violation.
    report_.witness = nlohmann::json::array();
    for (const auto& e : recent_) report_.witness.push_back(e);
  }
  report_.violations.push_back(std::move(v));
}

void Monitor::check_committed_monotone(SimTime at) {
  std::uint64_t len = oracle_.committed_length();
  if (len < last_committed_len_) {
    throw std::logic_error("committed log shrank at t=" + std::to_string(at));
  }
  last_committed_len_ = len;
}

SeqNum Monitor::on_read_issued(ObjectId o, SimTime at) {
  check_committed_monotone(at);
  SeqNum ghost = oracle_.max_committed_for(o);
  if (auto it = returned_max_.find(o); it != returned_max_.end()) ghost = std::max(ghost, it->second);
  if (witness_cap_) {
    note({{"ev", "issue"}, {"t", at}, {"obj", o.id}, {"ghost", to_string(ghost)}});
  }
  return ghost;
}

Verdict Monitor::on_read_response(ObjectId o, SeqNum returned, SeqNum ghost, SimTime at,
                                  NodeId replica) {
  check_committed_monotone(at);
  ++report_.reads_checked;
  if (witness_cap_) {
    note({{"ev", "response"},
          {"t", at},
          {"obj", o.id},
          {"replica", replica},
          {"returned", to_string(returned)},
          {"ghost", to_string(ghost)}});
  }
  Verdict verdict;
  if (returned < ghost) {
    verdict = {false, ViolationKind::Visibility};
    violate({ViolationKind::Visibility, at, o, returned, ghost,
             "replica " + std::to_string(replica) + " returned a version older than the ghost"});
  } else if (!returned.is_bottom() && !oracle_.is_committed(returned)) {
    verdict = {false, ViolationKind::Integrity};
    violate({ViolationKind::Integrity, at, o, returned, ghost,
             "replica " + std::to_string(replica) + " returned an uncommitted write"});
  }
  auto& m = returned_max_[o];
  m = std::max(m, returned);
  return verdict;
}

void Monitor::check_completion(SeqNum s, std::size_t quorum, SimTime at) {
  ++report_.completions_checked;
  auto idx = oracle_.index_of(s);
  bool ok = idx.has_value();
  if (ok) {
    std::size_t have = 0;
    bool all_members = true;
    for (std::size_t r = 0; r < oracle_.replicas(); ++r) {
      bool applied = oracle_.applied(r) >= *idx;
      if (applied) ++have;
      if (oracle_.member(r) && !applied) all_members = false;
    }
    ok = quorum == 0 ? all_members : have >= quorum;
  }
  if (!ok) {
    violate({ViolationKind::CompletionBeforeApply, at, ObjectId{}, s, kBottomWrite,
             "completion for " + to_string(s) + " emitted too early"});
  }
}

void Monitor::check_removal(ObjectId o, SeqNum removed, SeqNum last_committed, SimTime at) {
  ++report_.removals_checked;
  if (last_committed < removed) {
    violate({ViolationKind::RemovalAboveCommitted, at, o, removed, last_committed,
             "dirty entry removed above last_committed"});
  }
}

void Monitor::check_fast_read(ObjectId o, bool dirty, SeqNum last_committed, SimTime at) {
  ++report_.fast_reads_checked;
  if (dirty) return;
  SeqNum latest = oracle_.latest_decided_for(o);
  if (last_committed < latest) {
    violate({ViolationKind::UncoveredFastRead, at, o, latest, last_committed,
             "fast-path read for an object whose latest write is not covered"});
  }
}

Report Monitor::final_sweep(const std::vector<std::vector<WriteRecord>>& replica_logs) {
  for (std::size_t r = 0; r < replica_logs.size(); ++r) {
    const auto& log = replica_logs[r];
    for (std::size_t i = 1; i < log.size(); ++i) {
      if (!(log[i - 1].seq < log[i].seq)) {
        violate({ViolationKind::UnorderedReplicaLog, 0, log[i].object, log[i].seq, log[i - 1].seq,
                 "replica " + std::to_string(r) + " log not strictly increasing"});
        break;
      }
    }
  }
  Report out = report_;
  if (out.violations.empty()) out.witness = nlohmann::json::array();
  return out;
}

}  // namespace harmonia::checker
