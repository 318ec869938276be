#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"

#include "harmonia/checker/oracle.hpp"

namespace harmonia::checker {

enum class ViolationKind {
  Visibility,             // read returned something older than it had to see
  Integrity,              // read returned a write that was not committed
  CompletionBeforeApply,  // completion emitted before the required replicas applied
  RemovalAboveCommitted,  // dirty-set entry removed above the switch's last_committed
  UncoveredFastRead,      // fast-path read for an object with an uncovered write
  UnorderedReplicaLog,    // a replica log that is not strictly increasing
};

std::string_view to_string(ViolationKind k);

struct Violation {
  ViolationKind kind;
  SimTime at = 0;
  ObjectId object;
  SeqNum returned;  // read checks: the version returned
  SeqNum ghost;     // read checks: the ghost stamp; structural: the bound
  std::string detail;
};

struct Verdict {
  bool ok = true;
  std::optional<ViolationKind> kind;
};

struct Report {
  std::uint64_t reads_checked = 0;
  std::uint64_t completions_checked = 0;
  std::uint64_t fast_reads_checked = 0;
  std::uint64_t removals_checked = 0;
  std::vector<Violation> violations;
  nlohmann::json witness;  // recent monitor events, oldest first

  bool ok() const { return violations.empty(); }
  nlohmann::json to_json() const;
};

// Online linearizability monitor. Reads are stamped at issue with a ghost
// (the newest write any later response must reach) and checked when the
// replica produces the reply.
class Monitor {
 public:
  explicit Monitor(Oracle& oracle, std::size_t witness_events = 64);

  SeqNum on_read_issued(ObjectId o, SimTime at = 0);
  Verdict on_read_response(ObjectId o, SeqNum returned, SeqNum ghost, SimTime at = 0,
                           NodeId replica = kNoNode);

  // Write completion for `s`. quorum == 0 requires every member to have
  // applied s, otherwise at least `quorum` replicas (members or not).
  void check_completion(SeqNum s, std::size_t quorum, SimTime at = 0);
  void check_removal(ObjectId o, SeqNum removed, SeqNum last_committed, SimTime at = 0);
  // A fast-path read leaving the switch that holds the lease: the object
  // must be dirty or every decided write to it covered by last_committed.
  void check_fast_read(ObjectId o, bool dirty, SeqNum last_committed, SimTime at = 0);

  // Post-run: replica logs must be strictly increasing. Returns the report.
  Report final_sweep(const std::vector<std::vector<WriteRecord>>& replica_logs = {});

  std::size_t violation_count() const { return report_.violations.size(); }
  const std::vector<Violation>& violations() const { return report_.violations; }
  const Oracle& oracle() const { return oracle_; }

 private:
  void note(nlohmann::json ev);
  void violate(Violation v);
  void check_committed_monotone(SimTime at);

  Oracle& oracle_;
  std::unordered_map<ObjectId, SeqNum> returned_max_;
  std::uint64_t last_committed_len_ = 0;
  std::size_t witness_cap_;
  std::deque<nlohmann::json> recent_;
  Report report_;
};

}  // namespace harmonia::checker
