#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

#include "harmonia/core/types.hpp"

namespace harmonia::checker {

enum class Mode { ReadAhead, ReadBehind };

// Omniscient view of the replication protocol fed by instrumentation hooks:
// the decided write order plus how far each replica has applied it.
class Oracle {
 public:
  Oracle(Mode mode, std::size_t replicas);

  // Decided writes must arrive in strictly increasing seq order; anything
  // else is a harness bug and throws std::logic_error.
  void record_decided(const WriteRecord& w);
  // `index` is a 1-based position in the shared log. Must not decrease and
  // must not run past the shared log.
  void record_applied(std::size_t replica, std::uint64_t index);
  void set_member(std::size_t replica, bool member);

  // Length of the committed prefix: the whole shared log in read-behind
  // mode, the prefix applied by every member in read-ahead mode.
  std::uint64_t committed_length() const;
  bool is_committed(SeqNum s) const;

  std::optional<std::uint64_t> index_of(SeqNum s) const;
  SeqNum max_committed_for(ObjectId o) const;
  SeqNum latest_decided_for(ObjectId o) const;

  Mode mode() const { return mode_; }
  std::size_t replicas() const { return applied_.size(); }
  std::uint64_t applied(std::size_t replica) const { return applied_.at(replica); }
  bool member(std::size_t replica) const { return member_.at(replica); }
  std::size_t member_count() const;
  const std::vector<WriteRecord>& shared_log() const { return log_; }

 private:
  Mode mode_;
  std::vector<WriteRecord> log_;
  std::unordered_map<SeqNum, std::uint64_t> index_;
  // Per object, the 1-based log indices of its writes in order.
  std::unordered_map<ObjectId, std::vector<std::uint64_t>> per_object_;
  std::vector<std::uint64_t> applied_;
  std::vector<bool> member_;
};

}  // namespace harmonia::checker
