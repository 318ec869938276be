#pragma once

#include <optional>
#include <unordered_map>
#include <vector>

#include "harmonia/core/types.hpp"

namespace harmonia::store {

enum class ApplyResult { Applied, RejectedOutOfOrder };

struct LocalRead {
  std::optional<Value> value;  // nullopt when the object was never written
  SeqNum version = kBottomWrite;
};

// Versioned key-value state of one replica. Writes are accepted only in
// strictly increasing sequence-number order.
class ReplicaStore {
 public:
  ApplyResult apply_write(const WriteRecord& w);
  LocalRead read_local(ObjectId o) const;

  SeqNum last_executed() const { return last_executed_; }
  const std::vector<WriteRecord>& log() const { return log_; }
  std::size_t object_count() const { return table_.size(); }

 private:
  struct Versioned {
    Value value;
    SeqNum seq;
  };
  std::unordered_map<ObjectId, Versioned> table_;
  SeqNum last_executed_ = kBottomWrite;
  std::vector<WriteRecord> log_;
};

}  // namespace harmonia::store
