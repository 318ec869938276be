#include "harmonia/store/replica_store.hpp"

namespace harmonia::store {

ApplyResult ReplicaStore::apply_write(const WriteRecord& w) {
  if (!(w.seq > last_executed_)) return ApplyResult::RejectedOutOfOrder;
  table_[w.object] = Versioned{w.value, w.seq};
  last_executed_ = w.seq;
  log_.push_back(w);
  return ApplyResult::Applied;
}

LocalRead ReplicaStore::read_local(ObjectId o) const {
  auto it = table_.find(o);
  if (it == table_.end()) return {};
  return {it->second.value, it->second.seq};
}

}  // namespace harmonia::store
