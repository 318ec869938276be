#include "harmonia/checker/oracle.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace harmonia::checker {

Oracle::Oracle(Mode mode, std::size_t replicas)
    : mode_(mode), applied_(replicas, 0), member_(replicas, true) {
  if (replicas == 0) throw std::invalid_argument("oracle needs at least one replica");
}

void Oracle::record_decided(const WriteRecord& w) {
  if (!log_.empty() && !(log_.back().seq < w.seq)) {
    throw std::logic_error("decided writes out of order: " + to_string(w.seq) + " after " +
                           to_string(log_.back().seq));
  }
  if (w.seq.is_bottom()) throw std::logic_error("bottom write decided");
  log_.push_back(w);
  index_[w.seq] = log_.size();
  per_object_[w.object].push_back(log_.size());
}

void Oracle::record_applied(std::size_t replica, std::uint64_t index) {
  auto& a = applied_.at(replica);
  if (index < a) {
    throw std::logic_error("replica " + std::to_string(replica) + " applied index went backwards");
  }
  if (index > log_.size()) {
    throw std::logic_error("replica " + std::to_string(replica) + " applied past the shared log");
  }
  a = index;
}

void Oracle::set_member(std::size_t replica, bool member) { member_.at(replica) = member; }

std::size_t Oracle::member_count() const {
  return static_cast<std::size_t>(std::count(member_.begin(), member_.end(), true));
}

std::uint64_t Oracle::committed_length() const {
  if (mode_ == Mode::ReadBehind) return log_.size();
  std::uint64_t m = std::numeric_limits<std::uint64_t>::max();
  for (std::size_t r = 0; r < applied_.size(); ++r) {
    if (member_[r]) m = std::min(m, applied_[r]);
  }
  return m == std::numeric_limits<std::uint64_t>::max() ? 0 : m;
}

std::optional<std::uint64_t> Oracle::index_of(SeqNum s) const {
  auto it = index_.find(s);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

bool Oracle::is_committed(SeqNum s) const {
  auto idx = index_of(s);
  return idx && *idx <= committed_length();
}

SeqNum Oracle::max_committed_for(ObjectId o) const {
  auto it = per_object_.find(o);
  if (it == per_object_.end()) return kBottomWrite;
  const auto& v = it->second;
  auto pos = std::upper_bound(v.begin(), v.end(), committed_length());
  if (pos == v.begin()) return kBottomWrite;
  return log_[*std::prev(pos) - 1].seq;
}

SeqNum Oracle::latest_decided_for(ObjectId o) const {
  auto it = per_object_.find(o);
  if (it == per_object_.end() || it->second.empty()) return kBottomWrite;
  return log_[it->second.back() - 1].seq;
}

}  // namespace harmonia::checker
