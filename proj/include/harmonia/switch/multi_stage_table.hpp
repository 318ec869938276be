#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "harmonia/core/types.hpp"

namespace harmonia::switching {

// The dirty set as the data plane lays it out: `stages` register arrays of
// `slots` entries each, one hash function per stage. Every insert, search
// and delete touches exactly one slot per stage.
class MultiStageTable {
 public:
  struct Entry {
    ObjectId object;
    SeqNum seq;
  };

  enum class InsertKind { Inserted, Updated, Full };
  struct InsertResult {
    InsertKind kind;
    std::size_t stage = 0;  // meaningless when kind == Full
  };

  MultiStageTable(std::size_t stages, std::size_t slots);

  InsertResult insert(ObjectId o, SeqNum s);
  std::optional<SeqNum> search(ObjectId o) const;
  bool erase(ObjectId o);

  // Stage the object currently occupies, if any.
  std::optional<std::size_t> stage_of(ObjectId o) const;

  // Removes every entry whose sequence number is <= bound. Returns the
  // removed entries (full sweep, not a per-packet operation).
  std::vector<Entry> sweep_at_or_below(SeqNum bound);

  std::size_t stages() const { return stages_; }
  std::size_t slots_per_stage() const { return slots_; }
  std::size_t capacity() const { return stages_ * slots_; }
  std::size_t size() const { return size_; }
  bool empty() const { return size_ == 0; }

  // Slot index of `o` in stage `stage`.
  std::size_t slot_index(std::size_t stage, ObjectId o) const;

  // Slots touched by the most recent insert/search/erase.
  std::size_t last_probe_count() const { return last_probes_; }

  // Snapshot of all resident entries, in (stage, slot) order.
  std::vector<Entry> entries() const;

 private:
  struct Slot {
    bool occupied = false;
    Entry entry;
  };

  Slot& at(std::size_t stage, std::size_t index) { return slots_data_[stage * slots_ + index]; }
  const Slot& at(std::size_t stage, std::size_t index) const {
    return slots_data_[stage * slots_ + index];
  }

  std::size_t stages_;
  std::size_t slots_;
  std::vector<Slot> slots_data_;
  std::size_t size_ = 0;
  mutable std::size_t last_probes_ = 0;
};

// Per-stage hash: a 32-bit finalizer mix seeded by the stage index.
std::uint32_t stage_hash(std::size_t stage, ObjectId o);

}  // namespace harmonia::switching
