#include "harmonia/switch/multi_stage_table.hpp"

#include <stdexcept>

namespace harmonia::switching {

std::uint32_t stage_hash(std::size_t stage, ObjectId o) {
  // murmur3 fmix32 over the id xor a per-stage odd constant.
  std::uint32_t h = o.id ^ (0x9E3779B9u * static_cast<std::uint32_t>(stage + 1));
  h ^= h >> 16;
  h *= 0x85EBCA6Bu;
  h ^= h >> 13;
  h *= 0xC2B2AE35u;
  h ^= h >> 16;
  return h;
}

MultiStageTable::MultiStageTable(std::size_t stages, std::size_t slots)
    : stages_(stages), slots_(slots), slots_data_(stages * slots) {
  if (stages == 0 || slots == 0) {
    throw std::invalid_argument("multi-stage table needs at least one stage and one slot");
  }
}

std::size_t MultiStageTable::slot_index(std::size_t stage, ObjectId o) const {
  return stage_hash(stage, o) % slots_;
}

MultiStageTable::InsertResult MultiStageTable::insert(ObjectId o, SeqNum s) {
  std::optional<std::size_t> first_empty;
  last_probes_ = 0;
  for (std::size_t st = 0; st < stages_; ++st) {
    Slot& slot = at(st, slot_index(st, o));
    ++last_probes_;
    if (slot.occupied && slot.entry.object == o) {
      // Finish the pass so every operation costs one probe per stage.
      last_probes_ = stages_;
      slot.entry.seq = s;
      return {InsertKind::Updated, st};
    }
    if (!slot.occupied && !first_empty) first_empty = st;
  }
  if (!first_empty) return {InsertKind::Full, 0};
  Slot& slot = at(*first_empty, slot_index(*first_empty, o));
  slot.occupied = true;
  slot.entry = Entry{o, s};
  ++size_;
  return {InsertKind::Inserted, *first_empty};
}

std::optional<SeqNum> MultiStageTable::search(ObjectId o) const {
  std::optional<SeqNum> found;
  last_probes_ = 0;
  for (std::size_t st = 0; st < stages_; ++st) {
    const Slot& slot = at(st, slot_index(st, o));
    ++last_probes_;
    if (slot.occupied && slot.entry.object == o) found = slot.entry.seq;
  }
  return found;
}

std::optional<std::size_t> MultiStageTable::stage_of(ObjectId o) const {
  for (std::size_t st = 0; st < stages_; ++st) {
    const Slot& slot = at(st, slot_index(st, o));
    if (slot.occupied && slot.entry.object == o) return st;
  }
  return std::nullopt;
}

bool MultiStageTable::erase(ObjectId o) {
  bool removed = false;
  last_probes_ = 0;
  for (std::size_t st = 0; st < stages_; ++st) {
    Slot& slot = at(st, slot_index(st, o));
    ++last_probes_;
    if (slot.occupied && slot.entry.object == o) {
      slot.occupied = false;
      --size_;
      removed = true;
    }
  }
  return removed;
}

std::vector<MultiStageTable::Entry> MultiStageTable::sweep_at_or_below(SeqNum bound) {
  std::vector<Entry> removed;
  if (size_ == 0) return removed;
  for (Slot& slot : slots_data_) {
    if (slot.occupied && slot.entry.seq <= bound) {
      removed.push_back(slot.entry);
      slot.occupied = false;
      --size_;
    }
  }
  return removed;
}

std::vector<MultiStageTable::Entry> MultiStageTable::entries() const {
  std::vector<Entry> out;
  out.reserve(size_);
  for (const Slot& slot : slots_data_) {
    if (slot.occupied) out.push_back(slot.entry);
  }
  return out;
}

}  // namespace harmonia::switching
