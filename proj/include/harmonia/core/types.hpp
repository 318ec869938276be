#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>

namespace harmonia {

// Simulated time in integer nanoseconds.
using SimTime = std::int64_t;

constexpr SimTime kMicrosecond = 1'000;
constexpr SimTime kMillisecond = 1'000'000;
constexpr SimTime kSecond = 1'000'000'000;

// Sequence number assigned by a switch to every write. Ordered
// lexicographically with the switch ID first, so that writes stamped by a
// replacement switch always follow those of its predecessors.
struct SeqNum {
  std::uint64_t switch_id = 0;
  std::uint64_t counter = 0;

  friend constexpr auto operator<=>(const SeqNum&, const SeqNum&) = default;
  friend constexpr bool operator==(const SeqNum&, const SeqNum&) = default;

  constexpr bool is_bottom() const { return switch_id == 0 && counter == 0; }
};

// Smaller than every write sent by a real switch (real switches have id >= 1).
inline constexpr SeqNum kBottomWrite{0, 0};

enum class Ordering { Less, Equal, Greater };

constexpr Ordering seq_compare(const SeqNum& a, const SeqNum& b) {
  if (a.switch_id != b.switch_id) {
    return a.switch_id < b.switch_id ? Ordering::Less : Ordering::Greater;
  }
  if (a.counter != b.counter) {
    return a.counter < b.counter ? Ordering::Less : Ordering::Greater;
  }
  return Ordering::Equal;
}

// "sid:ctr"
std::string to_string(const SeqNum& s);
std::ostream& operator<<(std::ostream& os, const SeqNum& s);

// Parses the "sid:ctr" rendering. Throws std::invalid_argument on malformed input.
SeqNum parse_seq(std::string_view text);

// Fixed-width object identifier carried in request headers.
struct ObjectId {
  std::uint32_t id = 0;

  friend constexpr auto operator<=>(const ObjectId&, const ObjectId&) = default;
  friend constexpr bool operator==(const ObjectId&, const ObjectId&) = default;
};

// Digest of a variable-length key (32-bit FNV-1a). Collisions only make
// unrelated keys look contended. Throws std::invalid_argument on an empty key.
ObjectId hash_object_id(std::span<const std::byte> key);
ObjectId hash_object_id(std::string_view key);

using Value = std::string;

struct WriteRecord {
  SeqNum seq;
  ObjectId object;
  Value value;

  friend bool operator==(const WriteRecord&, const WriteRecord&) = default;
};

// Simulator node identifier (replicas, switches and clients share one space).
using NodeId = std::uint32_t;
inline constexpr NodeId kNoNode = 0xFFFF'FFFFu;

}  // namespace harmonia

template <>
struct std::hash<harmonia::ObjectId> {
  std::size_t operator()(const harmonia::ObjectId& o) const noexcept {
    return std::hash<std::uint32_t>{}(o.id);
  }
};

template <>
struct std::hash<harmonia::SeqNum> {
  std::size_t operator()(const harmonia::SeqNum& s) const noexcept {
    return std::hash<std::uint64_t>{}(s.switch_id * 0x9E3779B97F4A7C15ull ^ s.counter);
  }
};
