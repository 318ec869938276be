#pragma once

#include <cstdint>

namespace harmonia::switching {

struct CapacityInput {
  std::uint64_t stages = 0;       // n
  std::uint64_t slots = 0;        // m, per stage
  double utilization = 0;         // u in (0, 1]
  double write_seconds = 0;       // t, duration of one write
  double write_ratio = 0;         // w in (0, 1]
  std::uint32_t id_bits = 32;
  std::uint32_t seq_bits = 32;
};

struct CapacityReport {
  double concurrent_writes = 0;   // u*n*m
  double writes_per_sec = 0;      // u*n*m / t
  double total_per_sec = 0;       // u*n*m / (w*t)
  double memory_bytes = 0;        // n*m*(id_bits+seq_bits)/8
};

// How many in-flight writes (and hence how much total load) a dirty-set
// table of the given geometry sustains before it runs out of slots.
// Fractional inputs are taken to nine decimal places and the arithmetic is
// carried out on exact rationals, so decimal inputs give exact outputs.
// Throws std::invalid_argument on domain violations.
CapacityReport capacity(const CapacityInput& in);

}  // namespace harmonia::switching
