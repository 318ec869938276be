#include "harmonia/switch/capacity.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace harmonia::switching {

namespace {

using u128 = unsigned __int128;

constexpr std::uint64_t kScale = 1'000'000'000;  // nine decimal places

std::uint64_t to_fixed(double v) {
  return static_cast<std::uint64_t>(std::llround(v * static_cast<double>(kScale)));
}

u128 gcd128(u128 a, u128 b) {
  while (b != 0) {
    u128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

// num/den rounded once to the nearest double.
double ratio(u128 num, u128 den) {
  u128 g = gcd128(num, den);
  num /= g;
  den /= g;
  if (den == 1) return static_cast<double>(num);
  return static_cast<double>(static_cast<long double>(num) / static_cast<long double>(den));
}

}  // namespace

CapacityReport capacity(const CapacityInput& in) {
  if (in.stages == 0 || in.slots == 0) {
    throw std::invalid_argument("stages and slots must be positive");
  }
  if (!(in.utilization > 0 && in.utilization <= 1)) {
    throw std::invalid_argument("utilization must be in (0, 1]");
  }
  if (!(in.write_ratio > 0 && in.write_ratio <= 1)) {
    throw std::invalid_argument("write ratio must be in (0, 1]");
  }
  if (!(in.write_seconds > 0) || !std::isfinite(in.write_seconds)) {
    throw std::invalid_argument("write duration must be positive");
  }
  if (in.id_bits == 0 || in.seq_bits == 0) {
    throw std::invalid_argument("field widths must be positive");
  }

  const u128 u = to_fixed(in.utilization);
  const u128 w = to_fixed(in.write_ratio);
  const u128 t = to_fixed(in.write_seconds);
  if (t == 0) throw std::invalid_argument("write duration below resolution");
  const u128 nm = static_cast<u128>(in.stages) * in.slots;

  CapacityReport out;
  out.concurrent_writes = ratio(u * nm, kScale);
  out.writes_per_sec = ratio(u * nm, t);
  out.total_per_sec = ratio(u * nm * kScale, t * w);
  out.memory_bytes = ratio(nm * (in.id_bits + in.seq_bits), 8);
  return out;
}

}  // namespace harmonia::switching
