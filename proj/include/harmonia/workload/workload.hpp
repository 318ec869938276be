#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "harmonia/core/types.hpp"

namespace harmonia::workload {

enum class Distribution { Uniform, Zipf };
enum class LoopMode { Closed, Open };

struct WorkloadConfig {
  std::uint32_t num_keys = 10'000;
  Distribution distribution = Distribution::Uniform;
  double theta = 0.0;  // zipf exponent
  double write_ratio = 0.05;
  std::uint32_t clients = 16;
  LoopMode mode = LoopMode::Closed;
  double open_rate = 0;  // ops/s per client in open-loop mode

  // Throws std::invalid_argument when a field is out of range.
  void validate() const;
};

enum class OpKind { Read, Write };

struct Op {
  OpKind kind = OpKind::Read;
  ObjectId key;
};

// Key sampler. Zipf draws use an exact cumulative table: key i (0-based)
// has weight 1/(i+1)^theta, so key 0 is the hottest.
class KeySampler {
 public:
  KeySampler(std::uint32_t num_keys, Distribution dist, double theta);

  ObjectId sample(std::mt19937_64& rng) const;

  // Probability of drawing key `index`.
  double probability(std::uint32_t index) const;
  std::uint32_t num_keys() const { return num_keys_; }

 private:
  std::uint32_t num_keys_;
  Distribution dist_;
  std::vector<double> cdf_;  // empty for uniform
};

class Generator {
 public:
  Generator(const WorkloadConfig& cfg, std::uint64_t seed);

  Op next_op();
  std::mt19937_64& rng() { return rng_; }

 private:
  KeySampler sampler_;
  double write_ratio_;
  std::mt19937_64 rng_;
};

// Independent per-client seed derived from the run seed.
std::uint64_t client_seed(std::uint64_t master, std::uint64_t client_index);

}  // namespace harmonia::workload
