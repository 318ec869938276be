#include "harmonia/workload/workload.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace harmonia::workload {

void WorkloadConfig::validate() const {
  if (num_keys == 0) throw std::invalid_argument("num-keys must be >= 1");
  if (!(theta >= 0)) throw std::invalid_argument("zipf theta must be >= 0");
  if (!(write_ratio >= 0 && write_ratio <= 1)) {
    throw std::invalid_argument("write-ratio must be in [0, 1]");
  }
  if (mode == LoopMode::Open && !(open_rate > 0)) {
    throw std::invalid_argument("open-loop mode needs a positive rate");
  }
}

KeySampler::KeySampler(std::uint32_t num_keys, Distribution dist, double theta)
    : num_keys_(num_keys), dist_(dist) {
  if (num_keys == 0) throw std::invalid_argument("num_keys must be >= 1");
  if (!(theta >= 0)) throw std::invalid_argument("theta must be >= 0");
  if (dist_ == Distribution::Zipf) {
    cdf_.resize(num_keys);
    double sum = 0;
    for (std::uint32_t i = 0; i < num_keys; ++i) {
      sum += std::pow(static_cast<double>(i) + 1.0, -theta);
      cdf_[i] = sum;
    }
    for (double& c : cdf_) c /= sum;
    cdf_.back() = 1.0;
  }
}

ObjectId KeySampler::sample(std::mt19937_64& rng) const {
  if (dist_ == Distribution::Uniform) {
    return ObjectId{std::uniform_int_distribution<std::uint32_t>(0, num_keys_ - 1)(rng)};
  }
  double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  if (it == cdf_.end()) --it;
  return ObjectId{static_cast<std::uint32_t>(it - cdf_.begin())};
}

double KeySampler::probability(std::uint32_t index) const {
  if (index >= num_keys_) return 0;
  if (dist_ == Distribution::Uniform) return 1.0 / num_keys_;
  return index == 0 ? cdf_[0] : cdf_[index] - cdf_[index - 1];
}

Generator::Generator(const WorkloadConfig& cfg, std::uint64_t seed)
    : sampler_(cfg.num_keys, cfg.distribution, cfg.theta), write_ratio_(cfg.write_ratio), rng_(seed) {}

Op Generator::next_op() {
  Op op;
  double coin = std::uniform_real_distribution<double>(0.0, 1.0)(rng_);
  op.kind = coin < write_ratio_ ? OpKind::Write : OpKind::Read;
  op.key = sampler_.sample(rng_);
  return op;
}

std::uint64_t client_seed(std::uint64_t master, std::uint64_t client_index) {
  // splitmix64 over (master, index)
  std::uint64_t z = master + 0x9E3779B97F4A7C15ull * (client_index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace harmonia::workload
