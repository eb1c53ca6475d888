#pragma once
// Deterministic seeding utilities. Every stochastic component derives its
// engine from a master seed through splitmix64-style mixing, so that runs
// are reproducible and per-arm streams are independent of how many samples
// other arms consume.

#include <cstdint>
#include <random>
#include <vector>

#include "ooband/types.hpp"

namespace ooband {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Order-sensitive combination of a seed with a stream tag; used to derive
// child seeds (per arm, per trial, per component) from a master seed.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t tag) {
  return splitmix64(seed ^ splitmix64(tag + 0x9E3779B97F4A7C15ULL));
}

// One independent reward stream per arm of a ground-truth instance. Keeping
// the streams per-arm means the n-th reward of an arm does not depend on
// how often the other arms were pulled, which makes paired comparisons
// across algorithms and offline-data sizes meaningful.
class ArmStreams {
 public:
  ArmStreams(const BanditInstance& instance, std::uint64_t seed)
      : instance_(&instance) {
    engines_.reserve(instance.K());
    for (int a = 0; a < instance.K(); ++a) {
      engines_.emplace_back(mix_seed(seed, static_cast<std::uint64_t>(a)));
    }
  }

  double draw(int a) {
    if (instance_->family().is_bernoulli()) {
      std::bernoulli_distribution d(instance_->mean(a));
      return d(engines_[a]) ? 1.0 : 0.0;
    }
    std::normal_distribution<double> d(instance_->mean(a), 1.0);
    return d(engines_[a]);
  }

 private:
  const BanditInstance* instance_;
  std::vector<std::mt19937_64> engines_;
};

}  // namespace ooband
