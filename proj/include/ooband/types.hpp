#pragma once
// Shared domain types: bandit instances, offline datasets, allocations and
// their normalized (z, w) form, solver configuration, and the optimality
// report produced when checking allocations against the first-order
// conditions.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "ooband/spef.hpp"

namespace ooband {

// A K-armed instance of a single SPEF family, identified by its mean vector.
// The maximal mean must be unique; ties are rejected at construction.
class BanditInstance {
 public:
  BanditInstance(DistributionFamily family, std::vector<double> means)
      : family_(family), means_(std::move(means)) {
    if (means_.size() < 2) {
      throw std::invalid_argument(
          "ooband::BanditInstance: need at least two arms");
    }
    for (double m : means_) family_.require_admissible(m, "BanditInstance");
    best_ = 0;
    for (int a = 1; a < K(); ++a) {
      if (means_[a] > means_[best_]) best_ = a;
    }
    for (int a = 0; a < K(); ++a) {
      if (a != best_ && means_[a] == means_[best_]) {
        throw std::invalid_argument(
            "ooband::BanditInstance: maximal mean must be unique (arms " +
            std::to_string(best_) + " and " + std::to_string(a) + " tie)");
      }
    }
  }

  const DistributionFamily& family() const { return family_; }
  const std::vector<double>& means() const { return means_; }
  double mean(int a) const { return means_.at(a); }
  int K() const { return static_cast<int>(means_.size()); }
  int best_arm() const { return best_; }
  double gap(int a) const { return means_[best_] - means_[a]; }

 private:
  DistributionFamily family_;
  std::vector<double> means_;
  int best_;
};

// Historical samples collected before the online phase: per-arm counts and
// reward sums. tau1 is the total number of offline samples.
struct OfflineDataset {
  std::vector<long long> counts;
  std::vector<double> reward_sums;

  static OfflineDataset empty(int K) {
    OfflineDataset d;
    d.counts.assign(K, 0);
    d.reward_sums.assign(K, 0.0);
    return d;
  }

  int K() const { return static_cast<int>(counts.size()); }

  long long tau1() const {
    long long total = 0;
    for (long long c : counts) total += c;
    return total;
  }

  double mean(int a) const {
    if (counts.at(a) <= 0) {
      throw std::logic_error(
          "ooband::OfflineDataset: empirical mean undefined for arm with no "
          "samples");
    }
    return reward_sums[a] / static_cast<double>(counts[a]);
  }

  // Offline sampling proportions p-hat = counts / tau1 (uniform when empty).
  std::vector<double> proportions() const {
    const double total = static_cast<double>(tau1());
    std::vector<double> p(counts.size());
    for (size_t a = 0; a < counts.size(); ++a) {
      p[a] = total > 0 ? static_cast<double>(counts[a]) / total
                       : 1.0 / static_cast<double>(counts.size());
    }
    return p;
  }

  void validate(int K) const {
    if (static_cast<int>(counts.size()) != K ||
        static_cast<int>(reward_sums.size()) != K) {
      throw std::invalid_argument(
          "ooband::OfflineDataset: counts/reward_sums length mismatch");
    }
    for (long long c : counts) {
      if (c < 0) {
        throw std::invalid_argument(
            "ooband::OfflineDataset: negative offline count");
      }
    }
  }
};

// Nonnegative per-arm online sample budget (continuous; rounding happens
// only inside the sampler via tracking).
struct AllocationVector {
  std::vector<double> n;

  double total() const {
    double s = 0.0;
    for (double v : n) s += v;
    return s;
  }
};

// Problem-P3 coordinates: z is the offline fraction tau1/(tau1 + total
// online), w the online sampling proportions on the simplex.
struct NormalizedSolution {
  double z = 0.0;
  std::vector<double> w;
};

// Knobs for the allocation solvers. `threshold` is the right-hand side of
// the index constraints: log(1/delta)+loglog(1/delta) for the plug-in
// problem, log(1/(2.4 delta)) for the lower-bound problem.
struct SolverConfig {
  double epsilon = 1e-6;
  double threshold = 0.0;
  int max_doublings = 200;

  // threshold = 0 is accepted as a degenerate value for the single-arm
  // operations (the index crossing collapses to pooled count zero); the full
  // solvers additionally require a positive threshold.
  void validate() const {
    if (!(epsilon > 0.0)) {
      throw std::invalid_argument("ooband::SolverConfig: epsilon must be > 0");
    }
    if (!(threshold >= 0.0)) {
      throw std::invalid_argument(
          "ooband::SolverConfig: threshold must be >= 0");
    }
  }
};

// First-order-condition residuals of an allocation: which constraints are
// active/tight and how far the KL ratio sums stray from the optimality
// conditions. All violations are dimensionless.
struct OptimalityReport {
  std::vector<int> active_set_A1;     // arms with positive online allocation
  std::vector<int> tight_zero_set_A2; // zero-allocation arms whose constraint
                                      // is nevertheless tight
  double ratio_sum_A1 = 0.0;
  double ratio_sum_A = 0.0;
  double max_constraint_violation = 0.0;
};

}  // namespace ooband
