#pragma once
// Batch track-and-stop sampler for best-arm identification with offline
// data. The sampler maintains target proportions w-hat from the allocation
// oracle (re-solved on the empirical means once per completed exploration
// batch), tracks them with a running-average weight vector, forces uniform
// exploration on the batch boundaries where floor(t/K) is a perfect square,
// and stops when the generalized-likelihood-ratio statistic at the pooled
// empirical means clears the threshold beta(tau1 + t, delta).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ooband/oracle.hpp"
#include "ooband/rng.hpp"
#include "ooband/spef.hpp"
#include "ooband/types.hpp"

namespace ooband {

// GLRT stopping threshold. The middle term's inner log(t/2) is clamped at 0
// so the expression is defined (and zero) for t < 2.
inline double beta_threshold(long long t_total, double delta, int K) {
  if (t_total < 1) {
    throw std::invalid_argument("ooband::beta_threshold: t_total must be >= 1");
  }
  if (!(delta > 0.0 && delta < 1.0)) {
    throw std::invalid_argument(
        "ooband::beta_threshold: delta must be in (0, 1)");
  }
  if (K < 2) {
    throw std::invalid_argument("ooband::beta_threshold: K must be >= 2");
  }
  const double head = std::log(static_cast<double>(K - 1) / delta);
  const double inner =
      std::max(0.0, std::log(static_cast<double>(t_total) / 2.0));
  return head + 6.0 * std::log(inner + 1.0) + 8.0 * std::log(1.0 + head);
}

// Tracking rule: pull the arm whose online count lags its weight the most.
// Ties break toward the lowest index.
inline int track_select(const std::vector<double>& w,
                        const std::vector<long long>& online_counts) {
  if (w.size() != online_counts.size() || w.empty()) {
    throw std::invalid_argument("ooband::track_select: length mismatch");
  }
  int arg = 0;
  double best = -1.0;
  for (int a = 0; a < static_cast<int>(w.size()); ++a) {
    if (online_counts[a] < 1) {
      throw std::invalid_argument(
          "ooband::track_select: every arm needs at least one sample");
    }
    const double ratio = w[a] / static_cast<double>(online_counts[a]);
    if (ratio > best) {
      best = ratio;
      arg = a;
    }
  }
  return arg;
}

// Mutable state of one sampler run. The family travels with the state so
// the stopping statistic can be evaluated at the pooled empirical means;
// the sampler never sees ground-truth means.
struct SamplerState {
  DistributionFamily family;
  long long t = 0;                       // online samples so far
  std::vector<long long> online_counts;  // N_a(t)
  std::vector<double> online_reward_sums;
  std::vector<double> pooled_means;  // offline + online, boundary-clamped
  std::vector<double> w;             // tracked running-average weights
  std::vector<double> w_hat;         // current oracle target proportions
  int explore_count = 0;             // exploration steps since last re-solve
  long long oracle_calls = 0;        // diagnostic: P2 re-solves performed
  long long tracking_violations = 0; // diagnostic: tracking-bound breaches

  explicit SamplerState(DistributionFamily fam) : family(fam) {}

  int K() const { return static_cast<int>(online_counts.size()); }
};

// Stopping statistic: empirical best arm at the pooled means and the
// smallest transportation index against it.
struct StoppingStat {
  double value = 0.0;
  int best = 0;
};

inline StoppingStat stopping_statistic(const SamplerState& state,
                                       const OfflineDataset& offline) {
  const int K = state.K();
  StoppingStat s;
  for (int a = 1; a < K; ++a) {
    if (state.pooled_means[a] > state.pooled_means[s.best]) s.best = a;
  }
  s.value = std::numeric_limits<double>::infinity();
  const double lam_best = static_cast<double>(offline.counts[s.best] +
                                              state.online_counts[s.best]);
  for (int b = 0; b < K; ++b) {
    if (b == s.best) continue;
    const double lam_b =
        static_cast<double>(offline.counts[b] + state.online_counts[b]);
    s.value = std::min(
        s.value, weighted_index(state.family, lam_best,
                                state.pooled_means[s.best], lam_b,
                                state.pooled_means[b]));
  }
  return s;
}

namespace detail {

inline bool is_perfect_square(long long v) {
  const auto r = static_cast<long long>(
      std::llround(std::sqrt(static_cast<double>(v))));
  return r * r == v;
}

inline void update_pooled_mean(SamplerState& state,
                               const OfflineDataset& offline, int a) {
  const double count = static_cast<double>(offline.counts[a]) +
                       static_cast<double>(state.online_counts[a]);
  const double sum = offline.reward_sums[a] + state.online_reward_sums[a];
  state.pooled_means[a] = state.family.clamp_mean(sum / count);
}

// Target proportions from the plug-in allocation problem at the pooled
// empirical means. nullopt when the plug-in problem is degenerate (tied
// empirical best, or a nonpositive threshold): the caller keeps the
// previous target in that case.
//
// The plug-in constraint level is the live stopping threshold β(τ₁+t, δ),
// not the fixed log(1/δ)+loglog(1/δ) the asymptotic analysis plans with.
// With offline data the optimal proportions are threshold-dependent, and
// planning several-fold below the stopping requirement starves any arm
// whose offline share covers the smaller level but not β: its target
// weight collapses to zero and only the √t forced-exploration schedule
// feeds it, inflating stopping times quadratically. Planning at β keeps
// the target consistent with the stopping rule at every scale; without
// offline data the two choices give identical proportions.
inline std::optional<std::vector<double>> refresh_target(
    const SamplerState& state, const OfflineDataset& offline, double delta,
    bool* solved) {
  *solved = false;
  const double threshold =
      beta_threshold(offline.tau1() + state.t, delta, state.K());
  if (!(threshold > 0.0)) return std::nullopt;

  const int K = state.K();
  int best = 0;
  for (int a = 1; a < K; ++a) {
    if (state.pooled_means[a] > state.pooled_means[best]) best = a;
  }
  for (int a = 0; a < K; ++a) {
    if (a != best && state.pooled_means[a] == state.pooled_means[best]) {
      return std::nullopt;  // tied empirical best: plug-in problem undefined
    }
  }

  BanditInstance plug(state.family, state.pooled_means);
  SolverConfig config;
  config.threshold = threshold;
  const AllocationVector alloc = solve_P2(plug, offline, config);
  *solved = true;
  const double total = alloc.total();
  std::vector<double> target(K, 1.0 / static_cast<double>(K));
  if (total > 0.0) {
    for (int a = 0; a < K; ++a) target[a] = alloc.n[a] / total;
  }
  // total == 0: offline data already certifies the plug-in instance;
  // uniform keeps the forced exploration meaningful.
  return target;
}

}  // namespace detail

// Selection half of a sampling step: advance the exploration schedule,
// blend the running-average weights, and pick the tracked arm. Exploration
// batches: whenever floor(t/K) is a perfect square the running average
// blends toward uniform and the exploration counter advances; after K such
// steps the oracle target is re-solved at the empirical means and the
// counter resets. All other steps blend toward the current target. Oracle
// failures propagate with state unchanged. Every call must be followed by
// exactly one tas_record before the next selection.
inline int tas_select(SamplerState& state, const OfflineDataset& offline,
                      double delta) {
  const int K = state.K();
  const long long t = state.t;
  const bool explore = detail::is_perfect_square(t / K);

  // Stage the schedule update first: the oracle may throw and the contract
  // is to leave the state untouched in that case.
  int new_count = state.explore_count;
  std::vector<double> new_what = state.w_hat;
  bool solved = false;
  if (explore) {
    ++new_count;
    if (new_count % K == 0) {
      const auto target = detail::refresh_target(state, offline, delta,
                                                 &solved);
      if (target.has_value()) new_what = *target;
      new_count = 0;
    }
  }

  state.explore_count = new_count;
  state.w_hat = std::move(new_what);
  if (solved) ++state.oracle_calls;

  const double keep = static_cast<double>(t) / static_cast<double>(t + 1);
  const double add = 1.0 / static_cast<double>(t + 1);
  for (int a = 0; a < K; ++a) {
    const double target =
        explore ? 1.0 / static_cast<double>(K) : state.w_hat[a];
    state.w[a] = keep * state.w[a] + add * target;
  }

  return track_select(state.w, state.online_counts);
}

// Recording half: consume the reward for the previously selected arm and
// update counts, sums, time, and the pooled mean of that arm.
inline void tas_record(SamplerState& state, const OfflineDataset& offline,
                       int arm, double reward) {
  state.online_counts[arm] += 1;
  state.online_reward_sums[arm] += reward;
  state.t += 1;
  detail::update_pooled_mean(state, offline, arm);

  // Diagnostic: the tracking rule should keep every count within
  // [t w_a - K - 1, t w_a + 1].
  const int K = state.K();
  for (int a = 0; a < K; ++a) {
    const double tw = static_cast<double>(state.t) * state.w[a];
    const double na = static_cast<double>(state.online_counts[a]);
    if (na < tw - K - 1 - 1e-9 || na > tw + 1.0 + 1e-9) {
      state.tracking_violations += 1;
    }
  }
}

// One full sampling step: select the arm, draw one reward from
// reward_oracle(arm), and record it. Returns the pulled arm.
template <typename RewardOracle>
inline int tas_step(SamplerState& state, const OfflineDataset& offline,
                    double delta, RewardOracle&& reward_oracle) {
  const int arm = tas_select(state, offline, delta);
  tas_record(state, offline, arm, reward_oracle(arm));
  return arm;
}

// Initialization: pull each arm once (in index order), set t = K and both
// weight vectors to uniform.
template <typename RewardOracle>
inline SamplerState tas_init(const DistributionFamily& family,
                             const OfflineDataset& offline,
                             RewardOracle&& reward_oracle) {
  const int K = offline.K();
  if (K < 2) {
    throw std::invalid_argument("ooband::tas_init: need at least two arms");
  }
  offline.validate(K);
  SamplerState state(family);
  state.online_counts.assign(K, 0);
  state.online_reward_sums.assign(K, 0.0);
  state.pooled_means.assign(K, 0.0);
  state.w.assign(K, 1.0 / static_cast<double>(K));
  state.w_hat.assign(K, 1.0 / static_cast<double>(K));
  for (int a = 0; a < K; ++a) {
    state.online_counts[a] = 1;
    state.online_reward_sums[a] = reward_oracle(a);
    state.t += 1;
  }
  for (int a = 0; a < K; ++a) detail::update_pooled_mean(state, offline, a);
  return state;
}

struct TraceRow {
  long long t = 0;
  int arm = 0;
  double statistic = 0.0;
  double threshold = 0.0;
};

struct RunResult {
  long long stop_time = 0;
  int recommended_arm = 0;
  bool correct = false;
  std::vector<long long> final_counts;
  std::optional<std::vector<TraceRow>> trace;
  long long oracle_calls = 0;
  long long tracking_violations = 0;
};

struct RunOptions {
  long long max_steps = 10000000;  // hard cap on online samples
  bool record_trace = false;
};

// Thrown when the step cap is reached before the stopping rule fires; the
// partial state is carried for inspection.
struct BudgetExhaustedError : std::runtime_error {
  SamplerState state;
  BudgetExhaustedError(SamplerState s, long long cap)
      : std::runtime_error(
            "ooband::tas_run: step budget " + std::to_string(cap) +
            " exhausted before the stopping rule fired"),
        state(std::move(s)) {}
};

// Core loop shared by the direct runner and the replay meta-algorithm: the
// reward source is injected, correctness is left for the caller to fill.
template <typename RewardOracle>
inline RunResult tas_run_core(const DistributionFamily& family,
                              const OfflineDataset& offline, double delta,
                              RewardOracle&& reward_oracle,
                              const RunOptions& options = RunOptions{}) {
  if (!(delta > 0.0 && delta < 1.0)) {
    throw std::invalid_argument("ooband::tas_run: delta must be in (0, 1)");
  }
  const int K = offline.K();
  if (options.max_steps < K) {
    throw std::invalid_argument(
        "ooband::tas_run: max_steps must cover initialization");
  }
  const long long tau1 = offline.tau1();

  SamplerState state = tas_init(family, offline, reward_oracle);
  std::vector<TraceRow> trace;
  StoppingStat stat = stopping_statistic(state, offline);
  double threshold = beta_threshold(tau1 + state.t, delta, K);
  while (stat.value < threshold) {
    if (state.t >= options.max_steps) {
      throw BudgetExhaustedError(std::move(state), options.max_steps);
    }
    const int arm = tas_step(state, offline, delta, reward_oracle);
    stat = stopping_statistic(state, offline);
    threshold = beta_threshold(tau1 + state.t, delta, K);
    if (options.record_trace) {
      trace.push_back(TraceRow{state.t, arm, stat.value, threshold});
    }
  }

  RunResult result;
  result.stop_time = state.t;
  result.recommended_arm = stat.best;
  result.final_counts = state.online_counts;
  result.oracle_calls = state.oracle_calls;
  result.tracking_violations = state.tracking_violations;
  if (options.record_trace) result.trace = std::move(trace);
  return result;
}

// Full simulated run against a ground-truth instance: per-arm reward
// streams are derived from the seed, and the recommendation is scored.
inline RunResult tas_run(const BanditInstance& instance,
                         const OfflineDataset& offline, double delta,
                         std::uint64_t seed,
                         const RunOptions& options = RunOptions{}) {
  offline.validate(instance.K());
  ArmStreams streams(instance, seed);
  RunResult result =
      tas_run_core(instance.family(), offline, delta,
                   [&](int arm) { return streams.draw(arm); }, options);
  result.correct = result.recommended_arm == instance.best_arm();
  return result;
}

}  // namespace ooband
