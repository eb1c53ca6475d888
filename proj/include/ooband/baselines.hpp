#pragma once
// Comparison algorithms for the offline+online setting:
//   - LUCB with pooled counts, in Hoeffding and KL index variants;
//   - the artificial-replay meta-algorithm, which feeds historical rewards
//     to a purely-online base sampler before spending fresh samples;
//   - UCB with pooled counts for regret minimization (Gaussian only).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ooband/rng.hpp"
#include "ooband/spef.hpp"
#include "ooband/tas.hpp"
#include "ooband/types.hpp"

namespace ooband {

// ---------------------------------------------------------------------------
// LUCB
// ---------------------------------------------------------------------------

// Exploration rate C(tau1 + t, delta) used by both LUCB index families.
inline double lucb_confidence_radius(long long t, long long tau1, double delta,
                                     int K) {
  if (t < 1 || tau1 < 0) {
    throw std::invalid_argument(
        "ooband::lucb_confidence_radius: need t >= 1 and tau1 >= 0");
  }
  if (!(delta > 0.0 && delta < 1.0)) {
    throw std::invalid_argument(
        "ooband::lucb_confidence_radius: delta must be in (0, 1)");
  }
  if (K < 2) {
    throw std::invalid_argument(
        "ooband::lucb_confidence_radius: K must be >= 2");
  }
  const double n = static_cast<double>(tau1 + t);
  const double inner = std::log(static_cast<double>(K) * n * n / delta);
  return inner + std::log(1.0 + inner);
}

enum class LucbIndexFamily { HoeffdingBound, KlBound };

// Per-round LUCB quantities: confidence bounds for every arm, the leader
// (empirical best), the challenger (highest upper bound elsewhere), and the
// gap statistic B = U_challenger - L_leader that drives stopping.
struct LucbState {
  DistributionFamily family;
  LucbIndexFamily index_family = LucbIndexFamily::HoeffdingBound;
  long long t = 0;
  std::vector<long long> online_counts;
  std::vector<double> online_reward_sums;
  std::vector<double> pooled_means;
  std::vector<double> upper;
  std::vector<double> lower;
  int leader = 0;
  int challenger = 1;
  double B = 0.0;

  explicit LucbState(DistributionFamily fam) : family(fam) {}

  int K() const { return static_cast<int>(online_counts.size()); }
};

namespace detail {

inline void lucb_update_pooled_mean(LucbState& state,
                                    const OfflineDataset& offline, int a) {
  const double count = static_cast<double>(offline.counts[a]) +
                       static_cast<double>(state.online_counts[a]);
  const double sum = offline.reward_sums[a] + state.online_reward_sums[a];
  state.pooled_means[a] = state.family.clamp_mean(sum / count);
}

}  // namespace detail

// Recompute bounds, leader, challenger, and the gap statistic at the
// current time. Ties break toward the lowest index.
inline void lucb_round_bounds(LucbState& state, const OfflineDataset& offline,
                              double delta) {
  const int K = state.K();
  const double level =
      lucb_confidence_radius(state.t, offline.tau1(), delta, K);
  for (int a = 0; a < K; ++a) {
    const double n = static_cast<double>(offline.counts[a]) +
                     static_cast<double>(state.online_counts[a]);
    const double m = state.pooled_means[a];
    if (state.index_family == LucbIndexFamily::HoeffdingBound) {
      const double radius = std::sqrt(level / (2.0 * n));
      state.upper[a] = m + radius;
      state.lower[a] = m - radius;
    } else {
      state.upper[a] = kl_upper_confidence(state.family, m, n, level);
      state.lower[a] = kl_lower_confidence(state.family, m, n, level);
    }
  }
  state.leader = 0;
  for (int a = 1; a < K; ++a) {
    if (state.pooled_means[a] > state.pooled_means[state.leader]) {
      state.leader = a;
    }
  }
  state.challenger = state.leader == 0 ? 1 : 0;
  for (int a = 0; a < K; ++a) {
    if (a == state.leader) continue;
    if (state.upper[a] > state.upper[state.challenger]) state.challenger = a;
  }
  state.B = state.upper[state.challenger] - state.lower[state.leader];
}

// Thrown when the step cap is reached before LUCB stops.
struct LucbBudgetExhaustedError : std::runtime_error {
  LucbState state;
  LucbBudgetExhaustedError(LucbState s, long long cap)
      : std::runtime_error(
            "ooband::lucb_run: step budget " + std::to_string(cap) +
            " exhausted before the stopping rule fired"),
        state(std::move(s)) {}
};

// LUCB for the offline+online setting: pull each arm once, then per round
// compute bounds, stop when the challenger's upper bound falls below the
// leader's lower bound, otherwise sample both leader and challenger
// (t advances by 2). Recommends the final leader. When final_state is
// non-null the state at stopping time is copied there.
inline RunResult lucb_run(const BanditInstance& instance,
                          const OfflineDataset& offline, double delta,
                          LucbIndexFamily index_family, std::uint64_t seed,
                          const RunOptions& options = RunOptions{},
                          LucbState* final_state = nullptr) {
  if (!(delta > 0.0 && delta < 1.0)) {
    throw std::invalid_argument("ooband::lucb_run: delta must be in (0, 1)");
  }
  const int K = instance.K();
  offline.validate(K);
  if (options.max_steps < K) {
    throw std::invalid_argument(
        "ooband::lucb_run: max_steps must cover initialization");
  }
  ArmStreams streams(instance, seed);

  LucbState state(instance.family());
  state.index_family = index_family;
  state.online_counts.assign(K, 0);
  state.online_reward_sums.assign(K, 0.0);
  state.pooled_means.assign(K, 0.0);
  state.upper.assign(K, 0.0);
  state.lower.assign(K, 0.0);
  for (int a = 0; a < K; ++a) {
    state.online_counts[a] = 1;
    state.online_reward_sums[a] = streams.draw(a);
    state.t += 1;
  }
  for (int a = 0; a < K; ++a) {
    detail::lucb_update_pooled_mean(state, offline, a);
  }

  for (;;) {
    lucb_round_bounds(state, offline, delta);
    if (state.B < 0.0) break;
    if (state.t + 2 > options.max_steps) {
      throw LucbBudgetExhaustedError(std::move(state), options.max_steps);
    }
    for (int arm : {state.leader, state.challenger}) {
      state.online_counts[arm] += 1;
      state.online_reward_sums[arm] += streams.draw(arm);
      state.t += 1;
      detail::lucb_update_pooled_mean(state, offline, arm);
    }
  }

  RunResult result;
  result.stop_time = state.t;
  result.recommended_arm = state.leader;
  result.correct = state.leader == instance.best_arm();
  result.final_counts = state.online_counts;
  if (final_state != nullptr) *final_state = state;
  return result;
}

// ---------------------------------------------------------------------------
// Artificial replay
// ---------------------------------------------------------------------------

// Minimal interface a base best-arm-identification sampler must expose for
// the replay meta-algorithm: it is asked for one arm at a time and fed one
// reward per request.
class BaiSampler {
 public:
  virtual ~BaiSampler() = default;
  virtual int next_arm() = 0;
  virtual void feed(int arm, double reward) = 0;
  virtual bool should_stop() = 0;
  virtual int recommend() const = 0;
  virtual std::vector<long long> counts() const = 0;
};

// Purely-online batch track-and-stop behind the BaiSampler interface: the
// base never learns that some of its rewards came from a historical log.
class OnlineTasSampler : public BaiSampler {
 public:
  OnlineTasSampler(const DistributionFamily& family, int K, double delta)
      : offline_(OfflineDataset::empty(K)), state_(family), delta_(delta) {
    if (K < 2) {
      throw std::invalid_argument(
          "ooband::OnlineTasSampler: need at least two arms");
    }
    state_.online_counts.assign(K, 0);
    state_.online_reward_sums.assign(K, 0.0);
    state_.pooled_means.assign(K, 0.0);
    state_.w.assign(K, 1.0 / static_cast<double>(K));
    state_.w_hat.assign(K, 1.0 / static_cast<double>(K));
  }

  int next_arm() override {
    const int K = state_.K();
    if (state_.t < K) return static_cast<int>(state_.t);  // initialization
    if (!pending_.has_value()) {
      pending_ = tas_select(state_, offline_, delta_);
    }
    return *pending_;
  }

  void feed(int arm, double reward) override {
    const int K = state_.K();
    if (state_.t < K) {
      state_.online_counts[arm] += 1;
      state_.online_reward_sums[arm] += reward;
      state_.t += 1;
      detail::update_pooled_mean(state_, offline_, arm);
      return;
    }
    pending_.reset();
    tas_record(state_, offline_, arm, reward);
  }

  bool should_stop() override {
    const int K = state_.K();
    if (state_.t < K) return false;
    const auto stat = stopping_statistic(state_, offline_);
    return stat.value >= beta_threshold(state_.t, delta_, K);
  }

  int recommend() const override {
    return stopping_statistic(state_, offline_).best;
  }

  std::vector<long long> counts() const override {
    return state_.online_counts;
  }

  long long total_samples() const { return state_.t; }

 private:
  OfflineDataset offline_;  // the base is purely online: all zeros
  SamplerState state_;
  double delta_;
  std::optional<int> pending_;
};

using BaiSamplerFactory = std::function<std::unique_ptr<BaiSampler>(
    const DistributionFamily&, int, double)>;

inline BaiSamplerFactory online_tas_factory() {
  return [](const DistributionFamily& family, int K, double delta) {
    return std::make_unique<OnlineTasSampler>(family, K, delta);
  };
}

// Per-arm FIFO queues of historical rewards, consumed in arrival order.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::vector<std::vector<double>> rewards)
      : rewards_(std::move(rewards)), next_(rewards_.size(), 0) {}

  int K() const { return static_cast<int>(rewards_.size()); }

  bool has(int arm) const { return next_[arm] < rewards_[arm].size(); }

  double pop(int arm) {
    if (!has(arm)) {
      throw std::logic_error("ooband::ReplayBuffer: arm queue exhausted");
    }
    return rewards_[arm][next_[arm]++];
  }

  long long consumed() const {
    long long c = 0;
    for (size_t n : next_) c += static_cast<long long>(n);
    return c;
  }

  long long remaining() const {
    long long r = 0;
    for (int a = 0; a < K(); ++a) {
      r += static_cast<long long>(rewards_[a].size() - next_[a]);
    }
    return r;
  }

 private:
  std::vector<std::vector<double>> rewards_;
  std::vector<size_t> next_;
};

struct ReplayResult {
  RunResult result;  // stop_time counts fresh online samples only
  std::vector<long long> consumed_offline;
  std::vector<long long> fresh_online;
  std::vector<long long> base_counts;  // per-arm demand seen by the base
  long long base_total_samples = 0;
};

// Thrown when the step cap is reached before the base sampler stops.
struct ReplayBudgetExhaustedError : std::runtime_error {
  long long samples_taken;
  ReplayBudgetExhaustedError(long long taken, long long cap)
      : std::runtime_error(
            "ooband::artificial_replay_run: step budget " +
            std::to_string(cap) +
            " exhausted before the base sampler stopped"),
        samples_taken(taken) {}
};

// Artificial replay: run the base sampler, serving each arm request from
// the per-arm historical buffer while it lasts (not counted as online) and
// from a fresh stream afterwards (counted). The base sees one unified
// reward sequence and is never told which samples were recycled.
inline ReplayResult artificial_replay_run(
    const BanditInstance& instance,
    const std::vector<std::vector<double>>& offline_samples,
    const BaiSamplerFactory& make_base, double delta, std::uint64_t seed,
    const RunOptions& options = RunOptions{}) {
  const int K = instance.K();
  if (static_cast<int>(offline_samples.size()) != K) {
    throw std::invalid_argument(
        "ooband::artificial_replay_run: offline_samples length mismatch");
  }
  ReplayBuffer buffer(offline_samples);
  auto base = make_base(instance.family(), K, delta);
  ArmStreams streams(instance, seed);

  ReplayResult out;
  out.consumed_offline.assign(K, 0);
  out.fresh_online.assign(K, 0);
  long long total = 0;
  while (!base->should_stop()) {
    if (total >= options.max_steps) {
      throw ReplayBudgetExhaustedError(total, options.max_steps);
    }
    const int arm = base->next_arm();
    double reward;
    if (buffer.has(arm)) {
      reward = buffer.pop(arm);
      out.consumed_offline[arm] += 1;
    } else {
      reward = streams.draw(arm);
      out.fresh_online[arm] += 1;
    }
    base->feed(arm, reward);
    ++total;
  }

  out.base_total_samples = total;
  out.base_counts = base->counts();
  long long fresh = 0;
  for (long long f : out.fresh_online) fresh += f;
  out.result.stop_time = fresh;
  out.result.recommended_arm = base->recommend();
  out.result.correct = out.result.recommended_arm == instance.best_arm();
  out.result.final_counts = out.fresh_online;
  return out;
}

// ---------------------------------------------------------------------------
// UCB for regret (Gaussian)
// ---------------------------------------------------------------------------

struct UcbRegretState {
  long long t = 0;
  std::vector<long long> online_counts;
  std::vector<double> online_reward_sums;
  std::vector<double> pooled_means;
  long long horizon = 0;
  double regret = 0.0;  // simulation-side bookkeeping from true gaps
};

struct UcbRegretResult {
  std::vector<long long> pulls;
  double regret = 0.0;
};

// Exact regret of a pull profile under the instance's true gaps.
inline double cumulative_regret(const std::vector<double>& means,
                                const std::vector<long long>& pulls) {
  if (means.size() != pulls.size()) {
    throw std::invalid_argument(
        "ooband::cumulative_regret: length mismatch");
  }
  const double best = *std::max_element(means.begin(), means.end());
  double r = 0.0;
  for (size_t a = 0; a < means.size(); ++a) {
    r += static_cast<double>(pulls[a]) * (best - means[a]);
  }
  return r;
}

// UCB with pooled offline+online counts on a Gaussian instance: pull each
// arm once, then for rounds t = K+1..T pull the arm maximizing
// mean + sqrt(4 log t / pooled count). Returns pull counts and the exact
// cumulative regret of the online pulls.
inline UcbRegretResult oo_ucb_regret_run(const BanditInstance& instance,
                                         const OfflineDataset& offline,
                                         long long horizon,
                                         std::uint64_t seed) {
  if (instance.family().is_bernoulli()) {
    throw std::invalid_argument(
        "ooband::oo_ucb_regret_run: only the Gaussian unit-variance family "
        "is supported");
  }
  const int K = instance.K();
  offline.validate(K);
  if (horizon < K) {
    throw std::invalid_argument(
        "ooband::oo_ucb_regret_run: horizon must be at least K");
  }
  ArmStreams streams(instance, seed);

  UcbRegretState state;
  state.horizon = horizon;
  state.online_counts.assign(K, 0);
  state.online_reward_sums.assign(K, 0.0);
  state.pooled_means.assign(K, 0.0);

  const auto pull = [&](int arm) {
    state.online_counts[arm] += 1;
    state.online_reward_sums[arm] += streams.draw(arm);
    state.t += 1;
    const double count = static_cast<double>(offline.counts[arm]) +
                         static_cast<double>(state.online_counts[arm]);
    state.pooled_means[arm] =
        (offline.reward_sums[arm] + state.online_reward_sums[arm]) / count;
    state.regret += instance.gap(arm);
  };

  for (int a = 0; a < K; ++a) pull(a);
  for (long long t = K + 1; t <= horizon; ++t) {
    int arg = 0;
    double best = -std::numeric_limits<double>::infinity();
    for (int a = 0; a < K; ++a) {
      const double n = static_cast<double>(offline.counts[a]) +
                       static_cast<double>(state.online_counts[a]);
      const double u = state.pooled_means[a] +
                       std::sqrt(4.0 * std::log(static_cast<double>(t)) / n);
      if (u > best) {
        best = u;
        arg = a;
      }
    }
    pull(arg);
  }

  UcbRegretResult out;
  out.pulls = state.online_counts;
  out.regret = cumulative_regret(instance.means(), out.pulls);
  return out;
}

}  // namespace ooband
