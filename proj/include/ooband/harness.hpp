#pragma once
// Experiment orchestration: offline-data generation under configurable
// policies, seeded Monte-Carlo sweeps, aggregation, CSV/SVG persistence,
// and the solver verification battery behind the `verify` subcommand.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ooband/baselines.hpp"
#include "ooband/config.hpp"
#include "ooband/oracle.hpp"
#include "ooband/rng.hpp"
#include "ooband/svg.hpp"
#include "ooband/tas.hpp"
#include "ooband/types.hpp"

namespace ooband {

// ---------------------------------------------------------------------------
// Offline-data generation
// ---------------------------------------------------------------------------

// Seed tags for the independent random streams hanging off one trial seed.
// Arm streams use tags 0..K-1 internally, so these stay far away.
inline constexpr std::uint64_t kOfflineStreamTag = 0x6F66666C696E65ULL;
inline constexpr std::uint64_t kOnlineStreamTag = 0x6F6E6C696E65ULL;
inline constexpr std::uint64_t kPolicyStreamTag = 0x706F6C696379ULL;

struct GeneratedOffline {
  OfflineDataset dataset;
  std::vector<std::vector<double>> samples;  // per-arm lists, arrival order
};

// Draw tau1 offline samples under the given policy. Uniform and
// UniformExcludeBest assign counts round-robin (deterministic), so for a
// fixed seed the dataset at a smaller tau1 is a prefix of the dataset at a
// larger one; CustomWeights draws multinomial counts first.
inline GeneratedOffline generate_offline(const OfflinePolicy& policy,
                                         long long tau1,
                                         const BanditInstance& instance,
                                         std::uint64_t seed) {
  if (tau1 < 0) {
    throw std::invalid_argument("ooband::generate_offline: tau1 must be >= 0");
  }
  const int K = instance.K();
  policy.validate(K);

  std::vector<long long> counts(K, 0);
  switch (policy.kind) {
    case OfflinePolicy::Kind::Uniform:
      for (long long i = 0; i < tau1; ++i) counts[i % K] += 1;
      break;
    case OfflinePolicy::Kind::UniformExcludeBest: {
      std::vector<int> others;
      for (int a = 0; a < K; ++a) {
        if (a != instance.best_arm()) others.push_back(a);
      }
      for (long long i = 0; i < tau1; ++i) {
        counts[others[i % others.size()]] += 1;
      }
      break;
    }
    case OfflinePolicy::Kind::CustomWeights: {
      std::mt19937_64 rng(mix_seed(seed, kPolicyStreamTag));
      std::discrete_distribution<int> pick(policy.weights.begin(),
                                           policy.weights.end());
      for (long long i = 0; i < tau1; ++i) counts[pick(rng)] += 1;
      break;
    }
  }

  GeneratedOffline out;
  out.dataset = OfflineDataset::empty(K);
  out.dataset.counts = counts;
  out.samples.assign(K, {});
  ArmStreams streams(instance, seed);
  for (int a = 0; a < K; ++a) {
    out.samples[a].reserve(static_cast<size_t>(counts[a]));
    for (long long i = 0; i < counts[a]; ++i) {
      const double r = streams.draw(a);
      out.samples[a].push_back(r);
      out.dataset.reward_sums[a] += r;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Sweep driver
// ---------------------------------------------------------------------------

struct TrialRecord {
  std::string algorithm;
  long long tau1 = 0;
  int trial = 0;
  std::uint64_t seed = 0;  // child seed for this (algorithm, trial)
  long long stop_time = 0;
  int recommended_arm = -1;  // -1 marks a failed (budget-exhausted) trial
  bool correct = false;
  double wall_time_ms = 0.0;
  long long tracking_violations = 0;  // nonzero only for track-and-stop runs
};

struct AggregateStats {
  std::string algorithm;
  long long tau1 = 0;
  int trials = 0;
  double mean_stop = 0.0;
  double std_stop = 0.0;
  double q10 = 0.0;
  double q50 = 0.0;
  double q90 = 0.0;
  double error_rate = 0.0;
};

// Child seed for one (algorithm, trial) cell. tau1 is deliberately NOT
// mixed in: with per-arm reward streams this makes the offline dataset at
// a smaller tau1 a prefix of the larger one and pairs the online
// randomness across tau1 cells, so sweep curves are compared on common
// random numbers. Each cell remains independently reproducible.
inline std::uint64_t sweep_trial_seed(std::uint64_t master_seed,
                                      AlgorithmKind algorithm,
                                      const OfflinePolicy& policy,
                                      int trial) {
  std::uint64_t s =
      mix_seed(master_seed, static_cast<std::uint64_t>(algorithm));
  s = mix_seed(s, static_cast<std::uint64_t>(policy.kind));
  s = mix_seed(s, static_cast<std::uint64_t>(trial));
  return s;
}

// Run one best-arm-identification trial with an explicit child seed.
// Budget exhaustion is reported as a failed record (recommended_arm = -1)
// rather than an exception so a sweep can continue past it.
inline TrialRecord run_trial_with_seed(const ExperimentConfig& config,
                                       AlgorithmKind algorithm,
                                       long long tau1, std::uint64_t child,
                                       int trial) {
  if (algorithm == AlgorithmKind::UcbRegret) {
    throw std::invalid_argument(
        "ooband::run_trial: ucb-regret has a fixed horizon, not a stopping "
        "time; use oo_ucb_regret_run directly");
  }
  const BanditInstance instance = config.instance();
  const auto offline =
      generate_offline(config.offline_policy, tau1, instance,
                       mix_seed(child, kOfflineStreamTag));
  const std::uint64_t run_seed = mix_seed(child, kOnlineStreamTag);
  RunOptions options;
  options.max_steps = config.max_steps;

  TrialRecord rec;
  rec.algorithm = algorithm_name(algorithm);
  rec.tau1 = tau1;
  rec.trial = trial;
  rec.seed = child;

  const auto t0 = std::chrono::steady_clock::now();
  try {
    RunResult result;
    switch (algorithm) {
      case AlgorithmKind::BatchTas:
        result = tas_run(instance, offline.dataset, config.delta, run_seed,
                         options);
        break;
      case AlgorithmKind::LucbHoeffding:
        result = lucb_run(instance, offline.dataset, config.delta,
                          LucbIndexFamily::HoeffdingBound, run_seed, options);
        break;
      case AlgorithmKind::LucbKl:
        result = lucb_run(instance, offline.dataset, config.delta,
                          LucbIndexFamily::KlBound, run_seed, options);
        break;
      case AlgorithmKind::Replay:
        result = artificial_replay_run(instance, offline.samples,
                                       online_tas_factory(), config.delta,
                                       run_seed, options)
                     .result;
        break;
      case AlgorithmKind::UcbRegret:
        break;  // rejected above
    }
    rec.stop_time = result.stop_time;
    rec.recommended_arm = result.recommended_arm;
    rec.correct = result.correct;
    rec.tracking_violations = result.tracking_violations;
  } catch (const BudgetExhaustedError& e) {
    rec.stop_time = e.state.t;
    rec.tracking_violations = e.state.tracking_violations;
  } catch (const LucbBudgetExhaustedError& e) {
    rec.stop_time = e.state.t;
  } catch (const ReplayBudgetExhaustedError& e) {
    rec.stop_time = e.samples_taken;
  }
  const auto t1 = std::chrono::steady_clock::now();
  rec.wall_time_ms =
      std::chrono::duration<double, std::milli>(t1 - t0).count();
  return rec;
}

// Sweep entry point: the child seed is derived from the master seed.
inline TrialRecord run_trial(const ExperimentConfig& config,
                             AlgorithmKind algorithm, long long tau1,
                             int trial) {
  const std::uint64_t child = sweep_trial_seed(
      config.master_seed, algorithm, config.offline_policy, trial);
  return run_trial_with_seed(config, algorithm, tau1, child, trial);
}

namespace detail {

// Linear-interpolation quantile of an already sorted sample.
inline double sorted_quantile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) {
    throw std::invalid_argument("ooband: quantile of an empty sample");
  }
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const size_t i = static_cast<size_t>(pos);
  if (i + 1 >= sorted.size()) return sorted.back();
  const double frac = pos - static_cast<double>(i);
  return sorted[i] * (1.0 - frac) + sorted[i + 1] * frac;
}

}  // namespace detail

// Collapse trial records into per-(algorithm, tau1) statistics. The result
// is sorted by (algorithm, tau1), so it does not depend on the order in
// which trials completed.
inline std::vector<AggregateStats> aggregate_records(
    const std::vector<TrialRecord>& records) {
  std::map<std::pair<std::string, long long>, std::vector<const TrialRecord*>>
      groups;
  for (const auto& r : records) {
    groups[{r.algorithm, r.tau1}].push_back(&r);
  }
  std::vector<AggregateStats> out;
  for (const auto& [key, rows] : groups) {
    AggregateStats s;
    s.algorithm = key.first;
    s.tau1 = key.second;
    s.trials = static_cast<int>(rows.size());
    std::vector<double> stops;
    stops.reserve(rows.size());
    double sum = 0.0;
    int wrong = 0;
    for (const TrialRecord* r : rows) {
      stops.push_back(static_cast<double>(r->stop_time));
      sum += static_cast<double>(r->stop_time);
      if (!r->correct) ++wrong;
    }
    std::sort(stops.begin(), stops.end());
    s.mean_stop = sum / static_cast<double>(stops.size());
    double ss = 0.0;
    for (double v : stops) ss += (v - s.mean_stop) * (v - s.mean_stop);
    s.std_stop = stops.size() > 1
                     ? std::sqrt(ss / static_cast<double>(stops.size() - 1))
                     : 0.0;
    s.q10 = detail::sorted_quantile(stops, 0.1);
    s.q50 = detail::sorted_quantile(stops, 0.5);
    s.q90 = detail::sorted_quantile(stops, 0.9);
    s.error_rate = static_cast<double>(wrong) / static_cast<double>(s.trials);
    out.push_back(std::move(s));
  }
  return out;
}

// ---------------------------------------------------------------------------
// CSV persistence
// ---------------------------------------------------------------------------

inline std::string trials_csv(const std::vector<TrialRecord>& records) {
  std::ostringstream os;
  os << "algorithm,tau1,trial,seed,stop_time,recommended_arm,correct,"
        "wall_time_ms\n";
  os << std::fixed << std::setprecision(3);
  for (const auto& r : records) {
    os << r.algorithm << ',' << r.tau1 << ',' << r.trial << ',' << r.seed
       << ',' << r.stop_time << ',' << r.recommended_arm << ','
       << (r.correct ? 1 : 0) << ',' << r.wall_time_ms << '\n';
  }
  return os.str();
}

inline std::string aggregates_csv(const std::vector<AggregateStats>& stats) {
  std::ostringstream os;
  os << "algorithm,tau1,trials,mean_stop,std_stop,q10,q50,q90,error_rate\n";
  os << std::fixed << std::setprecision(6);
  for (const auto& s : stats) {
    os << s.algorithm << ',' << s.tau1 << ',' << s.trials << ','
       << s.mean_stop << ',' << s.std_stop << ',' << s.q10 << ',' << s.q50
       << ',' << s.q90 << ',' << s.error_rate << '\n';
  }
  return os.str();
}

inline void write_text_file(const std::filesystem::path& path,
                            const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("ooband: cannot write '" + path.string() + "'");
  }
  out << content;
}

// ---------------------------------------------------------------------------
// Plot emission
// ---------------------------------------------------------------------------

// One chart per sweep: x = tau1, y = mean stopping time with the q10-q90
// band, one series per algorithm. Returns the written file paths; an empty
// aggregate list produces no files and a warning on stderr.
inline std::vector<std::string> emit_plots(
    const std::vector<AggregateStats>& stats, const std::string& output_dir,
    const std::string& policy_name) {
  if (stats.empty()) {
    std::cerr << "ooband::emit_plots: nothing to plot (no aggregates)\n";
    return {};
  }
  std::map<std::string, PlotSeries> by_algo;
  for (const auto& s : stats) {
    auto& series = by_algo[s.algorithm];
    series.label = s.algorithm;
    series.x.push_back(static_cast<double>(s.tau1));
    series.y.push_back(s.mean_stop);
    series.y_lo.push_back(s.q10);
    series.y_hi.push_back(s.q90);
  }
  std::vector<PlotSeries> series;
  for (auto& [name, s] : by_algo) series.push_back(std::move(s));
  const std::string svg = render_line_chart(
      series, "Stopping time vs offline samples (" + policy_name + ")",
      "offline samples", "mean stopping time");
  std::filesystem::create_directories(output_dir);
  const auto path = std::filesystem::path(output_dir) /
                    ("stop_time_" + policy_name + ".svg");
  write_text_file(path, svg);
  return {path.string()};
}

struct SweepResult {
  std::vector<TrialRecord> records;
  std::vector<AggregateStats> aggregates;
  std::vector<std::string> files;  // everything written to output_dir
};

// Full sweep: for each algorithm, offline size, and trial, derive the
// child seed, generate offline data, run, record; then aggregate and write
// trials.csv, aggregates.csv, and the plot.
inline SweepResult run_sweep(const ExperimentConfig& config,
                             bool write_outputs = true) {
  config.validate();
  for (AlgorithmKind algo : config.algorithms) {
    if (algo == AlgorithmKind::UcbRegret) {
      throw std::invalid_argument(
          "ooband::run_sweep: ucb-regret has no stopping time; sweep "
          "accepts tas|lucb-h|lucb-kl|replay");
    }
  }
  SweepResult out;
  for (AlgorithmKind algo : config.algorithms) {
    for (long long tau1 : config.offline_sizes) {
      for (int trial = 0; trial < config.trials; ++trial) {
        out.records.push_back(run_trial(config, algo, tau1, trial));
      }
    }
  }
  out.aggregates = aggregate_records(out.records);
  if (write_outputs) {
    std::filesystem::create_directories(config.output_dir);
    const auto dir = std::filesystem::path(config.output_dir);
    write_text_file(dir / "trials.csv", trials_csv(out.records));
    out.files.push_back((dir / "trials.csv").string());
    write_text_file(dir / "aggregates.csv", aggregates_csv(out.aggregates));
    out.files.push_back((dir / "aggregates.csv").string());
    auto plots = emit_plots(out.aggregates, config.output_dir,
                            config.offline_policy.name());
    out.files.insert(out.files.end(), plots.begin(), plots.end());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Verification battery
// ---------------------------------------------------------------------------

struct VerificationCheck {
  std::string name;
  bool pass = false;
  double residual = 0.0;
  std::string detail;
};

struct VerificationReport {
  std::vector<VerificationCheck> checks;
  bool all_pass = true;

  void add(VerificationCheck c) {
    all_pass = all_pass && c.pass;
    checks.push_back(std::move(c));
  }
};

// Solver self-checks on one (instance, offline, delta) triple: first-order
// optimality residuals of the allocation, the normalized/unnormalized
// round trip, and the boundary cases where offline data alone dominates or
// is dominated by the online optimum.
inline VerificationReport verify_instance(const BanditInstance& instance,
                                          const OfflineDataset& offline,
                                          double delta,
                                          double epsilon = 1e-6) {
  VerificationReport report;
  const int K = instance.K();
  offline.validate(K);

  // 1. Solve the allocation problem and audit first-order optimality.
  std::vector<double> off_real(offline.counts.begin(), offline.counts.end());
  const auto p1 = solve_P1(instance, off_real, delta, epsilon);
  SolverConfig config;
  config.epsilon = epsilon;
  config.threshold = std::log(1.0 / (2.4 * delta));
  {
    const auto audit =
        check_optimality(instance, offline, p1.allocation, config);
    VerificationCheck c;
    c.name = "allocation-optimality";
    c.residual = audit.max_constraint_violation;
    c.pass = c.residual <= 1e-4;
    std::ostringstream os;
    os << "total " << p1.allocation.total() << ", max violation "
       << c.residual;
    c.detail = os.str();
    report.add(std::move(c));
  }

  // 2. Normalized round trip: solve the (z, w) problem at the offline
  // proportions and rebuild the allocation it implies; compare per arm.
  {
    VerificationCheck c;
    c.name = "normalized-round-trip";
    const double L = std::log(1.0 / delta) + std::log(std::log(1.0 / delta));
    if (!(L > 0.0)) {
      c.pass = true;
      c.detail = "skipped: delta too large for a positive threshold";
      report.add(std::move(c));
    } else {
      SolverConfig cfg;
      cfg.epsilon = epsilon;
      cfg.threshold = L;
      const auto direct = solve_P2(instance, offline, cfg);
      const long long tau1 = offline.tau1();
      const auto normalized =
          solve_P3(instance, offline.proportions(), tau1, delta);
      // normalized.w holds online proportions, so the implied allocation
      // is w * T_online with T_online read off the offline fraction z.
      std::vector<double> rebuilt(K, 0.0);
      if (tau1 == 0) {
        // z = 0: scale the weights until the index value meets L.
        const auto v = eval_V(instance, 0.0, offline.proportions());
        const double total = v.value > 0.0 ? L / v.value : 0.0;
        for (int a = 0; a < K; ++a) rebuilt[a] = normalized.w[a] * total;
      } else {
        const double t_online = static_cast<double>(tau1) *
                                (1.0 / normalized.z - 1.0);
        for (int a = 0; a < K; ++a) {
          rebuilt[a] = normalized.w[a] * t_online;
        }
      }
      double worst = 0.0;
      for (int a = 0; a < K; ++a) {
        worst = std::max(worst, std::abs(rebuilt[a] - direct.n[a]) /
                                    (1.0 + std::abs(direct.n[a])));
      }
      c.residual = worst;
      c.pass = worst <= 1e-3;
      std::ostringstream os;
      os << "z " << normalized.z << ", worst per-arm gap " << worst;
      c.detail = os.str();
      report.add(std::move(c));
    }
  }

  // 3. Boundary cases against the all-online optimum.
  {
    const auto online_only = solve_P1(
        instance, std::vector<double>(K, 0.0), delta, epsilon);
    const double scale = 1.0 + online_only.allocation.total();
    bool dominates = true;
    bool dominated = true;
    for (int a = 0; a < K; ++a) {
      const double off = static_cast<double>(offline.counts[a]);
      if (off < online_only.allocation.n[a] - 1e-9 * scale) {
        dominates = false;
      }
      if (off > online_only.allocation.n[a] + 1e-9 * scale) {
        dominated = false;
      }
    }
    VerificationCheck c;
    c.name = "boundary-case";
    if (dominates) {
      c.residual = p1.allocation.total();
      c.pass = c.residual <= 1e-4 * scale;
      c.detail = "offline covers the online optimum; zero online confirmed";
    } else if (dominated) {
      double worst = 0.0;
      for (int a = 0; a < K; ++a) {
        const double expect = online_only.allocation.n[a] -
                              static_cast<double>(offline.counts[a]);
        worst = std::max(worst, std::abs(p1.allocation.n[a] - expect) /
                                    (1.0 + expect));
      }
      c.residual = worst;
      c.pass = worst <= 1e-3;
      c.detail =
          "offline below the online optimum; complement rule confirmed";
    } else {
      c.pass = true;
      c.detail = "mixed regime: neither component-wise bound applies";
    }
    report.add(std::move(c));
  }

  return report;
}

inline std::string format_report(const VerificationReport& report) {
  std::ostringstream os;
  for (const auto& c : report.checks) {
    os << (c.pass ? "[PASS] " : "[FAIL] ") << c.name;
    os << " (residual " << std::scientific << std::setprecision(3)
       << c.residual << std::defaultfloat << ")";
    if (!c.detail.empty()) os << " — " << c.detail;
    os << '\n';
  }
  os << (report.all_pass ? "all checks passed" : "SOME CHECKS FAILED")
     << '\n';
  return os.str();
}

}  // namespace ooband
