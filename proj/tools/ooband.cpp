// Command-line front end: solve the allocation problem, run a single
// algorithm, sweep a Monte-Carlo experiment, or verify the solver on a
// configured instance. See the README for the config schema.

#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ooband/baselines.hpp"
#include "ooband/config.hpp"
#include "ooband/harness.hpp"
#include "ooband/oracle.hpp"
#include "ooband/tas.hpp"
#include "ooband/types.hpp"

namespace {

using nlohmann::json;

// OOBAND_OUTPUT_DIR (when set) wins over the config's output_dir.
std::string resolve_output_dir(const ooband::ExperimentConfig& cfg) {
  if (const char* env = std::getenv("OOBAND_OUTPUT_DIR")) {
    if (env[0] != '\0') return env;
  }
  return cfg.output_dir;
}

// Every subcommand echoes its flags next to whatever it wrote.
void write_manifest(const std::string& output_dir,
                    const std::string& subcommand, const json& flags,
                    const ooband::ExperimentConfig& cfg) {
  std::filesystem::create_directories(output_dir);
  json manifest;
  manifest["subcommand"] = subcommand;
  manifest["flags"] = flags;
  manifest["resolved_config"] = ooband::config_to_json(cfg);
  const auto path =
      std::filesystem::path(output_dir) / "run-manifest.json";
  std::ofstream out(path);
  out << manifest.dump(2) << '\n';
}

std::vector<long long> parse_counts(const std::string& text, int K) {
  std::vector<long long> counts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    counts.push_back(std::stoll(item));
  }
  if (static_cast<int>(counts.size()) != K) {
    throw std::invalid_argument(
        "--offline expects " + std::to_string(K) +
        " comma-separated counts, got " + std::to_string(counts.size()));
  }
  return counts;
}

int cmd_solve(const ooband::ExperimentConfig& cfg,
              const std::string& offline_text, const json& flags) {
  const auto instance = cfg.instance();
  const int K = instance.K();
  std::vector<double> offline(K, 0.0);
  ooband::OfflineDataset dataset = ooband::OfflineDataset::empty(K);
  if (!offline_text.empty()) {
    const auto counts = parse_counts(offline_text, K);
    for (int a = 0; a < K; ++a) {
      if (counts[a] < 0) {
        throw std::invalid_argument("--offline counts must be >= 0");
      }
      offline[a] = static_cast<double>(counts[a]);
      dataset.counts[a] = counts[a];
      dataset.reward_sums[a] =
          static_cast<double>(counts[a]) * instance.mean(a);
    }
  }

  const auto p1 = ooband::solve_P1(instance, offline, cfg.delta);
  ooband::SolverConfig solver;
  solver.threshold = std::log(1.0 / (2.4 * cfg.delta));
  const auto audit =
      ooband::check_optimality(instance, dataset, p1.allocation, solver);
  const auto normalized = ooband::solve_P3(
      instance, dataset.proportions(), dataset.tau1(), cfg.delta);

  std::cout << std::fixed << std::setprecision(6);
  std::cout << "instance: K=" << K << " family="
            << (instance.family().is_bernoulli() ? "bernoulli" : "gaussian")
            << " delta=" << cfg.delta << "\n";
  std::cout << "threshold log(1/(2.4*delta)) = " << solver.threshold << "\n";
  std::cout << "optimal online allocation:\n";
  for (int a = 0; a < K; ++a) {
    std::cout << "  arm " << a << ": mean=" << instance.mean(a)
              << " offline=" << offline[a] << " online=" << p1.allocation.n[a]
              << "\n";
  }
  std::cout << "total online T* = " << p1.optimal_total << "\n";
  std::cout << "offline fraction z* = " << normalized.z << ", w* = (";
  for (int a = 0; a < K; ++a) {
    std::cout << normalized.w[a] << (a + 1 < K ? ", " : ")\n");
  }
  std::cout << "optimality: max violation = " << std::scientific
            << std::setprecision(3) << audit.max_constraint_violation
            << std::defaultfloat << ", active set size = "
            << audit.active_set_A1.size() << "\n";

  const std::string out_dir = resolve_output_dir(cfg);
  write_manifest(out_dir, "solve", flags, cfg);
  return 0;
}

int cmd_run(const ooband::ExperimentConfig& cfg, const std::string& algo_name,
            std::uint64_t seed, long long tau1, long long horizon,
            const std::string& trace_path, const json& flags) {
  const auto algo = ooband::algorithm_from_name(algo_name);
  const auto instance = cfg.instance();
  const std::string out_dir = resolve_output_dir(cfg);
  write_manifest(out_dir, "run", flags, cfg);

  if (algo == ooband::AlgorithmKind::UcbRegret) {
    if (!trace_path.empty()) {
      throw std::invalid_argument("--trace is only supported for tas runs");
    }
    const auto offline = ooband::generate_offline(
        cfg.offline_policy, tau1, instance,
        ooband::mix_seed(seed, ooband::kOfflineStreamTag));
    const auto res = ooband::oo_ucb_regret_run(
        instance, offline.dataset, horizon,
        ooband::mix_seed(seed, ooband::kOnlineStreamTag));
    std::cout << "algorithm,tau1,horizon,seed,regret,pulls\n";
    std::cout << algo_name << ',' << tau1 << ',' << horizon << ',' << seed
              << ',' << std::fixed << std::setprecision(3) << res.regret
              << ',';
    for (size_t a = 0; a < res.pulls.size(); ++a) {
      std::cout << res.pulls[a]
                << (a + 1 < res.pulls.size() ? ";" : "\n");
    }
    return 0;
  }

  if (!trace_path.empty() && algo != ooband::AlgorithmKind::BatchTas) {
    throw std::invalid_argument("--trace is only supported for tas runs");
  }

  ooband::TrialRecord rec;
  if (!trace_path.empty()) {
    // Traced run: drive tas directly so the per-step statistic is kept.
    const auto offline = ooband::generate_offline(
        cfg.offline_policy, tau1, instance,
        ooband::mix_seed(seed, ooband::kOfflineStreamTag));
    ooband::RunOptions options;
    options.max_steps = cfg.max_steps;
    options.record_trace = true;
    const auto result = ooband::tas_run(
        instance, offline.dataset, cfg.delta,
        ooband::mix_seed(seed, ooband::kOnlineStreamTag), options);
    rec.algorithm = algo_name;
    rec.tau1 = tau1;
    rec.seed = seed;
    rec.stop_time = result.stop_time;
    rec.recommended_arm = result.recommended_arm;
    rec.correct = result.correct;
    std::ofstream trace(trace_path);
    if (!trace) {
      throw std::runtime_error("cannot write trace file '" + trace_path +
                               "'");
    }
    trace << "t,arm,statistic,threshold\n";
    trace << std::fixed << std::setprecision(6);
    if (result.trace.has_value()) {
      for (const auto& row : *result.trace) {
        trace << row.t << ',' << row.arm << ',' << row.statistic << ','
              << row.threshold << '\n';
      }
    }
  } else {
    // Reuse the sweep's trial runner with the caller's seed standing in
    // for the derived child seed.
    rec = ooband::run_trial_with_seed(cfg, algo, tau1, seed, /*trial=*/0);
  }

  std::cout << "algorithm,tau1,trial,seed,stop_time,recommended_arm,correct,"
               "wall_time_ms\n";
  std::cout << rec.algorithm << ',' << rec.tau1 << ',' << rec.trial << ','
            << rec.seed << ',' << rec.stop_time << ',' << rec.recommended_arm
            << ',' << (rec.correct ? 1 : 0) << ',' << std::fixed
            << std::setprecision(3) << rec.wall_time_ms << "\n";
  return 0;
}

int cmd_sweep(const ooband::ExperimentConfig& cfg, const json& flags) {
  ooband::ExperimentConfig resolved = cfg;
  resolved.output_dir = resolve_output_dir(cfg);
  const auto sweep = ooband::run_sweep(resolved);
  write_manifest(resolved.output_dir, "sweep", flags, resolved);

  std::cout << "wrote:\n";
  for (const auto& f : sweep.files) std::cout << "  " << f << "\n";
  std::cout << ooband::aggregates_csv(sweep.aggregates);
  return 0;
}

int cmd_verify(const ooband::ExperimentConfig& cfg, long long tau1,
               const json& flags) {
  const auto instance = cfg.instance();
  const auto offline = ooband::generate_offline(
      cfg.offline_policy, tau1, instance,
      ooband::mix_seed(cfg.master_seed, ooband::kOfflineStreamTag));
  const auto report =
      ooband::verify_instance(instance, offline.dataset, cfg.delta);
  std::cout << "verify: tau1=" << tau1 << " policy="
            << cfg.offline_policy.name() << " delta=" << cfg.delta << "\n";
  std::cout << ooband::format_report(report);
  const std::string out_dir = resolve_output_dir(cfg);
  write_manifest(out_dir, "verify", flags, cfg);
  return report.all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Fixed-confidence best-arm identification with offline and online "
      "data: solver, samplers, and experiment harness"};
  app.require_subcommand(1);

  std::string config_path;
  double delta_override = -1.0;
  int trials_override = -1;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "experiment config (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--delta", delta_override,
                    "override the config's confidence level");
  };

  auto* solve = app.add_subcommand(
      "solve", "solve the optimal-allocation problem for the instance");
  std::string offline_text;
  add_common(solve);
  solve->add_option("--offline", offline_text,
                    "comma-separated offline counts (default: all zero)");

  auto* run = app.add_subcommand("run", "run one algorithm once");
  std::string algo_name = "tas";
  std::uint64_t seed = 1;
  long long tau1 = 0;
  long long horizon = 10000;
  std::string trace_path;
  add_common(run);
  run->add_option("--algo", algo_name,
                  "tas|lucb-h|lucb-kl|replay|ucb-regret")
      ->required();
  run->add_option("--seed", seed, "trial seed")->required();
  run->add_option("--tau1", tau1, "offline samples to generate");
  run->add_option("--horizon", horizon, "horizon for ucb-regret");
  run->add_option("--trace", trace_path,
                  "write the per-step statistic CSV (tas only)");

  auto* sweep = app.add_subcommand(
      "sweep", "Monte-Carlo sweep over offline sizes; writes CSV + plots");
  add_common(sweep);
  sweep->add_option("--trials", trials_override,
                    "override the config's trial count");

  auto* verify = app.add_subcommand(
      "verify", "solver invariant battery; nonzero exit on failure");
  long long verify_tau1 = -1;
  add_common(verify);
  verify->add_option("--tau1", verify_tau1,
                     "offline size (default: first configured size)");

  CLI11_PARSE(app, argc, argv);

  try {
    ooband::ExperimentConfig cfg = ooband::load_config(config_path);
    if (delta_override > 0.0) cfg.delta = delta_override;
    if (trials_override > 0) cfg.trials = trials_override;
    cfg.validate();

    json flags;
    flags["config"] = config_path;
    if (delta_override > 0.0) flags["delta"] = delta_override;
    if (trials_override > 0) flags["trials"] = trials_override;

    if (solve->parsed()) {
      if (!offline_text.empty()) flags["offline"] = offline_text;
      return cmd_solve(cfg, offline_text, flags);
    }
    if (run->parsed()) {
      flags["algo"] = algo_name;
      flags["seed"] = seed;
      flags["tau1"] = tau1;
      flags["horizon"] = horizon;
      if (!trace_path.empty()) flags["trace"] = trace_path;
      return cmd_run(cfg, algo_name, seed, tau1, horizon, trace_path, flags);
    }
    if (sweep->parsed()) {
      return cmd_sweep(cfg, flags);
    }
    if (verify->parsed()) {
      const long long t1 =
          verify_tau1 >= 0 ? verify_tau1 : cfg.offline_sizes.front();
      flags["tau1"] = t1;
      return cmd_verify(cfg, t1, flags);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
