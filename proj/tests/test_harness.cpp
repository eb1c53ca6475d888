// Tests for experiment orchestration: offline-data generation, the seeded
// sweep driver, aggregation, CSV/SVG artifacts, config parsing, and the
// solver verification battery.
#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ooband/config.hpp"
#include "ooband/harness.hpp"
#include "ooband/types.hpp"

namespace {

using namespace ooband;

namespace fs = std::filesystem;

DistributionFamily gauss() {
  return DistributionFamily::gaussian_unit_variance();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// Strips the trailing wall_time_ms column, which is measured and therefore
// not reproducible across invocations.
std::string drop_last_column(const std::string& csv) {
  std::istringstream in(csv);
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line)) {
    const auto pos = line.rfind(',');
    out << line.substr(0, pos) << '\n';
  }
  return out.str();
}

size_t count_occurrences(const std::string& hay, const std::string& needle) {
  size_t count = 0;
  for (size_t pos = hay.find(needle); pos != std::string::npos;
       pos = hay.find(needle, pos + needle.size())) {
    ++count;
  }
  return count;
}

fs::path fresh_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("ooband_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("generate_offline implements the sampling policies",
          "[harness][offline]") {
  BanditInstance inst(gauss(), {0.5, 0.4, 0.3});

  SECTION("tau1 = 0 gives an empty dataset") {
    const auto g = generate_offline(OfflinePolicy::uniform(), 0, inst, 7);
    CHECK(g.dataset.counts == std::vector<long long>{0, 0, 0});
    CHECK(g.dataset.tau1() == 0);
    for (const auto& lst : g.samples) CHECK(lst.empty());
  }

  SECTION("uniform round-robin counts") {
    const auto g = generate_offline(OfflinePolicy::uniform(), 9, inst, 7);
    CHECK(g.dataset.counts == std::vector<long long>{3, 3, 3});
    const auto h = generate_offline(OfflinePolicy::uniform(), 10, inst, 7);
    CHECK(h.dataset.counts == std::vector<long long>{4, 3, 3});
  }

  SECTION("uniform-exclude-best skips the best arm") {
    const auto g =
        generate_offline(OfflinePolicy::uniform_exclude_best(), 8, inst, 7);
    CHECK(g.dataset.counts == std::vector<long long>{0, 4, 4});
  }

  SECTION("custom weights concentrate where told") {
    const auto g = generate_offline(
        OfflinePolicy::custom_weights({0.0, 1.0, 0.0}), 12, inst, 7);
    CHECK(g.dataset.counts == std::vector<long long>{0, 12, 0});
    CHECK(g.samples[1].size() == 12);
  }

  SECTION("custom weights draws a multinomial of the right total") {
    const auto g = generate_offline(
        OfflinePolicy::custom_weights({0.2, 0.5, 0.3}), 300, inst, 11);
    CHECK(g.dataset.tau1() == 300);
    for (int a = 0; a < 3; ++a) {
      CHECK(g.dataset.counts[a] ==
            static_cast<long long>(g.samples[a].size()));
    }
    // Loose sanity on the proportions.
    CHECK(g.dataset.counts[1] > g.dataset.counts[0]);
  }

  SECTION("sample lists are consistent with the dataset sums") {
    const auto g = generate_offline(OfflinePolicy::uniform(), 25, inst, 42);
    for (int a = 0; a < 3; ++a) {
      double sum = 0.0;
      for (double r : g.samples[a]) sum += r;
      CHECK(g.dataset.reward_sums[a] == Catch::Approx(sum).margin(1e-12));
    }
  }

  SECTION("datasets nest as tau1 grows with the same seed") {
    const auto small = generate_offline(OfflinePolicy::uniform(), 6, inst, 3);
    const auto large =
        generate_offline(OfflinePolicy::uniform(), 12, inst, 3);
    for (int a = 0; a < 3; ++a) {
      REQUIRE(small.samples[a].size() <= large.samples[a].size());
      for (size_t i = 0; i < small.samples[a].size(); ++i) {
        CHECK(small.samples[a][i] == large.samples[a][i]);
      }
    }
  }

  SECTION("input validation") {
    CHECK_THROWS_AS(generate_offline(OfflinePolicy::uniform(), -1, inst, 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(
        generate_offline(OfflinePolicy::custom_weights({0.5, 0.5}), 4, inst,
                         1),
        std::invalid_argument);  // wrong length
    CHECK_THROWS_AS(
        generate_offline(OfflinePolicy::custom_weights({0.5, 0.2, 0.2}), 4,
                         inst, 1),
        std::invalid_argument);  // not a simplex point
  }
}

TEST_CASE("sweep_trial_seed separates cells deterministically",
          "[harness][seed]") {
  const auto uni = OfflinePolicy::uniform();
  const auto exb = OfflinePolicy::uniform_exclude_best();
  const auto s = sweep_trial_seed(99, AlgorithmKind::BatchTas, uni, 0);
  CHECK(s == sweep_trial_seed(99, AlgorithmKind::BatchTas, uni, 0));
  CHECK(s != sweep_trial_seed(100, AlgorithmKind::BatchTas, uni, 0));
  CHECK(s != sweep_trial_seed(99, AlgorithmKind::LucbHoeffding, uni, 0));
  CHECK(s != sweep_trial_seed(99, AlgorithmKind::BatchTas, exb, 0));
  CHECK(s != sweep_trial_seed(99, AlgorithmKind::BatchTas, uni, 1));
}

TEST_CASE("run_trial produces records and absorbs budget exhaustion",
          "[harness][sweep]") {
  ExperimentConfig cfg;
  cfg.family = gauss();
  cfg.means = {2.0, 0.0};
  cfg.delta = 0.05;
  cfg.trials = 1;
  cfg.master_seed = 5;

  SECTION("an easy instance resolves correctly") {
    const auto rec = run_trial(cfg, AlgorithmKind::BatchTas, 0, 0);
    CHECK(rec.algorithm == "tas");
    CHECK(rec.tau1 == 0);
    CHECK(rec.correct);
    CHECK(rec.recommended_arm == 0);
    CHECK(rec.stop_time >= 2);
    CHECK(rec.wall_time_ms >= 0.0);
  }

  SECTION("budget exhaustion becomes a failed row") {
    cfg.means = {0.1, 0.0999};  // nearly indistinguishable arms
    cfg.delta = 0.001;
    cfg.max_steps = 10;
    const auto rec = run_trial(cfg, AlgorithmKind::BatchTas, 0, 0);
    CHECK(rec.recommended_arm == -1);
    CHECK_FALSE(rec.correct);
    CHECK(rec.stop_time == 10);
  }

  SECTION("the regret algorithm is rejected") {
    CHECK_THROWS_AS(run_trial(cfg, AlgorithmKind::UcbRegret, 0, 0),
                    std::invalid_argument);
  }
}

TEST_CASE("aggregate_records computes order-independent statistics",
          "[harness][aggregate]") {
  std::vector<TrialRecord> records;
  const std::vector<long long> stops = {10, 20, 30, 40};
  for (int i = 0; i < 4; ++i) {
    TrialRecord r;
    r.algorithm = "tas";
    r.tau1 = 100;
    r.trial = i;
    r.stop_time = stops[static_cast<size_t>(i)];
    r.correct = i != 2;  // one error
    records.push_back(r);
  }
  TrialRecord other;
  other.algorithm = "lucb-h";
  other.tau1 = 0;
  other.stop_time = 7;
  other.correct = true;
  records.push_back(other);

  const auto stats = aggregate_records(records);
  REQUIRE(stats.size() == 2);
  // Sorted by (algorithm, tau1): lucb-h first.
  CHECK(stats[0].algorithm == "lucb-h");
  CHECK(stats[0].trials == 1);
  CHECK(stats[0].mean_stop == Catch::Approx(7.0));
  CHECK(stats[0].std_stop == 0.0);

  const auto& s = stats[1];
  CHECK(s.algorithm == "tas");
  CHECK(s.tau1 == 100);
  CHECK(s.trials == 4);
  CHECK(s.mean_stop == Catch::Approx(25.0));
  CHECK(s.std_stop == Catch::Approx(std::sqrt(500.0 / 3.0)).margin(1e-12));
  CHECK(s.q10 == Catch::Approx(13.0).margin(1e-12));
  CHECK(s.q50 == Catch::Approx(25.0).margin(1e-12));
  CHECK(s.q90 == Catch::Approx(37.0).margin(1e-12));
  CHECK(s.error_rate == Catch::Approx(0.25));
  CHECK(s.q10 <= s.q50);
  CHECK(s.q50 <= s.q90);

  // Shuffling completion order changes nothing.
  std::mt19937 rng(3);
  auto shuffled = records;
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  const auto again = aggregate_records(shuffled);
  REQUIRE(again.size() == stats.size());
  for (size_t i = 0; i < stats.size(); ++i) {
    CHECK(again[i].algorithm == stats[i].algorithm);
    CHECK(again[i].tau1 == stats[i].tau1);
    CHECK(again[i].mean_stop == stats[i].mean_stop);
    CHECK(again[i].std_stop == stats[i].std_stop);
    CHECK(again[i].q10 == stats[i].q10);
    CHECK(again[i].q90 == stats[i].q90);
    CHECK(again[i].error_rate == stats[i].error_rate);
  }
}

TEST_CASE("CSV writers use the fixed schemas", "[harness][csv]") {
  TrialRecord r;
  r.algorithm = "tas";
  r.tau1 = 5;
  r.trial = 2;
  r.seed = 123456789;
  r.stop_time = 42;
  r.recommended_arm = 1;
  r.correct = true;
  r.wall_time_ms = 1.5;
  const std::string csv = trials_csv({r});
  CHECK(csv ==
        "algorithm,tau1,trial,seed,stop_time,recommended_arm,correct,"
        "wall_time_ms\n"
        "tas,5,2,123456789,42,1,1,1.500\n");

  AggregateStats s;
  s.algorithm = "tas";
  s.tau1 = 5;
  s.trials = 2;
  s.mean_stop = 10.5;
  s.std_stop = 1.0;
  s.q10 = 9.0;
  s.q50 = 10.5;
  s.q90 = 12.0;
  s.error_rate = 0.5;
  const std::string agg = aggregates_csv({s});
  CHECK(agg ==
        "algorithm,tau1,trials,mean_stop,std_stop,q10,q50,q90,error_rate\n"
        "tas,5,2,10.500000,1.000000,9.000000,10.500000,12.000000,"
        "0.500000\n");
}

TEST_CASE("run_sweep is reproducible and writes its artifacts",
          "[harness][sweep]") {
  ExperimentConfig cfg;
  cfg.family = gauss();
  cfg.means = {1.0, 0.0};
  cfg.delta = 0.05;
  cfg.offline_policy = OfflinePolicy::uniform();
  cfg.offline_sizes = {0, 50};
  cfg.trials = 3;
  cfg.algorithms = {AlgorithmKind::BatchTas, AlgorithmKind::LucbHoeffding};
  cfg.master_seed = 2468;
  const auto dir = fresh_dir("sweep");
  cfg.output_dir = dir.string();

  const auto sweep = run_sweep(cfg);
  CHECK(sweep.records.size() == 2 * 2 * 3);
  CHECK(sweep.aggregates.size() == 4);
  REQUIRE(sweep.files.size() == 3);
  CHECK(fs::exists(dir / "trials.csv"));
  CHECK(fs::exists(dir / "aggregates.csv"));
  CHECK(fs::exists(dir / "stop_time_uniform.svg"));

  // Identical config and master seed reproduce every record except the
  // measured wall time.
  const auto again = run_sweep(cfg, /*write_outputs=*/false);
  REQUIRE(again.records.size() == sweep.records.size());
  CHECK(drop_last_column(trials_csv(again.records)) ==
        drop_last_column(trials_csv(sweep.records)));
  CHECK(aggregates_csv(again.aggregates) ==
        aggregates_csv(sweep.aggregates));

  // Every cell is within the allowed error rate (here: all correct).
  for (const auto& s : sweep.aggregates) {
    CHECK(s.error_rate <= cfg.delta + 3.0 * std::sqrt(cfg.delta / 3.0));
    CHECK(s.q10 <= s.mean_stop);
    CHECK(s.mean_stop <= s.q90);
  }

  SECTION("offline data shortens tas runs on paired seeds") {
    for (const auto& s : sweep.aggregates) {
      if (s.algorithm != "tas") continue;
      if (s.tau1 == 0) continue;
      const auto base = std::find_if(
          sweep.aggregates.begin(), sweep.aggregates.end(),
          [](const AggregateStats& a) {
            return a.algorithm == "tas" && a.tau1 == 0;
          });
      REQUIRE(base != sweep.aggregates.end());
      CHECK(s.mean_stop < base->mean_stop);
    }
  }

  SECTION("the regret algorithm cannot be swept") {
    cfg.algorithms = {AlgorithmKind::UcbRegret};
    CHECK_THROWS_AS(run_sweep(cfg), std::invalid_argument);
  }
}

TEST_CASE("emit_plots renders one labeled series per algorithm",
          "[harness][plots]") {
  SECTION("empty aggregates produce no files") {
    const auto dir = fresh_dir("plots_empty");
    CHECK(emit_plots({}, dir.string(), "uniform").empty());
    CHECK(fs::is_empty(dir));
  }

  SECTION("two series with bands") {
    std::vector<AggregateStats> stats;
    for (const std::string algo : {"tas", "lucb-h"}) {
      for (long long tau1 : {0LL, 100LL, 200LL}) {
        AggregateStats s;
        s.algorithm = algo;
        s.tau1 = tau1;
        s.trials = 10;
        s.mean_stop = algo == "tas" ? 500.0 - static_cast<double>(tau1)
                                    : 2500.0 - static_cast<double>(tau1);
        s.q10 = s.mean_stop - 50.0;
        s.q50 = s.mean_stop;
        s.q90 = s.mean_stop + 80.0;
        stats.push_back(s);
      }
    }
    const auto dir = fresh_dir("plots");
    const auto files = emit_plots(stats, dir.string(), "uniform");
    REQUIRE(files.size() == 1);
    const std::string svg = slurp(files[0]);
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(count_occurrences(svg, "class=\"series\"") == 2);
    CHECK(count_occurrences(svg, "class=\"band\"") == 2);
    CHECK(svg.find(">tas<") != std::string::npos);
    CHECK(svg.find(">lucb-h<") != std::string::npos);
  }
}

TEST_CASE("configs round-trip through JSON", "[harness][config]") {
  ExperimentConfig cfg;
  cfg.family = DistributionFamily::bernoulli();
  cfg.means = {0.8, 0.5, 0.4};
  cfg.delta = 0.01;
  cfg.offline_policy = OfflinePolicy::custom_weights({0.2, 0.3, 0.5});
  cfg.offline_sizes = {0, 10, 100};
  cfg.trials = 7;
  cfg.algorithms = {AlgorithmKind::BatchTas, AlgorithmKind::Replay};
  cfg.master_seed = 0xDEADBEEFULL;
  cfg.output_dir = "results";
  cfg.max_steps = 123456;

  const auto j = config_to_json(cfg);
  const auto back = config_from_json(j);
  CHECK(back.family.is_bernoulli());
  CHECK(back.means == cfg.means);
  CHECK(back.delta == cfg.delta);
  CHECK(back.offline_policy.kind == cfg.offline_policy.kind);
  CHECK(back.offline_policy.weights == cfg.offline_policy.weights);
  CHECK(back.offline_sizes == cfg.offline_sizes);
  CHECK(back.trials == cfg.trials);
  CHECK(back.algorithms == cfg.algorithms);
  CHECK(back.master_seed == cfg.master_seed);
  CHECK(back.output_dir == cfg.output_dir);
  CHECK(back.max_steps == cfg.max_steps);

  SECTION("load_config reads a file") {
    const auto dir = fresh_dir("config");
    const auto path = dir / "experiment.json";
    std::ofstream(path) << j.dump(2);
    const auto loaded = load_config(path.string());
    CHECK(loaded.means == cfg.means);
    CHECK(loaded.master_seed == cfg.master_seed);
    CHECK_THROWS_AS(load_config((dir / "missing.json").string()),
                    std::runtime_error);
  }
}

TEST_CASE("config validation rejects malformed experiments",
          "[harness][config]") {
  ExperimentConfig cfg;
  cfg.family = gauss();
  cfg.means = {0.5, 0.0};
  cfg.delta = 0.05;

  auto expect_invalid = [](ExperimentConfig c) {
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  };

  cfg.validate();  // baseline is fine

  {
    auto c = cfg;
    c.trials = 0;
    expect_invalid(c);
  }
  {
    auto c = cfg;
    c.delta = 1.5;
    expect_invalid(c);
  }
  {
    auto c = cfg;
    c.offline_sizes = {};
    expect_invalid(c);
  }
  {
    auto c = cfg;
    c.offline_sizes = {-5};
    expect_invalid(c);
  }
  {
    auto c = cfg;
    c.max_steps = 1;
    expect_invalid(c);
  }
  {
    auto c = cfg;
    c.means = {0.5, 0.5};  // tied best arm
    expect_invalid(c);
  }
  {
    auto c = cfg;
    c.offline_policy = OfflinePolicy::custom_weights({0.9, 0.2});
    expect_invalid(c);
  }

  CHECK(algorithm_from_name("tas") == AlgorithmKind::BatchTas);
  CHECK(algorithm_from_name("lucb-h") == AlgorithmKind::LucbHoeffding);
  CHECK(algorithm_from_name("lucb-kl") == AlgorithmKind::LucbKl);
  CHECK(algorithm_from_name("replay") == AlgorithmKind::Replay);
  CHECK(algorithm_from_name("ucb-regret") == AlgorithmKind::UcbRegret);
  CHECK_THROWS_AS(algorithm_from_name("nope"), std::invalid_argument);
  for (AlgorithmKind a :
       {AlgorithmKind::BatchTas, AlgorithmKind::LucbHoeffding,
        AlgorithmKind::LucbKl, AlgorithmKind::Replay,
        AlgorithmKind::UcbRegret}) {
    CHECK(algorithm_from_name(algorithm_name(a)) == a);
  }
}

TEST_CASE("verify_instance audits the solver", "[harness][verify]") {
  BanditInstance inst(gauss(), {1.0, 0.0, -1.0});

  SECTION("mixed offline regime passes the battery") {
    OfflineDataset off = OfflineDataset::empty(3);
    off.counts = {30, 10, 10};
    off.reward_sums = {30.0, 0.0, -10.0};
    const auto report = verify_instance(inst, off, 0.01);
    CHECK(report.all_pass);
    REQUIRE(report.checks.size() == 3);
    CHECK(report.checks[0].name == "allocation-optimality");
    CHECK(report.checks[0].residual <= 1e-4);
    CHECK(report.checks[1].name == "normalized-round-trip");
    CHECK(report.checks[1].residual <= 1e-3);
    const std::string text = format_report(report);
    CHECK(text.find("[PASS]") != std::string::npos);
    CHECK(text.find("[FAIL]") == std::string::npos);
    CHECK(text.find("all checks passed") != std::string::npos);
  }

  SECTION("no offline data hits the complement rule") {
    const auto report =
        verify_instance(inst, OfflineDataset::empty(3), 0.01);
    CHECK(report.all_pass);
    CHECK(report.checks[2].detail.find("complement rule") !=
          std::string::npos);
  }

  SECTION("abundant offline data yields the zero-online case") {
    OfflineDataset off = OfflineDataset::empty(3);
    off.counts = {100000, 100000, 100000};
    off.reward_sums = {100000.0, 0.0, -100000.0};
    const auto report = verify_instance(inst, off, 0.01);
    CHECK(report.all_pass);
    CHECK(report.checks[2].detail.find("zero online") != std::string::npos);
  }
}
