#pragma once
// Experiment configuration: the JSON schema consumed by the CLI and the
// sweep driver. See the README for a worked example.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "ooband/spef.hpp"
#include "ooband/types.hpp"

namespace ooband {

// How the offline dataset is produced before the online phase starts.
struct OfflinePolicy {
  enum class Kind { Uniform, UniformExcludeBest, CustomWeights };

  Kind kind = Kind::Uniform;
  std::vector<double> weights;  // used by CustomWeights only

  static OfflinePolicy uniform() { return OfflinePolicy{}; }

  static OfflinePolicy uniform_exclude_best() {
    OfflinePolicy p;
    p.kind = Kind::UniformExcludeBest;
    return p;
  }

  static OfflinePolicy custom_weights(std::vector<double> w) {
    OfflinePolicy p;
    p.kind = Kind::CustomWeights;
    p.weights = std::move(w);
    return p;
  }

  std::string name() const {
    switch (kind) {
      case Kind::Uniform:
        return "uniform";
      case Kind::UniformExcludeBest:
        return "uniform_exclude_best";
      case Kind::CustomWeights:
        return "custom_weights";
    }
    throw std::logic_error("ooband::OfflinePolicy: unknown kind");
  }

  void validate(int K) const {
    if (kind == Kind::UniformExcludeBest && K < 2) {
      throw std::invalid_argument(
          "ooband::OfflinePolicy: uniform_exclude_best needs a non-best arm");
    }
    if (kind == Kind::CustomWeights) {
      if (static_cast<int>(weights.size()) != K) {
        throw std::invalid_argument(
            "ooband::OfflinePolicy: custom weights must have one entry per "
            "arm");
      }
      double sum = 0.0;
      for (double w : weights) {
        if (!(w >= 0.0)) {
          throw std::invalid_argument(
              "ooband::OfflinePolicy: weights must be nonnegative");
        }
        sum += w;
      }
      if (std::abs(sum - 1.0) > 1e-9) {
        throw std::invalid_argument(
            "ooband::OfflinePolicy: weights must sum to 1");
      }
    }
  }
};

// Algorithms the sweep driver and CLI know how to run. UcbRegret is a
// regret-minimization run with a fixed horizon; it has no stopping time
// and is therefore accepted by `run` but not by `sweep`.
enum class AlgorithmKind {
  BatchTas = 1,
  LucbHoeffding = 2,
  LucbKl = 3,
  Replay = 4,
  UcbRegret = 5,
};

inline std::string algorithm_name(AlgorithmKind a) {
  switch (a) {
    case AlgorithmKind::BatchTas:
      return "tas";
    case AlgorithmKind::LucbHoeffding:
      return "lucb-h";
    case AlgorithmKind::LucbKl:
      return "lucb-kl";
    case AlgorithmKind::Replay:
      return "replay";
    case AlgorithmKind::UcbRegret:
      return "ucb-regret";
  }
  throw std::logic_error("ooband::algorithm_name: unknown algorithm");
}

inline AlgorithmKind algorithm_from_name(const std::string& name) {
  if (name == "tas") return AlgorithmKind::BatchTas;
  if (name == "lucb-h") return AlgorithmKind::LucbHoeffding;
  if (name == "lucb-kl") return AlgorithmKind::LucbKl;
  if (name == "replay") return AlgorithmKind::Replay;
  if (name == "ucb-regret") return AlgorithmKind::UcbRegret;
  throw std::invalid_argument("ooband: unknown algorithm '" + name +
                              "' (expected tas|lucb-h|lucb-kl|replay|"
                              "ucb-regret)");
}

struct ExperimentConfig {
  DistributionFamily family = DistributionFamily::gaussian_unit_variance();
  std::vector<double> means;
  double delta = 0.05;
  OfflinePolicy offline_policy;
  std::vector<long long> offline_sizes = {0};
  int trials = 1;
  std::vector<AlgorithmKind> algorithms = {AlgorithmKind::BatchTas};
  std::uint64_t master_seed = 1;
  std::string output_dir = "out";
  long long max_steps = 10000000;

  BanditInstance instance() const { return BanditInstance(family, means); }

  void validate() const {
    BanditInstance inst(family, means);  // checks K >= 2, unique best
    if (!(delta > 0.0 && delta < 1.0)) {
      throw std::invalid_argument(
          "ooband::ExperimentConfig: delta must be in (0, 1)");
    }
    if (trials < 1) {
      throw std::invalid_argument(
          "ooband::ExperimentConfig: trials must be >= 1");
    }
    if (offline_sizes.empty()) {
      throw std::invalid_argument(
          "ooband::ExperimentConfig: offline_sizes must be nonempty");
    }
    for (long long tau1 : offline_sizes) {
      if (tau1 < 0) {
        throw std::invalid_argument(
            "ooband::ExperimentConfig: offline sizes must be >= 0");
      }
    }
    if (max_steps < inst.K()) {
      throw std::invalid_argument(
          "ooband::ExperimentConfig: max_steps must cover initialization");
    }
    offline_policy.validate(inst.K());
  }
};

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
  ExperimentConfig cfg;
  const std::string family = j.at("family").get<std::string>();
  if (family == "bernoulli") {
    cfg.family = DistributionFamily::bernoulli();
  } else if (family == "gaussian") {
    cfg.family = DistributionFamily::gaussian_unit_variance();
  } else {
    throw std::invalid_argument(
        "ooband::config_from_json: family must be 'bernoulli' or "
        "'gaussian'");
  }
  cfg.means = j.at("means").get<std::vector<double>>();
  cfg.delta = j.at("delta").get<double>();

  if (j.contains("offline_policy")) {
    const auto& p = j.at("offline_policy");
    const std::string kind = p.at("kind").get<std::string>();
    if (kind == "uniform") {
      cfg.offline_policy = OfflinePolicy::uniform();
    } else if (kind == "uniform_exclude_best") {
      cfg.offline_policy = OfflinePolicy::uniform_exclude_best();
    } else if (kind == "custom_weights") {
      cfg.offline_policy = OfflinePolicy::custom_weights(
          p.at("weights").get<std::vector<double>>());
    } else {
      throw std::invalid_argument(
          "ooband::config_from_json: offline_policy.kind must be 'uniform', "
          "'uniform_exclude_best', or 'custom_weights'");
    }
  }
  if (j.contains("offline_sizes")) {
    cfg.offline_sizes = j.at("offline_sizes").get<std::vector<long long>>();
  }
  if (j.contains("trials")) cfg.trials = j.at("trials").get<int>();
  if (j.contains("algorithms")) {
    cfg.algorithms.clear();
    for (const auto& name : j.at("algorithms")) {
      cfg.algorithms.push_back(
          algorithm_from_name(name.get<std::string>()));
    }
  }
  if (j.contains("master_seed")) {
    cfg.master_seed = j.at("master_seed").get<std::uint64_t>();
  }
  if (j.contains("output_dir")) {
    cfg.output_dir = j.at("output_dir").get<std::string>();
  }
  if (j.contains("max_steps")) {
    cfg.max_steps = j.at("max_steps").get<long long>();
  }
  cfg.validate();
  return cfg;
}

inline nlohmann::json config_to_json(const ExperimentConfig& cfg) {
  nlohmann::json j;
  j["family"] = cfg.family.is_bernoulli() ? "bernoulli" : "gaussian";
  j["means"] = cfg.means;
  j["delta"] = cfg.delta;
  j["offline_policy"] = {{"kind", cfg.offline_policy.name()}};
  if (cfg.offline_policy.kind == OfflinePolicy::Kind::CustomWeights) {
    j["offline_policy"]["weights"] = cfg.offline_policy.weights;
  }
  j["offline_sizes"] = cfg.offline_sizes;
  j["trials"] = cfg.trials;
  nlohmann::json algos = nlohmann::json::array();
  for (AlgorithmKind a : cfg.algorithms) algos.push_back(algorithm_name(a));
  j["algorithms"] = algos;
  j["master_seed"] = cfg.master_seed;
  j["output_dir"] = cfg.output_dir;
  j["max_steps"] = cfg.max_steps;
  return j;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("ooband::load_config: cannot open '" + path +
                             "'");
  }
  nlohmann::json j;
  in >> j;
  return config_from_json(j);
}

}  // namespace ooband
