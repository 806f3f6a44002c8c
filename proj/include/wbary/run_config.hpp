#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "wbary/async_sim.hpp"
#include "wbary/presets.hpp"

namespace wbary {

enum class ProblemPreset { gaussian, discrete, mnist, quadratic };
std::string_view to_string(ProblemPreset p);
ProblemPreset problem_preset_from_string(std::string_view name);

struct DiscreteProblem {
  Matrix grid;                  // d x n support points
  std::vector<Matrix> atoms;    // per measure, d x K
  std::vector<Vector> weights;  // per measure, length K

  bool operator==(const DiscreteProblem&) const;
};

struct MnistProblem {
  std::string images;
  std::string labels;
  int digit = 3;
  bool keep_zero_pixels = false;

  bool operator==(const MnistProblem&) const = default;
};

struct QuadraticProblem {
  double mu = 1.0;
  double noise_std = 0.0;

  bool operator==(const QuadraticProblem&) const = default;
};

struct ProblemConfig {
  ProblemPreset preset = ProblemPreset::gaussian;
  std::optional<int> n = 50;           // gaussian and quadratic only
  std::optional<double> beta = 1.0;    // measure presets only
  std::uint64_t seed = 1;
  GaussianRanges gaussian;
  DiscreteProblem discrete;
  MnistProblem mnist;
  QuadraticProblem quadratic;

  bool operator==(const ProblemConfig&) const = default;
};

struct AlgorithmConfig {
  AlgorithmVariant variant = AlgorithmVariant::a2dwb;
  std::optional<double> gamma;     // nullopt means "auto"
  std::optional<int> tau_assumed;  // auto-gamma staleness; default derived
  std::optional<int> batch = 10;   // nullopt means "auto"
  double batch_epsilon = 1.0;

  bool operator==(const AlgorithmConfig&) const = default;
};

struct SimBlock {
  double horizon_s = 200.0;
  ActivationMode activation_mode = ActivationMode::permutation;
  double interval_s = 0.2;
  CommModel delay;
  std::uint64_t master_seed = 1;

  bool operator==(const SimBlock&) const;
};

struct RunConfig {
  TopologySpec topology{TopologyKind::cycle, 50, std::nullopt, std::nullopt};
  ProblemConfig problem;
  AlgorithmConfig algorithm;
  SimBlock sim;
  EvalConfig eval;

  /// Field-level checks; throws ConfigError naming the offending field.
  void validate() const;
  bool operator==(const RunConfig&) const;
};

nlohmann::ordered_json to_json(const RunConfig& config);
/// Rejects unknown keys and wrong types with ConfigError.
RunConfig run_config_from_json(const nlohmann::json& j);
RunConfig load_run_config(const std::filesystem::path& path);
std::string dump_run_config(const RunConfig& config);

/// A complete config for the named preset with the defaults used throughout.
RunConfig default_run_config(ProblemPreset preset);

/// ceil(max_delay / interval) + m, clamped to m.
int default_tau_assumed(const RunConfig& config);

struct PreparedRun {
  Graph graph;
  LocalProblems locals;
  SimConfig sim;
  double lambda_max = 0.0;
  double smoothness = 0.0;
  int tau_assumed = 0;
  /// Closed-form dual optimum, quadratic preset only.
  std::optional<double> optimal_value;
};

/// Builds the graph and local problems and resolves "auto" settings.
/// Relative MNIST paths are resolved against base_dir.
PreparedRun prepare_run(const RunConfig& config, const std::filesystem::path& base_dir = {});

/// Text describing every config field, for --help.
std::string config_reference();

}  // namespace wbary
