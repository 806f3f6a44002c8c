#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "wbary/errors.hpp"
#include "wbary/run_config.hpp"

using namespace wbary;
using nlohmann::json;

namespace {

std::string config_error(const json& j) {
  try {
    run_config_from_json(j).validate();
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("defaults round trip for every preset") {
  for (auto preset : {ProblemPreset::gaussian, ProblemPreset::discrete, ProblemPreset::mnist, ProblemPreset::quadratic}) {
    const RunConfig c = default_run_config(preset);
    const std::string text = dump_run_config(c);
    const RunConfig back = run_config_from_json(json::parse(text));
    CHECK(back == c);
    CHECK(dump_run_config(back) == text);
  }
}

TEST_CASE("non-default values survive a round trip") {
  RunConfig c = default_run_config(ProblemPreset::gaussian);
  c.topology = {TopologyKind::erdos_renyi, 12, 0.35, 8};
  c.problem.beta = 0.25;
  c.problem.n = 17;
  c.problem.gaussian.std_hi = 0.45;
  c.algorithm.variant = AlgorithmVariant::sync_baseline;
  c.algorithm.gamma = 0.0123;
  c.algorithm.batch = std::nullopt;
  c.algorithm.batch_epsilon = 0.05;
  c.sim.activation_mode = ActivationMode::random;
  c.sim.delay = {{0.1, 0.3}, {0.25, 0.75}};
  c.sim.master_seed = 1234567890123ull;
  c.eval.every_s = 0.5;
  const auto j = to_json(c);
  CHECK(j["algorithm"]["batch"] == "auto");
  CHECK(j["algorithm"]["gamma"] == 0.0123);
  CHECK(run_config_from_json(j) == c);
}

TEST_CASE("validation messages name the field") {
  json j = to_json(default_run_config(ProblemPreset::quadratic));
  j["algorithm"]["tau_assumed"] = 11;
  const auto msg = config_error(j);
  CHECK(msg.find("tau_assumed") != std::string::npos);
  CHECK(msg.find("tau <= m") != std::string::npos);

  j = to_json(default_run_config(ProblemPreset::quadratic));
  j["sim"]["colour"] = "blue";
  CHECK(config_error(j).find("colour") != std::string::npos);

  j = to_json(default_run_config(ProblemPreset::gaussian));
  j["problem"]["beta"] = -1.0;
  CHECK(config_error(j).find("beta") != std::string::npos);

  j = to_json(default_run_config(ProblemPreset::gaussian));
  j["topology"]["m"] = "ten";
  CHECK(config_error(j).find("topology.m") != std::string::npos);

  j = to_json(default_run_config(ProblemPreset::gaussian));
  j["sim"]["delay"]["probs"] = {0.5, 0.5};
  CHECK_FALSE(config_error(j).empty());

  j = to_json(default_run_config(ProblemPreset::gaussian));
  j["algorithm"]["variant"] = "hogwild";
  CHECK(config_error(j).find("variant") != std::string::npos);

  j = to_json(default_run_config(ProblemPreset::gaussian));
  j.erase("topology");
  CHECK(config_error(j).find("topology") != std::string::npos);
}

TEST_CASE("auto settings") {
  RunConfig c = default_run_config(ProblemPreset::gaussian);
  c.topology = {TopologyKind::cycle, 10, std::nullopt, std::nullopt};
  c.problem.n = 8;
  c.problem.beta = 0.5;
  CHECK(default_tau_assumed(c) == 10);  // ceil(1.0 / 0.2) + 10, clamped to m
  const auto run = prepare_run(c);
  const double lmax = 2 - 2 * std::cos(2 * M_PI * 5 / 10);
  CHECK(run.lambda_max == doctest::Approx(lmax).epsilon(1e-9));
  CHECK(run.smoothness == doctest::Approx(lmax / 0.5).epsilon(1e-9));
  CHECK(run.tau_assumed == 10);
  CHECK(run.sim.gamma == doctest::Approx(step_size(lmax / 0.5, 10, 10)).epsilon(1e-9));
  CHECK(run.locals.size() == 10);
  CHECK(run.locals.front()->dim() == 8);

  c.algorithm.gamma = 0.01;
  CHECK(prepare_run(c).sim.gamma == 0.01);

  c.algorithm.variant = AlgorithmVariant::sync_baseline;
  c.algorithm.gamma = std::nullopt;
  CHECK(prepare_run(c).tau_assumed == 0);

  RunConfig q = default_run_config(ProblemPreset::quadratic);
  const auto qr = prepare_run(q);
  REQUIRE(qr.optimal_value.has_value());
  CHECK(*qr.optimal_value < 0.0);
}

TEST_CASE("config files") {
  const auto dir = std::filesystem::temp_directory_path() / "wbary_config_test";
  std::filesystem::create_directories(dir);
  const RunConfig c = default_run_config(ProblemPreset::discrete);
  {
    std::ofstream out(dir / "c.json");
    out << dump_run_config(c);
  }
  CHECK(load_run_config(dir / "c.json") == c);
  {
    std::ofstream out(dir / "bad.json");
    out << "{ not json";
  }
  CHECK_THROWS_AS(load_run_config(dir / "bad.json"), ConfigError);
  CHECK_THROWS(load_run_config(dir / "missing.json"));
  std::filesystem::remove_all(dir);

  const auto ref = config_reference();
  for (const char* field : {"kind", "er_edge_prob", "beta", "variant", "gamma", "tau_assumed", "batch", "batch_epsilon",
                            "horizon_s", "interval_s", "support", "probs", "master_seed", "eval_every_s",
                            "eval_samples", "eval_seed", "keep_zero_pixels", "noise_std"})
    CHECK_MESSAGE(ref.find(field) != std::string::npos, field);
}
