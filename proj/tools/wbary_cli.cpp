#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "wbary/diagnostics.hpp"
#include "wbary/errors.hpp"
#include "wbary/run_config.hpp"

namespace fs = std::filesystem;
using namespace wbary;

namespace {

int cmd_run(const fs::path& config_path, const fs::path& out, std::optional<std::uint64_t> seed,
            std::optional<std::string> variant, std::optional<double> horizon) {
  RunConfig config = load_run_config(config_path);
  if (seed) config.sim.master_seed = *seed;
  if (variant) config.algorithm.variant = algorithm_variant_from_string(*variant);
  if (horizon) config.sim.horizon_s = *horizon;
  config.validate();

  const PreparedRun run = prepare_run(config, config_path.parent_path());
  const Trace trace = run_sim(run.graph, run.locals, run.sim);
  emit_csv(trace, out);

  const TraceRow& last = trace.rows.back();
  std::printf("variant %s, topology %s, m=%d, gamma=%.6g, %lld iterations\n",
              std::string(to_string(config.algorithm.variant)).c_str(), last.topology.c_str(),
              run.graph.size(), run.sim.gamma, static_cast<long long>(last.global_iter));
  std::printf("final dual objective %.10g\n", last.dual_objective);
  std::printf("final consensus distance %.10g\n", last.consensus_distance);
  if (run.optimal_value) std::printf("dual gap %.10g\n", last.dual_objective - *run.optimal_value);
  return 0;
}

int cmd_diagnostics(std::uint64_t seed, bool wrong_theta) {
  DiagnosticsOptions opt;
  opt.seed = seed;
  if (wrong_theta) opt.theta_recursion = [](double t) { return t / (1.0 + t); };
  bool all = true;
  for (const auto& r : run_diagnostics(opt)) {
    std::printf("%-12s %s  (%.2fs)  %s\n", r.name.c_str(), r.passed ? "PASS" : "FAIL", r.seconds, r.detail.c_str());
    all = all && r.passed;
  }
  return all ? 0 : 1;
}

void write_text(const std::optional<fs::path>& out, const std::string& text) {
  if (!out) {
    std::cout << text;
    return;
  }
  std::ofstream f(*out);
  if (!f) throw std::runtime_error("cannot open '" + out->string() + "' for writing");
  f << text;
}

int cmd_preset(const std::string& name, std::optional<int> m, std::optional<std::string> topology,
               const std::optional<fs::path>& out) {
  RunConfig c = default_run_config(problem_preset_from_string(name));
  if (m) c.topology.m = *m;
  if (topology) c.topology.kind = topology_kind_from_string(*topology);
  if (c.topology.kind == TopologyKind::erdos_renyi && !c.topology.er_edge_prob) {
    c.topology.er_edge_prob = 0.2;
    c.topology.seed = 1;
  }
  c.validate();
  write_text(out, dump_run_config(c));
  return 0;
}

int cmd_mnist_prepare(const fs::path& images_path, const fs::path& labels_path, int digit, int m,
                      std::uint64_t seed, bool keep_zero, double beta, const std::optional<fs::path>& out) {
  const auto images = parse_idx_images(read_file_bytes(images_path));
  const auto labels = parse_idx_labels(read_file_bytes(labels_path));
  const auto preset = mnist_preset(images, labels, digit, m, seed, keep_zero);

  RunConfig c = default_run_config(ProblemPreset::discrete);
  c.topology.m = m;
  c.problem.beta = beta;
  c.problem.seed = seed;
  c.problem.discrete.grid = preset.grid->points();
  c.problem.discrete.atoms.clear();
  c.problem.discrete.weights.clear();
  for (std::size_t idx : preset.image_indices) {
    const auto pm = image_to_measure(images, idx, keep_zero);
    c.problem.discrete.atoms.push_back(pm.atoms);
    c.problem.discrete.weights.push_back(pm.weights);
  }
  c.validate();
  write_text(out, dump_run_config(c));
  std::fprintf(stderr, "selected %d images of digit %d on a %ux%u grid\n", m, digit, images.rows, images.cols);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decentralized entropic Wasserstein barycenters over delayed networks"};
  app.require_subcommand(1);
  app.footer(config_reference());

  auto* run = app.add_subcommand("run", "Simulate one configuration and write its trace as CSV");
  fs::path config_path, out_path = "trace.csv";
  std::optional<std::uint64_t> seed_override;
  std::optional<std::string> variant_override;
  std::optional<double> horizon_override;
  run->add_option("--config", config_path, "JSON run config")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out_path, "trace CSV destination")->capture_default_str();
  run->add_option("--seed", seed_override, "override sim.master_seed");
  run->add_option("--variant", variant_override, "override algorithm.variant (a2dwb, a2dwbn, sync_baseline)");
  run->add_option("--horizon", horizon_override, "override sim.horizon_s");
  run->footer(config_reference());

  auto* diag = app.add_subcommand("diagnostics", "Run the invariant suites and report pass/fail per suite");
  std::uint64_t diag_seed = 7;
  bool wrong_theta = false;
  diag->add_option("--seed", diag_seed, "suite seed")->capture_default_str();
  diag->add_flag("--inject-wrong-theta", wrong_theta, "negative control: replace the theta recursion with t/(1+t)");

  auto* preset = app.add_subcommand("preset", "Print a filled run config for a preset");
  std::string preset_name = "gaussian";
  std::optional<int> preset_m;
  std::optional<std::string> preset_topology;
  std::optional<fs::path> preset_out;
  preset->add_option("name", preset_name, "gaussian, discrete, mnist or quadratic")->capture_default_str();
  preset->add_option("--m", preset_m, "number of nodes");
  preset->add_option("--topology", preset_topology, "complete, erdos_renyi, cycle or star");
  preset->add_option("--out", preset_out, "write to a file instead of stdout");

  auto* mnist = app.add_subcommand("mnist-prepare", "Select images of one digit and emit a discrete-preset run config");
  fs::path images_path, labels_path;
  int digit = 3, mnist_m = 10;
  std::uint64_t mnist_seed = 1;
  bool keep_zero = false;
  double mnist_beta = 0.01;
  std::optional<fs::path> mnist_out;
  mnist->add_option("--images", images_path, "IDX3 image file")->required()->check(CLI::ExistingFile);
  mnist->add_option("--labels", labels_path, "IDX1 label file")->required()->check(CLI::ExistingFile);
  mnist->add_option("--digit", digit, "digit to select")->capture_default_str();
  mnist->add_option("--m", mnist_m, "number of images (nodes)")->capture_default_str();
  mnist->add_option("--seed", mnist_seed, "selection seed")->capture_default_str();
  mnist->add_option("--beta", mnist_beta, "regularization written to the config")->capture_default_str();
  mnist->add_flag("--keep-zero-pixels", keep_zero, "keep zero-intensity pixels as zero-weight atoms");
  mnist->add_option("--out", mnist_out, "write to a file instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*run) return cmd_run(config_path, out_path, seed_override, variant_override, horizon_override);
    if (*diag) return cmd_diagnostics(diag_seed, wrong_theta);
    if (*preset) return cmd_preset(preset_name, preset_m, preset_topology, preset_out);
    if (*mnist)
      return cmd_mnist_prepare(images_path, labels_path, digit, mnist_m, mnist_seed, keep_zero, mnist_beta, mnist_out);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
