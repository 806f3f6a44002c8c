#include "wbary/run_config.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "wbary/errors.hpp"

namespace wbary {

using nlohmann::json;
using nlohmann::ordered_json;

std::string_view to_string(ProblemPreset p) {
  switch (p) {
    case ProblemPreset::gaussian: return "gaussian";
    case ProblemPreset::discrete: return "discrete";
    case ProblemPreset::mnist: return "mnist";
    case ProblemPreset::quadratic: return "quadratic";
  }
  return "unknown";
}

ProblemPreset problem_preset_from_string(std::string_view name) {
  if (name == "gaussian") return ProblemPreset::gaussian;
  if (name == "discrete") return ProblemPreset::discrete;
  if (name == "mnist") return ProblemPreset::mnist;
  if (name == "quadratic") return ProblemPreset::quadratic;
  throw ConfigError("problem.preset: unknown preset '" + std::string(name) +
                    "' (expected gaussian, discrete, mnist or quadratic)");
}

bool DiscreteProblem::operator==(const DiscreteProblem& o) const {
  if (grid.rows() != o.grid.rows() || grid.cols() != o.grid.cols() || grid != o.grid) return false;
  if (atoms.size() != o.atoms.size() || weights.size() != o.weights.size()) return false;
  for (std::size_t a = 0; a < atoms.size(); ++a)
    if (atoms[a].rows() != o.atoms[a].rows() || atoms[a].cols() != o.atoms[a].cols() ||
        atoms[a] != o.atoms[a])
      return false;
  for (std::size_t a = 0; a < weights.size(); ++a)
    if (weights[a].size() != o.weights[a].size() || weights[a] != o.weights[a]) return false;
  return true;
}

bool SimBlock::operator==(const SimBlock& o) const {
  return horizon_s == o.horizon_s && activation_mode == o.activation_mode && interval_s == o.interval_s &&
         delay.delay_support == o.delay.delay_support && delay.delay_probs == o.delay.delay_probs &&
         master_seed == o.master_seed;
}

bool RunConfig::operator==(const RunConfig& o) const {
  return topology.kind == o.topology.kind && topology.m == o.topology.m &&
         topology.er_edge_prob == o.topology.er_edge_prob && topology.seed == o.topology.seed &&
         problem == o.problem && algorithm == o.algorithm && sim == o.sim &&
         eval.every_s == o.eval.every_s && eval.samples == o.eval.samples && eval.seed == o.eval.seed;
}

// ---------------------------------------------------------------------------
// validation

void RunConfig::validate() const {
  try {
    topology.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  const int m = topology.m;

  const bool measure_preset = problem.preset != ProblemPreset::quadratic;
  if (measure_preset) {
    if (!problem.beta) throw ConfigError("problem.beta: required for preset " + std::string(to_string(problem.preset)));
    if (!(*problem.beta > 0.0) || !std::isfinite(*problem.beta))
      throw ConfigError("problem.beta: must be positive and finite");
  } else if (problem.beta) {
    throw ConfigError("problem.beta: not used by the quadratic preset (set quadratic.mu)");
  }
  const bool sized = problem.preset == ProblemPreset::gaussian || problem.preset == ProblemPreset::quadratic;
  if (sized) {
    if (!problem.n) throw ConfigError("problem.n: required for preset " + std::string(to_string(problem.preset)));
    const int min_n = problem.preset == ProblemPreset::gaussian ? 2 : 1;
    if (*problem.n < min_n) throw ConfigError("problem.n: must be >= " + std::to_string(min_n));
  } else if (problem.n) {
    throw ConfigError("problem.n: derived from the support for preset " + std::string(to_string(problem.preset)));
  }

  switch (problem.preset) {
    case ProblemPreset::gaussian:
      try {
        problem.gaussian.validate();
      } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("problem.gaussian: ") + e.what());
      }
      break;
    case ProblemPreset::discrete: {
      const auto& d = problem.discrete;
      if (d.grid.cols() < 1) throw ConfigError("problem.discrete.grid: must hold at least one point");
      if (d.atoms.size() != d.weights.size())
        throw ConfigError("problem.discrete.measures: atoms and weights disagree in count");
      if (d.atoms.size() != 1 && d.atoms.size() != static_cast<std::size_t>(m))
        throw ConfigError("problem.discrete.measures: need 1 (shared) or topology.m measures, got " +
                          std::to_string(d.atoms.size()));
      for (std::size_t a = 0; a < d.atoms.size(); ++a) {
        const std::string where = "problem.discrete.measures[" + std::to_string(a) + "]";
        if (d.atoms[a].rows() != d.grid.rows())
          throw ConfigError(where + ".atoms: dimension differs from the grid");
        if (d.atoms[a].cols() != d.weights[a].size())
          throw ConfigError(where + ": atoms and weights differ in length");
        try {
          (void)Measure::empirical(d.atoms[a], d.weights[a]);
        } catch (const std::exception& e) {
          throw ConfigError(where + ": " + e.what());
        }
      }
      break;
    }
    case ProblemPreset::mnist:
      if (problem.mnist.images.empty()) throw ConfigError("problem.mnist.images: path required");
      if (problem.mnist.labels.empty()) throw ConfigError("problem.mnist.labels: path required");
      if (problem.mnist.digit < 0 || problem.mnist.digit > 9) throw ConfigError("problem.mnist.digit: must be 0..9");
      break;
    case ProblemPreset::quadratic:
      if (!(problem.quadratic.mu > 0.0)) throw ConfigError("problem.quadratic.mu: must be positive");
      if (!(problem.quadratic.noise_std >= 0.0)) throw ConfigError("problem.quadratic.noise_std: must be >= 0");
      break;
  }

  if (algorithm.gamma && (!(*algorithm.gamma > 0.0) || !std::isfinite(*algorithm.gamma)))
    throw ConfigError("algorithm.gamma: must be \"auto\" or a positive number");
  if (algorithm.tau_assumed) {
    if (*algorithm.tau_assumed < 0) throw ConfigError("algorithm.tau_assumed: must be >= 0");
    if (*algorithm.tau_assumed > m)
      throw ConfigError("algorithm.tau_assumed: " + std::to_string(*algorithm.tau_assumed) + " exceeds m = " +
                        std::to_string(m) + "; the step-size theorem assumes a staleness bound tau <= m");
  }
  if (algorithm.batch && *algorithm.batch < 1) throw ConfigError("algorithm.batch: must be \"auto\" or >= 1");
  if (!(algorithm.batch_epsilon > 0.0)) throw ConfigError("algorithm.batch_epsilon: must be positive");

  if (!(sim.horizon_s >= 0.0) || !std::isfinite(sim.horizon_s)) throw ConfigError("sim.horizon_s: must be >= 0");
  if (!(sim.interval_s > 0.0) || !std::isfinite(sim.interval_s))
    throw ConfigError("sim.activation.interval_s: must be positive");
  try {
    sim.delay.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("sim.") + e.what());
  }
  if (!(eval.every_s > 0.0) || !std::isfinite(eval.every_s)) throw ConfigError("eval.eval_every_s: must be positive");
  if (eval.samples < 1) throw ConfigError("eval.eval_samples: must be >= 1");
}

// ---------------------------------------------------------------------------
// json

namespace {

ordered_json matrix_to_points(const Matrix& pts) {
  ordered_json out = ordered_json::array();
  for (Eigen::Index c = 0; c < pts.cols(); ++c) {
    ordered_json p = ordered_json::array();
    for (Eigen::Index r = 0; r < pts.rows(); ++r) p.push_back(pts(r, c));
    out.push_back(std::move(p));
  }
  return out;
}

class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  bool has(const char* key) const { return j_.contains(key) && !j_.at(key).is_null(); }

  const json& raw(const char* key) {
    seen_.insert(key);
    if (!j_.contains(key)) throw ConfigError(field(key) + ": missing");
    return j_.at(key);
  }

  double number(const char* key) {
    const json& v = raw(key);
    if (!v.is_number()) throw ConfigError(field(key) + ": expected a number");
    return v.get<double>();
  }
  double number_or(const char* key, double fallback) { return has(key) ? number(key) : mark(key, fallback); }

  std::int64_t integer(const char* key) {
    const json& v = raw(key);
    if (!v.is_number_integer()) throw ConfigError(field(key) + ": expected an integer");
    return v.get<std::int64_t>();
  }
  std::uint64_t seed(const char* key) {
    const json& v = raw(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
      throw ConfigError(field(key) + ": expected a nonnegative integer");
    return v.get<std::uint64_t>();
  }
  std::string string(const char* key) {
    const json& v = raw(key);
    if (!v.is_string()) throw ConfigError(field(key) + ": expected a string");
    return v.get<std::string>();
  }
  bool boolean(const char* key) {
    const json& v = raw(key);
    if (!v.is_boolean()) throw ConfigError(field(key) + ": expected true or false");
    return v.get<bool>();
  }
  std::vector<double> numbers(const char* key) {
    const json& v = raw(key);
    if (!v.is_array()) throw ConfigError(field(key) + ": expected an array of numbers");
    std::vector<double> out;
    for (const auto& x : v) {
      if (!x.is_number()) throw ConfigError(field(key) + ": expected an array of numbers");
      out.push_back(x.get<double>());
    }
    return out;
  }
  Reader object(const char* key) {
    raw(key);
    return Reader(j_.at(key), field(key));
  }

  std::string field(const std::string& key) const { return path_ + "." + key; }

  /// Call after reading every known field.
  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key()) && !it.value().is_null())
        throw ConfigError(field(it.key()) + ": unknown field");
  }

 private:
  template <class T>
  T mark(const char* key, T v) {
    seen_.insert(key);
    return v;
  }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

Matrix points_from_json(const json& v, const std::string& where) {
  if (!v.is_array() || v.empty()) throw ConfigError(where + ": expected a nonempty array of points");
  const std::size_t d = v.front().is_array() ? v.front().size() : 0;
  if (d == 0) throw ConfigError(where + ": points must be nonempty arrays of numbers");
  Matrix out(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(v.size()));
  for (std::size_t c = 0; c < v.size(); ++c) {
    const auto& p = v[c];
    if (!p.is_array() || p.size() != d) throw ConfigError(where + ": every point needs " + std::to_string(d) + " coordinates");
    for (std::size_t r = 0; r < d; ++r) {
      if (!p[r].is_number()) throw ConfigError(where + ": coordinates must be numbers");
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = p[r].get<double>();
    }
  }
  return out;
}

}  // namespace

ordered_json to_json(const RunConfig& c) {
  ordered_json topo;
  topo["kind"] = to_string(c.topology.kind);
  topo["m"] = c.topology.m;
  if (c.topology.er_edge_prob) topo["er_edge_prob"] = *c.topology.er_edge_prob;
  if (c.topology.seed) topo["seed"] = *c.topology.seed;

  ordered_json prob;
  prob["preset"] = to_string(c.problem.preset);
  if (c.problem.n) prob["n"] = *c.problem.n;
  if (c.problem.beta) prob["beta"] = *c.problem.beta;
  prob["seed"] = c.problem.seed;
  switch (c.problem.preset) {
    case ProblemPreset::gaussian: {
      const auto& g = c.problem.gaussian;
      prob["gaussian"] = {{"support_lo", g.support_lo}, {"support_hi", g.support_hi}, {"mean_lo", g.mean_lo},
                          {"mean_hi", g.mean_hi},       {"std_lo", g.std_lo},         {"std_hi", g.std_hi}};
      break;
    }
    case ProblemPreset::discrete: {
      ordered_json measures = ordered_json::array();
      for (std::size_t a = 0; a < c.problem.discrete.atoms.size(); ++a) {
        ordered_json w = ordered_json::array();
        for (Eigen::Index l = 0; l < c.problem.discrete.weights[a].size(); ++l) w.push_back(c.problem.discrete.weights[a](l));
        measures.push_back({{"atoms", matrix_to_points(c.problem.discrete.atoms[a])}, {"weights", w}});
      }
      prob["discrete"] = {{"grid", matrix_to_points(c.problem.discrete.grid)}, {"measures", measures}};
      break;
    }
    case ProblemPreset::mnist:
      prob["mnist"] = {{"images", c.problem.mnist.images},
                       {"labels", c.problem.mnist.labels},
                       {"digit", c.problem.mnist.digit},
                       {"keep_zero_pixels", c.problem.mnist.keep_zero_pixels}};
      break;
    case ProblemPreset::quadratic:
      prob["quadratic"] = {{"mu", c.problem.quadratic.mu}, {"noise_std", c.problem.quadratic.noise_std}};
      break;
  }

  ordered_json algo;
  algo["variant"] = to_string(c.algorithm.variant);
  if (c.algorithm.gamma) algo["gamma"] = *c.algorithm.gamma; else algo["gamma"] = "auto";
  if (c.algorithm.tau_assumed) algo["tau_assumed"] = *c.algorithm.tau_assumed;
  if (c.algorithm.batch) algo["batch"] = *c.algorithm.batch; else algo["batch"] = "auto";
  algo["batch_epsilon"] = c.algorithm.batch_epsilon;

  ordered_json sim;
  sim["horizon_s"] = c.sim.horizon_s;
  sim["activation"] = {{"mode", to_string(c.sim.activation_mode)}, {"interval_s", c.sim.interval_s}};
  sim["delay"] = {{"support", c.sim.delay.delay_support}, {"probs", c.sim.delay.delay_probs}};
  sim["master_seed"] = c.sim.master_seed;

  ordered_json eval;
  eval["eval_every_s"] = c.eval.every_s;
  eval["eval_samples"] = c.eval.samples;
  eval["eval_seed"] = c.eval.seed;

  ordered_json out;
  out["topology"] = std::move(topo);
  out["problem"] = std::move(prob);
  out["algorithm"] = std::move(algo);
  out["sim"] = std::move(sim);
  out["eval"] = std::move(eval);
  return out;
}

RunConfig run_config_from_json(const json& j) {
  RunConfig c;
  Reader root(j, "config");

  {
    Reader t = root.object("topology");
    try {
      c.topology.kind = topology_kind_from_string(t.string("kind"));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("topology.kind: ") + e.what());
    }
    c.topology.m = static_cast<int>(t.integer("m"));
    c.topology.er_edge_prob = t.has("er_edge_prob") ? std::optional(t.number("er_edge_prob")) : std::nullopt;
    c.topology.seed = t.has("seed") ? std::optional(t.seed("seed")) : std::nullopt;
    t.finish();
  }
  {
    Reader p = root.object("problem");
    c.problem.preset = problem_preset_from_string(p.string("preset"));
    c.problem.n = p.has("n") ? std::optional(static_cast<int>(p.integer("n"))) : std::nullopt;
    c.problem.beta = p.has("beta") ? std::optional(p.number("beta")) : std::nullopt;
    c.problem.seed = p.has("seed") ? p.seed("seed") : 1;
    switch (c.problem.preset) {
      case ProblemPreset::gaussian: {
        GaussianRanges defaults;
        if (p.has("gaussian")) {
          Reader g = p.object("gaussian");
          auto& r = c.problem.gaussian;
          r.support_lo = g.number_or("support_lo", defaults.support_lo);
          r.support_hi = g.number_or("support_hi", defaults.support_hi);
          r.mean_lo = g.number_or("mean_lo", defaults.mean_lo);
          r.mean_hi = g.number_or("mean_hi", defaults.mean_hi);
          r.std_lo = g.number_or("std_lo", defaults.std_lo);
          r.std_hi = g.number_or("std_hi", defaults.std_hi);
          g.finish();
        }
        break;
      }
      case ProblemPreset::discrete: {
        Reader d = p.object("discrete");
        c.problem.discrete.grid = points_from_json(d.raw("grid"), d.field("grid"));
        const json& ms = d.raw("measures");
        if (!ms.is_array() || ms.empty()) throw ConfigError(d.field("measures") + ": expected a nonempty array");
        for (std::size_t a = 0; a < ms.size(); ++a) {
          Reader mr(ms[a], d.field("measures") + "[" + std::to_string(a) + "]");
          c.problem.discrete.atoms.push_back(points_from_json(mr.raw("atoms"), mr.field("atoms")));
          const auto w = mr.numbers("weights");
          c.problem.discrete.weights.push_back(Eigen::Map<const Vector>(w.data(), static_cast<Eigen::Index>(w.size())));
          mr.finish();
        }
        d.finish();
        break;
      }
      case ProblemPreset::mnist: {
        Reader mn = p.object("mnist");
        c.problem.mnist.images = mn.string("images");
        c.problem.mnist.labels = mn.string("labels");
        c.problem.mnist.digit = mn.has("digit") ? static_cast<int>(mn.integer("digit")) : 3;
        c.problem.mnist.keep_zero_pixels = mn.has("keep_zero_pixels") ? mn.boolean("keep_zero_pixels") : false;
        mn.finish();
        break;
      }
      case ProblemPreset::quadratic: {
        if (p.has("quadratic")) {
          Reader q = p.object("quadratic");
          c.problem.quadratic.mu = q.number_or("mu", 1.0);
          c.problem.quadratic.noise_std = q.number_or("noise_std", 0.0);
          q.finish();
        }
        break;
      }
    }
    p.finish();
  }
  {
    Reader a = root.object("algorithm");
    c.algorithm.variant = algorithm_variant_from_string(a.string("variant"));
    if (a.has("gamma")) {
      const json& g = a.raw("gamma");
      if (g.is_string()) {
        if (g.get<std::string>() != "auto") throw ConfigError("algorithm.gamma: expected \"auto\" or a number");
        c.algorithm.gamma.reset();
      } else {
        c.algorithm.gamma = a.number("gamma");
      }
    } else {
      c.algorithm.gamma.reset();
    }
    c.algorithm.tau_assumed = a.has("tau_assumed") ? std::optional(static_cast<int>(a.integer("tau_assumed"))) : std::nullopt;
    if (a.has("batch")) {
      const json& b = a.raw("batch");
      if (b.is_string()) {
        if (b.get<std::string>() != "auto") throw ConfigError("algorithm.batch: expected \"auto\" or an integer");
        c.algorithm.batch.reset();
      } else {
        c.algorithm.batch = static_cast<int>(a.integer("batch"));
      }
    }
    c.algorithm.batch_epsilon = a.number_or("batch_epsilon", 1.0);
    a.finish();
  }
  {
    Reader s = root.object("sim");
    c.sim.horizon_s = s.number("horizon_s");
    if (s.has("activation")) {
      Reader act = s.object("activation");
      c.sim.activation_mode = act.has("mode") ? activation_mode_from_string(act.string("mode")) : ActivationMode::permutation;
      c.sim.interval_s = act.number_or("interval_s", 0.2);
      act.finish();
    }
    if (s.has("delay")) {
      Reader d = s.object("delay");
      c.sim.delay.delay_support = d.numbers("support");
      c.sim.delay.delay_probs = d.numbers("probs");
      d.finish();
    }
    c.sim.master_seed = s.has("master_seed") ? s.seed("master_seed") : 1;
    s.finish();
  }
  if (root.has("eval")) {
    Reader e = root.object("eval");
    c.eval.every_s = e.number_or("eval_every_s", EvalConfig{}.every_s);
    c.eval.samples = e.has("eval_samples") ? static_cast<int>(e.integer("eval_samples")) : EvalConfig{}.samples;
    c.eval.seed = e.has("eval_seed") ? e.seed("eval_seed") : EvalConfig{}.seed;
    e.finish();
  }
  root.finish();
  c.validate();
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return run_config_from_json(j);
}

std::string dump_run_config(const RunConfig& config) { return to_json(config).dump(2) + "\n"; }

RunConfig default_run_config(ProblemPreset preset) {
  RunConfig c;
  c.problem.preset = preset;
  switch (preset) {
    case ProblemPreset::gaussian:
      break;
    case ProblemPreset::discrete: {
      c.topology.m = 10;
      c.problem.n.reset();
      Matrix grid(1, 5);
      grid << 0.0, 0.25, 0.5, 0.75, 1.0;
      c.problem.discrete.grid = grid;
      Matrix atoms(1, 3);
      atoms << 0.1, 0.5, 0.9;
      Vector w(3);
      w << 0.25, 0.5, 0.25;
      c.problem.discrete.atoms = {atoms};
      c.problem.discrete.weights = {w};
      break;
    }
    case ProblemPreset::mnist:
      c.topology.m = 10;
      c.problem.n.reset();
      c.problem.beta = 0.01;
      c.problem.mnist = {"train-images-idx3-ubyte", "train-labels-idx1-ubyte", 3, false};
      break;
    case ProblemPreset::quadratic:
      c.topology.m = 10;
      c.problem.n = 5;
      c.problem.beta.reset();
      c.algorithm.gamma.reset();
      c.algorithm.tau_assumed = 0;
      c.sim.horizon_s = 20.0;
      break;
  }
  return c;
}

int default_tau_assumed(const RunConfig& config) {
  const int m = config.topology.m;
  const double ticks = std::ceil(config.sim.delay.max_delay() / config.sim.interval_s - 1e-9);
  const double tau = ticks + m;
  return tau >= m ? m : static_cast<int>(tau);
}

PreparedRun prepare_run(const RunConfig& config, const std::filesystem::path& base_dir) {
  config.validate();
  PreparedRun run{build_topology(config.topology), {}, {}, 0.0, 0.0, 0, std::nullopt};
  const int m = config.topology.m;
  run.lambda_max = lambda_max(laplacian(run.graph));

  double modulus = 1.0;
  double sigma2 = run.lambda_max;
  const auto& p = config.problem;
  switch (p.preset) {
    case ProblemPreset::gaussian: {
      const auto g = gaussian_preset(m, *p.n, p.seed, p.gaussian);
      run.locals = measure_locals(g.grid, g.measures(), *p.beta);
      modulus = *p.beta;
      break;
    }
    case ProblemPreset::discrete: {
      auto grid = std::make_shared<const SupportGrid>(p.discrete.grid);
      std::vector<Measure> ms;
      for (int i = 0; i < m; ++i) {
        const std::size_t a = p.discrete.atoms.size() == 1 ? 0 : static_cast<std::size_t>(i);
        ms.push_back(Measure::empirical(p.discrete.atoms[a], p.discrete.weights[a]));
      }
      run.locals = measure_locals(grid, ms, *p.beta);
      modulus = *p.beta;
      break;
    }
    case ProblemPreset::mnist: {
      auto resolve = [&](const std::string& s) {
        std::filesystem::path path(s);
        return path.is_relative() && !base_dir.empty() ? base_dir / path : path;
      };
      const auto images = parse_idx_images(read_file_bytes(resolve(p.mnist.images)));
      const auto labels = parse_idx_labels(read_file_bytes(resolve(p.mnist.labels)));
      const auto mp = mnist_preset(images, labels, p.mnist.digit, m, p.seed, p.mnist.keep_zero_pixels);
      run.locals = measure_locals(mp.grid, mp.measures, *p.beta);
      modulus = *p.beta;
      break;
    }
    case ProblemPreset::quadratic: {
      const auto q = quadratic_preset(m, *p.n, p.quadratic.mu, p.quadratic.noise_std, p.seed);
      run.locals = quadratic_locals(q);
      run.optimal_value = q.optimal_value();
      modulus = q.mu;
      sigma2 = run.lambda_max * static_cast<double>(*p.n) * q.noise_std * q.noise_std;
      break;
    }
  }

  run.smoothness = run.lambda_max / modulus;
  const bool sync = config.algorithm.variant == AlgorithmVariant::sync_baseline;
  run.tau_assumed = config.algorithm.tau_assumed ? *config.algorithm.tau_assumed : (sync ? 0 : default_tau_assumed(config));

  SimConfig& s = run.sim;
  s.variant = config.algorithm.variant;
  s.gamma = config.algorithm.gamma ? *config.algorithm.gamma : step_size(run.smoothness, run.tau_assumed, m);
  if (config.algorithm.batch) {
    s.batch.mode = BatchPolicy::Mode::fixed;
    s.batch.fixed_size = *config.algorithm.batch;
  } else {
    s.batch.mode = BatchPolicy::Mode::theorem;
    s.batch.sigma2 = sigma2;
    s.batch.epsilon = config.algorithm.batch_epsilon;
    s.batch.smoothness = run.smoothness;
  }
  s.horizon_s = config.sim.horizon_s;
  s.activation_mode = config.sim.activation_mode;
  s.interval_s = config.sim.interval_s;
  s.comm = config.sim.delay;
  s.master_seed = config.sim.master_seed;
  s.eval = config.eval;
  s.topology_label = config.topology.label();
  s.validate();
  return run;
}

std::string config_reference() {
  return R"(Run config (JSON). Fields marked * are required.

topology
  kind*            complete | erdos_renyi | cycle | star
  m*               number of nodes, >= 2
  er_edge_prob     edge probability in (0, 1]; erdos_renyi only (required there)
  seed             graph seed; erdos_renyi only (required there)

problem
  preset*          gaussian | discrete | mnist | quadratic
  n                support size; gaussian (>= 2) and quadratic (>= 1) only
  beta             entropic regularization > 0; every preset except quadratic
  seed             preset seed (default 1)
  gaussian         {support_lo -5, support_hi 5, mean_lo -4, mean_hi 4, std_lo 0.1, std_hi 0.6}
  discrete         {grid: [[z_1], ...], measures: [{atoms: [[y], ...], weights: [...]}, ...]}
                   one measure is shared by all nodes, otherwise exactly m measures
  mnist            {images*: IDX3 path, labels*: IDX1 path, digit 3, keep_zero_pixels false}
                   relative paths resolve against the config file's directory
  quadratic        {mu 1.0, noise_std 0.0}: node i holds (mu/2)||x - b_i||^2

algorithm
  variant*         a2dwb | a2dwbn | sync_baseline
  gamma            "auto" (default) or a positive number; auto uses the
                   step-size bound with L = lambda_max(W) / beta (mu for quadratic)
  tau_assumed      staleness bound for auto gamma, 0 <= tau <= m; default is
                   min(m, ceil(max_delay / interval_s) + m) for the async variants, 0 for sync
  batch            samples per gradient: integer >= 1 (default 10) or "auto"
  batch_epsilon    target accuracy for "auto" batch sizes (default 1.0)

sim
  horizon_s*       virtual seconds to simulate, >= 0
  activation       {mode: permutation | random (default permutation),
                    interval_s: spacing between consecutive activations (default 0.2)}
  delay            {support: seconds (default [0.2, 0.4, 0.6, 0.8, 1.0]),
                    probs: probabilities (default uniform)}
  master_seed      seed of every algorithm stream (default 1)

eval
  eval_every_s     snapshot spacing in virtual seconds (default 2.0)
  eval_samples     Monte-Carlo samples per node and snapshot (default 200)
  eval_seed        seed of the evaluation stream (default 20240601)
)";
}

}  // namespace wbary
