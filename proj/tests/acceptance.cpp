// End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
// the process exits nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/SVD>

#include "wbary/async_sim.hpp"
#include "wbary/mnist_ingest.hpp"
#include "wbary/optimizer_core.hpp"
#include "wbary/presets.hpp"
#include "wbary/run_config.hpp"
#include "wbary/trace.hpp"
#include "wbary/transport_dual.hpp"

using namespace wbary;
namespace fs = std::filesystem;

namespace {

// ---------------------------------------------------------------------------
// tolerances, fixed here so every threshold is visible in one place

constexpr double kThetaTol = 1e-10;
constexpr double kEquivalenceTol = 1e-9;
constexpr double kFiniteDiffTol = 1e-6;
constexpr double kStdErrBand = 3.0;
constexpr double kVarianceFactor = 1.2;
constexpr double kDualPrimalSlack = 1e-9;
constexpr double kAccelerationRatio = 0.5;
constexpr double kConsensusDrop = 10.0;
constexpr double kNormalizationTol = 1e-12;

struct Outcome {
  bool pass = false;
  std::string detail;
};

template <typename... Args>
std::string fmt(const char* f, Args... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Graph make(TopologyKind kind, int m, std::optional<double> p = std::nullopt,
           std::optional<std::uint64_t> seed = std::nullopt) {
  return build_topology({kind, m, p, seed});
}

BlockMatrix normal_block(int n, int m, RngStream& rng, double scale = 1.0) {
  BlockMatrix x(n, m);
  for (int i = 0; i < m; ++i)
    for (int l = 0; l < n; ++l) x(l, i) = scale * rng.normal();
  return x;
}

// Laplacian assembled from the edge list, independent of the library routine.
Matrix edge_laplacian(const Graph& g) {
  Matrix lap = Matrix::Zero(g.size(), g.size());
  for (int i = 0; i < g.size(); ++i)
    for (int j : g.neighbors(i)) {
      lap(i, j) -= 1.0;
      lap(i, i) += 1.0;
    }
  return lap;
}

// PSD square root and largest eigenvalue through the SVD.
Matrix svd_sqrt(const Matrix& a) {
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeFullU);
  const Vector sv = svd.singularValues().unaryExpr([](double s) { return s < 1e-12 ? 0.0 : std::sqrt(s); });
  return svd.matrixU() * sv.asDiagonal() * svd.matrixU().transpose();
}

double svd_lambda_max(const Matrix& a) { return Eigen::JacobiSVD<Matrix>(a).singularValues()(0); }

// Direct log-sum-exp dual of a discrete measure, without stabilization.
struct NaiveDual {
  double value;
  Vector gradient;
};

NaiveDual naive_dual(const Matrix& atoms, const Vector& w, const Matrix& grid, const Vector& eta, double beta) {
  NaiveDual out{0.0, Vector::Zero(grid.cols())};
  for (Eigen::Index a = 0; a < atoms.cols(); ++a) {
    Vector e(grid.cols());
    for (Eigen::Index l = 0; l < grid.cols(); ++l)
      e(l) = std::exp((eta(l) - (grid.col(l) - atoms.col(a)).squaredNorm()) / beta);
    out.value += w(a) * beta * std::log(e.sum());
    out.gradient += w(a) * e / e.sum();
  }
  return out;
}

struct RandomDiscrete {
  Matrix atoms;
  Vector weights;
};

RandomDiscrete random_discrete(int k, RngStream& rng) {
  RandomDiscrete d{Matrix(1, k), Vector(k)};
  for (int a = 0; a < k; ++a) {
    d.atoms(0, a) = rng.uniform();
    d.weights(a) = 0.05 + rng.uniform();
  }
  d.weights /= d.weights.sum();
  d.weights(k - 1) = 1.0 - d.weights.head(k - 1).sum();
  return d;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

// ---------------------------------------------------------------------------

Outcome theta_schedule() {
  double worst_identity = 0.0, worst_reference = 0.0;
  bool bounds = true;
  for (int m : {1, 2, 10, 500}) {
    ThetaSchedule s(m);
    double reference = 1.0 / m, prev = 0.0;
    for (std::int64_t k = 1; k <= 100000; ++k) {
      if (k > 1) reference = 2.0 / (1.0 + std::sqrt(1.0 + 4.0 / (reference * reference)));
      const double t = s.at(k);
      const double base = static_cast<double>(k - 1 + 2 * m);
      bounds = bounds && t >= (1.0 / base) * (1 - kThetaTol) && t <= (2.0 / base) * (1 + kThetaTol);
      worst_reference = std::max(worst_reference, std::abs(t - reference) / reference);
      if (k > 1) worst_identity = std::max(worst_identity, std::abs((1 - t) / (t * t) * prev * prev - 1.0));
      prev = t;
    }
  }
  return {bounds && worst_identity <= kThetaTol && worst_reference <= kThetaTol,
          fmt("bounds %s, identity error %.2g, deviation from reference %.2g (tol 1e-10)",
              bounds ? "hold" : "violated", worst_identity, worst_reference)};
}

Outcome equivalence() {
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto g = make(TopologyKind::erdos_renyi, 8, 0.4, seed);
    RngStream rng = RngStream::keyed(seed, StreamDomain::diagnostics, 101);
    QuadraticConsensusProblem prob(g, 0.5 + rng.uniform(), normal_block(4, 8, rng));
    QuadraticOracle oracle(prob, 0.1);
    RunOptions opt;
    opt.iterations = 200;
    opt.gamma = step_size(prob.smoothness(), 3, 8);
    opt.seed = seed;
    opt.keep_iterates = true;
    const BlockMatrix eta0 = normal_block(4, 8, rng, 0.5);
    const auto delays = DelaySchedule::random(8, 3, 201, seed);
    const auto a = run_asbcds(oracle, delays, eta0, opt);
    const auto p = run_pasbcds(oracle, delays, eta0, opt);
    if (a.eta_iterates.size() != p.eta_iterates.size()) return {false, "iterate counts differ"};
    for (std::size_t k = 0; k < a.eta_iterates.size(); ++k)
      worst = std::max(worst, (a.eta_iterates[k] - p.eta_iterates[k]).norm() /
                                  std::max(a.eta_iterates[k].norm(), 1e-300));
  }
  return {worst <= kEquivalenceTol, fmt("max relative deviation %.3g over 10 seeds (tol 1e-9)", worst)};
}

Outcome gradient_oracle() {
  RngStream rng(31);
  double worst_fd = 0.0, worst_value = 0.0;
  for (int inst = 0; inst < 20; ++inst) {
    const int n = 2 + static_cast<int>(rng.below(4));
    const auto d = random_discrete(1 + static_cast<int>(rng.below(5)), rng);
    Matrix grid(1, n);
    for (int l = 0; l < n; ++l) grid(0, l) = (l + rng.uniform()) / n;
    Vector eta(n);
    for (int l = 0; l < n; ++l) eta(l) = 0.5 * rng.normal();
    const double beta = 0.2 + rng.uniform();
    const Measure mu = Measure::empirical(d.atoms, d.weights);
    const SupportGrid sg(grid);
    const auto ev = exact_dual(mu, sg, eta, {beta, false});
    worst_value = std::max(worst_value, std::abs(ev.value - naive_dual(d.atoms, d.weights, grid, eta, beta).value));
    Vector fd(n);
    for (int l = 0; l < n; ++l) {
      Vector up = eta, dn = eta;
      up(l) += 1e-5;
      dn(l) -= 1e-5;
      fd(l) = (naive_dual(d.atoms, d.weights, grid, up, beta).value -
               naive_dual(d.atoms, d.weights, grid, dn, beta).value) / 2e-5;
    }
    worst_fd = std::max(worst_fd, (fd - ev.gradient).norm() / ev.gradient.norm());
  }

  double worst_se = 0.0;
  constexpr int draws = 100000;
  for (int inst = 0; inst < 3; ++inst) {
    const auto d = random_discrete(4, rng);
    const Matrix grid = Vector::LinSpaced(5, 0, 1).transpose();
    Vector eta(5);
    for (int l = 0; l < 5; ++l) eta(l) = 0.3 * rng.normal();
    const double beta = 0.3;
    const Vector exact = naive_dual(d.atoms, d.weights, grid, eta, beta).gradient;
    const Measure mu = Measure::empirical(d.atoms, d.weights);
    const SupportGrid sg(grid);
    RngStream draw(1000 + inst);
    Vector sum = Vector::Zero(5), sumsq = Vector::Zero(5);
    for (int t = 0; t < draws; ++t) {
      const Vector g = stochastic_grad(mu, sg, eta, beta, 1, draw).mean_gradient;
      sum += g;
      sumsq += g.cwiseProduct(g);
    }
    const Vector mean = sum / draws;
    for (int l = 0; l < 5; ++l) {
      const double se = std::sqrt(std::max(sumsq(l) / draws - mean(l) * mean(l), 0.0) / draws);
      if (se > 0) worst_se = std::max(worst_se, std::abs(mean(l) - exact(l)) / se);
    }
  }
  return {worst_fd <= kFiniteDiffTol && worst_se <= kStdErrBand && worst_value <= 1e-12,
          fmt("finite-difference rel. error %.2g (tol 1e-6), worst bias %.2f SE (band 3), value error %.1g", worst_fd,
              worst_se, worst_value)};
}

Outcome variance_bound() {
  constexpr int m = 5, n = 5, trials = 10000;
  const auto g = make(TopologyKind::complete, m);
  const Matrix lap = edge_laplacian(g);
  const double lmax = svd_lambda_max(lap);
  RngStream rng(41);
  const Matrix grid = Vector::LinSpaced(n, 0, 1).transpose();
  const SupportGrid sg(grid);
  const double beta = 0.5;
  std::vector<Measure> mus;
  BlockMatrix eta(n, m), exact(n, m);
  for (int i = 0; i < m; ++i) {
    const auto d = random_discrete(6, rng);
    mus.push_back(Measure::empirical(d.atoms, d.weights));
    for (int l = 0; l < n; ++l) eta(l, i) = 0.2 * rng.normal();
    exact.col(i) = naive_dual(d.atoms, d.weights, grid, eta.col(i), beta).gradient;
  }
  bool ok = true;
  std::string detail;
  for (int M : {1, 4, 16}) {
    RngStream draw(500 + M);
    double acc = 0.0;
    for (int t = 0; t < trials; ++t) {
      BlockMatrix err(n, m);
      for (int i = 0; i < m; ++i)
        err.col(i) = stochastic_grad(mus[static_cast<std::size_t>(i)], sg, eta.col(i), beta, M, draw).mean_gradient -
                     exact.col(i);
      acc += (err * lap * err.transpose()).trace();  // ||sqrt(W) err||^2
    }
    const double empirical = acc / trials, bound = kVarianceFactor * lmax / M;
    ok = ok && empirical <= bound;
    detail += fmt("%sM=%d: %.4g vs bound %.4g", detail.empty() ? "" : "; ", M, empirical, bound);
  }
  return {ok, detail};
}

Outcome dual_primal_bounds() {
  double worst_primal = -INFINITY, worst_consensus = -INFINITY;
  RngStream rng(51);
  for (std::uint64_t gi = 0; gi < 5; ++gi) {
    const int m = 4 + static_cast<int>(rng.below(7));
    const auto g = make(TopologyKind::erdos_renyi, m, 0.5, 60 + gi);
    const int n = 3;
    const double mu = 0.5 + 1.5 * rng.uniform();
    const BlockMatrix b = normal_block(n, m, rng);
    QuadraticConsensusProblem prob(g, mu, b);
    const Matrix lap = edge_laplacian(g);
    const Matrix root = svd_sqrt(lap);
    const double lmax = svd_lambda_max(lap);
    const BlockMatrix x_star = b.rowwise().mean().replicate(1, m);
    const double phi_star = -0.5 * mu * (b - x_star).squaredNorm();
    for (int t = 0; t < 100; ++t) {
      const BlockMatrix eta = normal_block(n, m, rng, 0.1 + 0.9 * rng.uniform());
      const auto ev = quadratic_dual_eval(prob, eta);
      const double gap = ev.value - phi_star;
      worst_primal = std::max(worst_primal, (ev.primal - x_star).squaredNorm() - 2.0 / mu * gap);
      worst_consensus = std::max(worst_consensus, (ev.primal * root).squaredNorm() - 2.0 * lmax / mu * gap);
    }
  }
  return {worst_primal <= kDualPrimalSlack && worst_consensus <= kDualPrimalSlack,
          fmt("max(lhs - rhs): primal %.3g, consensus %.3g (slack 1e-9)", worst_primal, worst_consensus)};
}

Outcome acceleration() {
  constexpr int m = 8, n = 3;
  double sum = 0.0;
  const auto g = make(TopologyKind::cycle, m);
  const Matrix lap = edge_laplacian(g);
  const Matrix root = svd_sqrt(lap);
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    RngStream rng(seed);
    const BlockMatrix b = normal_block(n, m, rng);
    QuadraticConsensusProblem prob(g, 1.0, b);
    QuadraticOracle oracle(prob, 0.0);
    const double phi_star = -0.5 * (b.colwise() - b.rowwise().mean()).squaredNorm();
    auto gap = [&](const BlockMatrix& eta) {
      return 0.5 * (eta * lap * eta.transpose()).trace() + (eta * root).cwiseProduct(b).sum() - phi_star;
    };
    RunOptions opt;
    opt.gamma = step_size(svd_lambda_max(lap), 0, m);
    opt.seed = seed;
    const BlockMatrix eta0 = BlockMatrix::Zero(n, m);
    opt.iterations = 499;
    const double g1 = gap(run_pasbcds(oracle, DelaySchedule::fresh(m, 1000), eta0, opt).final_eta);
    opt.iterations = 999;
    const double g2 = gap(run_pasbcds(oracle, DelaySchedule::fresh(m, 1000), eta0, opt).final_eta);
    sum += g2 / g1;
  }
  const double mean = sum / 10;
  return {mean <= kAccelerationRatio, fmt("mean gap(1000)/gap(500) %.3g (limit 0.5)", mean)};
}

Outcome algorithm_ordering() {
  constexpr int m = 20, n = 50, seeds = 10;
  constexpr double beta = 1.0;
  bool ok = true;
  std::string detail;
  for (auto kind : {TopologyKind::cycle, TopologyKind::complete}) {
    const Graph g = make(kind, m);
    // common step for every variant: half the fresh-gradient theory step
    const double gamma = 0.5 * step_size(svd_lambda_max(edge_laplacian(g)) / beta, 0, m);
    std::vector<double> finals[3];
    std::vector<double> drops;
    const AlgorithmVariant variants[] = {AlgorithmVariant::a2dwb, AlgorithmVariant::a2dwbn,
                                         AlgorithmVariant::sync_baseline};
    for (int s = 1; s <= seeds; ++s) {
      const auto pre = gaussian_preset(m, n, static_cast<std::uint64_t>(s));
      for (int v = 0; v < 3; ++v) {
        SimConfig c;
        c.variant = variants[v];
        c.gamma = gamma;
        c.horizon_s = 200.0;
        c.interval_s = 0.2 / m;  // every node fires once per 0.2 s on average
        c.master_seed = static_cast<std::uint64_t>(s);
        c.topology_label = std::string(to_string(kind));
        const auto trace = run_sim(g, measure_locals(pre.grid, pre.measures(), beta), c);
        finals[v].push_back(trace.rows.back().dual_objective);
        if (v == 0) drops.push_back(trace.rows.front().consensus_distance / trace.rows.back().consensus_distance);
      }
    }
    const double a = median(finals[0]), an = median(finals[1]), sy = median(finals[2]), drop = median(drops);
    const double worst_drop = *std::min_element(drops.begin(), drops.end());
    const bool here = a <= an && a <= sy && worst_drop >= kConsensusDrop;
    ok = ok && here;
    detail += std::string(detail.empty() ? "" : "; ") + std::string(to_string(kind)) +
              fmt(": median objective a2dwb %.4g, a2dwbn %.4g, sync %.4g; consensus drop median %.3gx", a, an, sy,
                  drop) +
              fmt(", min %.3gx (need 10x)", worst_drop);
  }
  return {ok, detail};
}

std::string file_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

Outcome determinism(const fs::path& dir) {
  std::vector<RunConfig> configs;
  for (auto variant : {AlgorithmVariant::a2dwb, AlgorithmVariant::a2dwbn, AlgorithmVariant::sync_baseline}) {
    RunConfig c = default_run_config(ProblemPreset::gaussian);
    c.topology = {TopologyKind::erdos_renyi, 8, 0.5, 3};
    c.problem.n = 12;
    c.algorithm.variant = variant;
    c.algorithm.gamma = 0.01;
    c.sim.horizon_s = 30.0;
    configs.push_back(c);
  }
  RunConfig q = default_run_config(ProblemPreset::quadratic);
  q.problem.quadratic.noise_std = 0.3;
  q.sim.activation_mode = ActivationMode::random;
  configs.push_back(q);
  configs.push_back(default_run_config(ProblemPreset::discrete));

  int identical = 0;
  for (std::size_t k = 0; k < configs.size(); ++k) {
    const auto path_a = dir / ("det_" + std::to_string(k) + "_a.csv");
    const auto path_b = dir / ("det_" + std::to_string(k) + "_b.csv");
    for (const auto& path : {path_a, path_b}) {
      const auto run = prepare_run(configs[k]);
      emit_csv(run_sim(run.graph, run.locals, run.sim), path);
    }
    const std::string a = file_bytes(path_a);
    if (!a.empty() && a == file_bytes(path_b)) ++identical;
  }
  return {identical == static_cast<int>(configs.size()),
          fmt("%d of %zu configs produced byte-identical traces", identical, configs.size())};
}

// Handwriting-like 28x28 images: digit 3 is two stacked arcs, other digits
// are strokes through a few random control points.
IdxImages synthetic_digits(const std::vector<std::uint8_t>& labels, std::uint64_t seed) {
  constexpr std::uint32_t side = 28;
  IdxImages img{static_cast<std::uint32_t>(labels.size()), side, side,
                std::vector<std::uint8_t>(labels.size() * side * side, 0)};
  RngStream rng(seed);
  for (std::size_t k = 0; k < labels.size(); ++k) {
    std::vector<std::pair<double, double>> stroke;
    const double dx = 2 * rng.normal(), dy = 2 * rng.normal(), scale = 1 + 0.1 * rng.normal();
    if (labels[k] == 3) {
      for (int arc = 0; arc < 2; ++arc)
        for (int t = 0; t <= 30; ++t) {
          const double a = -M_PI / 2 - 0.3 + (M_PI + 0.6) * t / 30.0;
          stroke.emplace_back(14 + dx + scale * 6 * std::cos(a + M_PI / 2) * -1 + 1,
                              (arc == 0 ? 9 : 19) + dy + scale * 5 * std::sin(a + M_PI / 2) * -1);
        }
    } else {
      double x = 8 + 12 * rng.uniform(), y = 6 + 4 * rng.uniform();
      for (int t = 0; t < 60; ++t) {
        stroke.emplace_back(x, y);
        x = std::clamp(x + rng.normal(), 4.0, 24.0);
        y = std::clamp(y + 0.3 + 0.5 * rng.normal(), 4.0, 24.0);
      }
    }
    for (std::uint32_t r = 0; r < side; ++r)
      for (std::uint32_t c = 0; c < side; ++c) {
        double best = 1e9;
        for (const auto& [sx, sy] : stroke) best = std::min(best, std::hypot(c + 0.5 - sx, r + 0.5 - sy));
        const double v = 255.0 * std::exp(-best * best / 1.5);
        img.pixels[k * side * side + r * side + c] = v < 8 ? 0 : static_cast<std::uint8_t>(std::lround(v));
      }
  }
  return img;
}

Outcome mnist_ingestion(const fs::path& dir) {
  std::vector<std::uint8_t> label_bytes;
  for (int k = 0; k < 40; ++k) label_bytes.push_back(static_cast<std::uint8_t>(k % 3 == 0 ? 3 : (k * 7) % 10));
  const IdxImages images = synthetic_digits(label_bytes, 77);
  const IdxLabels labels{label_bytes};
  write_file_bytes(dir / "images.idx3", serialize_idx_images(images));
  write_file_bytes(dir / "labels.idx1", serialize_idx_labels(labels));
  const bool round_trip = parse_idx_images(read_file_bytes(dir / "images.idx3")) == images &&
                          parse_idx_labels(read_file_bytes(dir / "labels.idx1")) == labels;

  double worst_norm = 0.0;
  bool nonnegative = true;
  for (std::size_t k = 0; k < images.count; ++k) {
    const auto pm = image_to_measure(images, k);
    worst_norm = std::max(worst_norm, std::abs(pm.weights.sum() - 1.0));
    nonnegative = nonnegative && pm.weights.minCoeff() >= 0.0;
  }

  RunConfig c = default_run_config(ProblemPreset::mnist);
  c.topology = {TopologyKind::cycle, 10, std::nullopt, std::nullopt};
  c.problem.mnist.images = "images.idx3";
  c.problem.mnist.labels = "labels.idx1";
  c.problem.mnist.digit = 3;
  c.sim.horizon_s = 20.0;
  auto run = prepare_run(c, dir);
  // same protocol as the ordering criterion: each node fires once per 0.2 s on average
  run.sim.gamma = 1.0 / (6.0 * run.smoothness);
  run.sim.interval_s = 0.2 / 10;
  const auto trace = run_sim(run.graph, run.locals, run.sim);
  const double first = trace.rows.front().consensus_distance, last = trace.rows.back().consensus_distance;
  return {round_trip && nonnegative && worst_norm <= kNormalizationTol && last < first,
          std::string("round trip ") + (round_trip ? "exact" : "differs") +
              fmt(", worst weight-sum error %.2g (tol 1e-12), micro-run consensus %.4g -> %.4g", worst_norm, first,
                  last)};
}

}  // namespace

// With arguments, only the listed criterion numbers run.
int main(int argc, char** argv) {
  const fs::path dir = fs::temp_directory_path() / "wbary_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"theta schedule", theta_schedule},
      {"equivalence", equivalence},
      {"gradient oracle", gradient_oracle},
      {"variance bound", variance_bound},
      {"dual-to-primal bounds", dual_primal_bounds},
      {"acceleration", acceleration},
      {"algorithm ordering", algorithm_ordering},
      {"determinism", [&] { return determinism(dir); }},
      {"image ingestion", [&] { return mnist_ingestion(dir); }},
  };
  std::vector<bool> selected(criteria.size(), argc == 1);
  for (int a = 1; a < argc; ++a) {
    const int k = std::atoi(argv[a]);
    if (k < 1 || k > static_cast<int>(criteria.size())) {
      std::fprintf(stderr, "no criterion %s\n", argv[a]);
      return 2;
    }
    selected[static_cast<std::size_t>(k - 1)] = true;
  }
  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    if (!selected[k]) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("criterion %zu %-22s %s  (%.1fs)  %s\n", k + 1, criteria[k].first.c_str(), o.pass ? "PASS" : "FAIL",
                secs, o.detail.c_str());
    std::fflush(stdout);
    failures += o.pass ? 0 : 1;
  }
  if (argc == 1) fs::remove_all(dir);
  return failures == 0 ? 0 : 1;
}
