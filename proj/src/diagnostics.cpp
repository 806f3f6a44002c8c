#include "wbary/diagnostics.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>

#include "wbary/transport_dual.hpp"

namespace wbary {

namespace {

std::string fmt(const char* f, double a, double b = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

SuiteResult timed(const std::string& name, const std::function<SuiteResult()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  SuiteResult r;
  try {
    r = body();
  } catch (const std::exception& e) {
    r = {name, false, std::string("exception: ") + e.what(), 0.0};
  }
  r.name = name;
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

Graph random_connected_graph(int m, double p, std::uint64_t seed) {
  return build_topology({TopologyKind::erdos_renyi, m, p, seed});
}

BlockMatrix normal_block(int n, int m, RngStream& rng, double scale = 1.0) {
  BlockMatrix x(n, m);
  for (int i = 0; i < m; ++i)
    for (int l = 0; l < n; ++l) x(l, i) = scale * rng.normal();
  return x;
}

Measure random_discrete(int atoms, RngStream& rng) {
  Matrix pts(1, atoms);
  Vector w(atoms);
  for (int a = 0; a < atoms; ++a) {
    pts(0, a) = rng.uniform();
    w(a) = 0.1 + rng.uniform();
  }
  w /= w.sum();
  w(atoms - 1) = 1.0 - w.head(atoms - 1).sum();
  return Measure::empirical(pts, w);
}

SupportGrid random_grid(int n, RngStream& rng) {
  Matrix pts(1, n);
  for (int l = 0; l < n; ++l) pts(0, l) = (l + 0.2 + 0.6 * rng.uniform()) / n;
  return SupportGrid(pts);
}

}  // namespace

SuiteResult theta_suite(const ThetaSchedule::Recursion& recursion, const std::vector<int>& ms, std::int64_t k_max) {
  return timed("theta", [&] {
    constexpr double tol = 1e-10;
    double worst_identity = 0.0;
    for (int m : ms) {
      ThetaSchedule s(m, recursion);
      for (std::int64_t k = 1; k <= k_max; ++k) {
        const double t = s.at(k);
        const double denom = static_cast<double>(k - 1 + 2 * m);
        if (!(t >= (1.0 / denom) * (1 - tol) && t <= (2.0 / denom) * (1 + tol)))
          return SuiteResult{"", false,
                             "bound violated at m=" + std::to_string(m) + ", k=" + std::to_string(k) +
                                 fmt(": theta=%.17g, k-1+2m=%.0f", t, denom),
                             0};
        const double tn = s.at(k + 1);
        const double rel = std::abs((1 - tn) / (tn * tn) - 1 / (t * t)) * (t * t);
        worst_identity = std::max(worst_identity, rel);
        if (rel > tol)
          return SuiteResult{"", false,
                             "identity violated at m=" + std::to_string(m) + ", k=" + std::to_string(k) +
                                 fmt(": relative error %.3g", rel),
                             0};
      }
    }
    return SuiteResult{"", true, fmt("worst identity error %.3g", worst_identity), 0};
  });
}

SuiteResult equivalence_suite(std::uint64_t seed, const ThetaSchedule::Recursion& recursion) {
  return timed("equivalence", [&] {
    constexpr int m = 8, n = 4, tau = 3;
    constexpr std::int64_t K = 200;
    double worst = 0.0;
    for (std::uint64_t s = 0; s < 10; ++s) {
      RngStream rng = RngStream::keyed(seed, StreamDomain::diagnostics, 1, s);
      const Graph g = random_connected_graph(m, 0.4, seed * 1000 + s);
      QuadraticConsensusProblem prob(g, 0.5 + rng.uniform(), normal_block(n, m, rng));
      QuadraticOracle oracle(prob, 0.1);
      const auto delays = DelaySchedule::random(m, tau, K + 1, seed + s);
      RunOptions opt;
      opt.iterations = K;
      opt.gamma = step_size(prob.smoothness(), tau, m);
      opt.seed = seed + 17 * s;
      opt.keep_iterates = true;
      opt.theta_recursion = recursion;
      const BlockMatrix init = normal_block(n, m, rng, 0.1);
      const auto a = run_asbcds(oracle, delays, init, opt);
      const auto p = run_pasbcds(oracle, delays, init, opt);
      for (std::size_t k = 0; k < a.eta_iterates.size(); ++k) {
        const double scale = std::max(1.0, a.eta_iterates[k].norm());
        worst = std::max(worst, (a.eta_iterates[k] - p.eta_iterates[k]).norm() / scale);
      }
    }
    return SuiteResult{"", worst <= 1e-9, fmt("max relative deviation %.3g (limit 1e-9)", worst), 0};
  });
}

SuiteResult gradient_suite(std::uint64_t seed) {
  return timed("gradient", [&] {
    double worst_fd = 0.0;
    for (int inst = 0; inst < 20; ++inst) {
      RngStream rng = RngStream::keyed(seed, StreamDomain::diagnostics, 2, static_cast<std::uint64_t>(inst));
      const int n = 2 + static_cast<int>(rng.below(4));
      const SupportGrid grid = random_grid(n, rng);
      const Measure mu = random_discrete(3 + static_cast<int>(rng.below(4)), rng);
      const RegularizationConfig reg{0.2 + 0.8 * rng.uniform(), false};
      Vector eta(n);
      for (int l = 0; l < n; ++l) eta(l) = 0.5 * rng.normal();
      const Vector grad = exact_dual(mu, grid, eta, reg).gradient;
      Vector fd(n);
      const double h = 1e-5;
      for (int l = 0; l < n; ++l) {
        Vector up = eta, dn = eta;
        up(l) += h;
        dn(l) -= h;
        fd(l) = (exact_dual(mu, grid, up, reg).value - exact_dual(mu, grid, dn, reg).value) / (2 * h);
      }
      worst_fd = std::max(worst_fd, (fd - grad).norm() / std::max(grad.norm(), 1e-12));
    }
    if (worst_fd > 1e-6) return SuiteResult{"", false, fmt("finite-difference relative error %.3g", worst_fd), 0};

    constexpr int draws = 100000;
    double worst_z = 0.0;
    for (int inst = 0; inst < 3; ++inst) {
      RngStream rng = RngStream::keyed(seed, StreamDomain::diagnostics, 3, static_cast<std::uint64_t>(inst));
      const int n = 4;
      const SupportGrid grid = random_grid(n, rng);
      const Measure mu = random_discrete(5, rng);
      const double beta = 0.3;
      Vector eta(n);
      for (int l = 0; l < n; ++l) eta(l) = 0.3 * rng.normal();
      const Vector exact = exact_dual(mu, grid, eta, {beta, false}).gradient;
      Vector sum = Vector::Zero(n), sumsq = Vector::Zero(n);
      RngStream draw = RngStream::keyed(seed, StreamDomain::diagnostics, 4, static_cast<std::uint64_t>(inst));
      for (int r = 0; r < draws; ++r) {
        const Vector g = stochastic_grad(mu, grid, eta, beta, 1, draw).mean_gradient;
        sum += g;
        sumsq += g.cwiseProduct(g);
      }
      const Vector mean = sum / draws;
      const Vector var = (sumsq / draws - mean.cwiseProduct(mean)) * (draws / (draws - 1.0));
      for (int l = 0; l < n; ++l) {
        const double se = std::sqrt(std::max(var(l), 0.0) / draws);
        const double z = std::abs(mean(l) - exact(l)) / std::max(se, 1e-300);
        worst_z = std::max(worst_z, z);
      }
    }
    return SuiteResult{"", worst_z <= 3.0,
                       fmt("finite-difference error %.3g, worst bias %.2f standard errors", worst_fd, worst_z), 0};
  });
}

SuiteResult variance_suite(std::uint64_t seed, int trials) {
  return timed("variance", [&] {
    constexpr int m = 5, n = 5;
    const Graph g = build_topology({TopologyKind::complete, m, std::nullopt, std::nullopt});
    const double lmax = lambda_max(laplacian(g));
    RngStream rng = RngStream::keyed(seed, StreamDomain::diagnostics, 5);
    const SupportGrid grid = SupportGrid::linspace(0.0, 1.0, n);
    std::vector<Measure> mus;
    for (int i = 0; i < m; ++i) mus.push_back(random_discrete(6, rng));
    const double beta = 0.5;
    const BlockMatrix eta = normal_block(n, m, rng, 0.2);
    BlockMatrix exact(n, m);
    for (int i = 0; i < m; ++i) exact.col(i) = exact_dual(mus[static_cast<std::size_t>(i)], grid, eta.col(i), {beta, false}).gradient;

    std::string detail;
    bool ok = true;
    for (int M : {1, 4, 16}) {
      double acc = 0.0;
      for (int t = 0; t < trials; ++t) {
        BlockMatrix err(n, m);
        for (int i = 0; i < m; ++i) {
          RngStream draw = RngStream::keyed(seed, StreamDomain::diagnostics, 6 + static_cast<std::uint64_t>(M),
                                            static_cast<std::uint64_t>(t), static_cast<std::uint64_t>(i));
          err.col(i) = stochastic_grad(mus[static_cast<std::size_t>(i)], grid, eta.col(i), beta, M, draw).mean_gradient -
                       exact.col(i);
        }
        acc += consensus_quadratic(g, err);
      }
      const double empirical = acc / trials;
      const double bound = 1.2 * lmax / M;
      ok = ok && empirical <= bound;
      if (!detail.empty()) detail += "; ";
      detail += fmt("M=%.0f: %.4g", M, empirical) + fmt(" vs %.4g", bound);
    }
    return SuiteResult{"", ok, detail, 0};
  });
}

SuiteResult dual_primal_suite(std::uint64_t seed) {
  return timed("dual_primal", [&] {
    double worst_primal = -1e300, worst_consensus = -1e300;
    for (std::uint64_t gi = 0; gi < 5; ++gi) {
      RngStream rng = RngStream::keyed(seed, StreamDomain::diagnostics, 20, gi);
      const int m = 3 + static_cast<int>(rng.below(8));
      const int n = 1 + static_cast<int>(rng.below(4));
      const Graph g = random_connected_graph(m, 0.5, seed * 31 + gi);
      QuadraticConsensusProblem prob(g, 0.5 + 1.5 * rng.uniform(), normal_block(n, m, rng));
      const BlockMatrix x_star = prob.optimal_primal();
      const double phi_star = prob.optimal_value();
      for (int t = 0; t < 100; ++t) {
        const BlockMatrix eta = normal_block(n, m, rng, 0.1 + 0.9 * rng.uniform());
        const auto ev = prob.evaluate(eta);
        const double gap = ev.value - phi_star;
        worst_primal = std::max(worst_primal, (ev.primal - x_star).squaredNorm() - (2.0 / prob.mu()) * gap);
        worst_consensus = std::max(worst_consensus, consensus_quadratic(g, ev.primal) -
                                                        (2.0 * prob.lambda_max() / prob.mu()) * gap);
      }
    }
    const bool ok = worst_primal <= 1e-9 && worst_consensus <= 1e-9;
    return SuiteResult{"", ok, fmt("worst slack use: primal %.3g, consensus %.3g (limit 1e-9)", worst_primal, worst_consensus), 0};
  });
}

std::vector<SuiteResult> run_diagnostics(const DiagnosticsOptions& options) {
  return {theta_suite(options.theta_recursion), equivalence_suite(options.seed, options.theta_recursion),
          gradient_suite(options.seed), variance_suite(options.seed), dual_primal_suite(options.seed)};
}

}  // namespace wbary
