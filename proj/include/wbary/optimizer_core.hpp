#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "wbary/graph_topology.hpp"
#include "wbary/rng.hpp"

namespace wbary {

// ---------------------------------------------------------------------------
// theta sequence

/// One step of the theta recursion: (sqrt(t^4 + 4 t^2) - t^2) / 2.
/// The result satisfies (1 - t') / t'^2 = 1 / t^2. Requires 0 < t <= 1.
double theta_next(double theta);

/// theta_k for k >= 1 with theta_1 = 1/m, cached as it is extended.
class ThetaSchedule {
 public:
  using Recursion = std::function<double(double)>;

  /// `recursion` replaces theta_next; only diagnostics negative controls use it.
  explicit ThetaSchedule(int m, Recursion recursion = theta_next);

  /// theta_k, k >= 1.
  double at(std::int64_t k);
  int blocks() const { return m_; }

 private:
  int m_;
  Recursion recursion_;
  std::vector<double> cache_;  // cache_[k - 1] = theta_k
};

// ---------------------------------------------------------------------------
// step and batch sizes

/// Largest gamma with 3 L gamma + 12 L gamma ((tau^2 + tau)/m + 2 tau)^2 <= 1.
/// Throws std::invalid_argument when tau > m.
double step_size(double smoothness, int tau, int m);

/// max(1, ceil(8 sigma^2 (k + 2m) / (m L eps))).
std::int64_t batch_size(std::int64_t k, int m, double sigma2, double epsilon, double smoothness);

// ---------------------------------------------------------------------------
// delays

/// Read indices j_p(k+1): the iteration whose snapshot of block p is used
/// when forming the gradient point of iteration k. Valid schedules satisfy
/// max(0, k - tau) <= j_p(k+1) <= k and are nondecreasing in k.
class DelaySchedule {
 public:
  /// Always-fresh reads (tau = 0).
  static DelaySchedule fresh(int m, std::int64_t iterations);
  /// Per-block uniform staleness in [0, tau], repaired to be monotone.
  static DelaySchedule random(int m, int tau, std::int64_t iterations, std::uint64_t seed);
  /// reads[k][p] = j_p(k+1). Throws ScheduleError if invalid.
  static DelaySchedule from_table(int m, int tau, const std::vector<std::vector<std::int64_t>>& reads);

  int tau() const { return tau_; }
  int blocks() const { return m_; }
  std::int64_t iterations() const { return iterations_; }

  /// j_p(k+1). Throws ScheduleError outside the scheduled range.
  std::int64_t read_index(int p, std::int64_t k) const;
  std::int64_t staleness(int p, std::int64_t k) const { return k - read_index(p, k); }

 private:
  DelaySchedule(int m, int tau, std::int64_t iterations, std::vector<std::int64_t> reads);
  void validate() const;

  int m_;
  int tau_;
  std::int64_t iterations_;
  std::vector<std::int64_t> reads_;  // row-major [k][p]
};

// ---------------------------------------------------------------------------
// oracles

/// Stochastic first-order access to a block-structured dual objective.
/// Contract: partial gradients are unbiased and, summed over blocks, have
/// variance at most variance_bound().
class StochasticOracle {
 public:
  virtual ~StochasticOracle() = default;
  virtual int blocks() const = 0;
  virtual int block_dim() const = 0;
  virtual Vector partial_gradient(const BlockMatrix& point, int block, RngStream& rng) const = 0;
  virtual double variance_bound() const { return 0.0; }
  /// Objective value, when cheaply available.
  virtual std::optional<double> value(const BlockMatrix&) const { return std::nullopt; }
};

/// Quadratic consensus problem F(x) = mu/2 ||x - b||^2 s.t. sqrt(W) x = 0,
/// with dual phi(eta) = ||sqrt(W) eta||^2 / (2 mu) + <sqrt(W) eta, b>.
class QuadraticConsensusProblem {
 public:
  QuadraticConsensusProblem(Graph graph, double mu, BlockMatrix b);

  struct Evaluation {
    double value;
    BlockMatrix gradient;  // sqrt(W) x*
    BlockMatrix primal;    // x* = b + sqrt(W) eta / mu
  };

  Evaluation evaluate(const BlockMatrix& eta) const;
  /// Partial gradient of block i: [sqrt(W) b]_i + [W eta]_i / mu.
  Vector partial_gradient(const BlockMatrix& eta, int block) const;

  /// min phi = -mu/2 ||P b||^2 where P removes the across-node mean.
  double optimal_value() const;
  /// Consensus optimum: every block equals the node average of b.
  BlockMatrix optimal_primal() const;

  const Graph& graph() const { return graph_; }
  double mu() const { return mu_; }
  const BlockMatrix& b() const { return b_; }
  const Matrix& laplacian() const { return laplacian_; }
  const Matrix& sqrt_w() const { return sqrt_w_; }
  double lambda_max() const { return lambda_max_; }
  /// L = lambda_max(W) / mu.
  double smoothness() const { return lambda_max_ / mu_; }

 private:
  Graph graph_;
  double mu_;
  BlockMatrix b_;
  Matrix laplacian_;
  Matrix sqrt_w_;
  BlockMatrix sqrt_w_b_;
  double lambda_max_;
};

/// Closed-form dual evaluation (value, gradient, primal) of the quadratic problem.
QuadraticConsensusProblem::Evaluation quadratic_dual_eval(const QuadraticConsensusProblem& prob,
                                                          const BlockMatrix& eta);

/// Quadratic oracle with optional additive N(0, noise_std^2) noise per entry.
class QuadraticOracle final : public StochasticOracle {
 public:
  explicit QuadraticOracle(const QuadraticConsensusProblem& problem, double noise_std = 0.0);
  int blocks() const override;
  int block_dim() const override;
  Vector partial_gradient(const BlockMatrix& point, int block, RngStream& rng) const override;
  double variance_bound() const override;
  std::optional<double> value(const BlockMatrix& point) const override;

 private:
  const QuadraticConsensusProblem* problem_;
  double noise_std_;
};

// ---------------------------------------------------------------------------
// ASBCDS / PASBCDS

struct AsbcdsState {
  // Index k holds eta_k, zeta_k, lambda_k (lambda_0 = eta_0).
  std::vector<BlockMatrix> eta, zeta, lambda;
};

/// Stale-read gradient point omega_{j(k+1)} formed from ASBCDS histories
/// through iteration k, compensated with the running rho-products of d_l.
BlockMatrix compensated_iterate(const AsbcdsState& state, ThetaSchedule& thetas, std::int64_t k,
                                const DelaySchedule& delays);

struct PasbcdsState {
  BlockMatrix u, v;
  /// Per-block iteration index of the most recent write (0 = initial).
  std::vector<std::int64_t> last_write;
};

/// One PASBCDS block update: delta = gamma / (m theta) g,
/// u_i -= delta, v_i += (1 - m theta) / theta^2 delta.
void pasbcds_step(PasbcdsState& state, int block, const Vector& gradient, double theta,
                  double gamma, int m);

struct IterationRecord {
  std::int64_t k = 0;
  int block = 0;
  std::int64_t max_staleness = 0;
  std::optional<double> objective;  // phi(eta_{k+1}) when recorded
};

struct RunOptions {
  /// Runs iterations k = 0..iterations (inclusive) and returns eta_{iterations+1}.
  std::int64_t iterations = 0;
  double gamma = 0.0;
  std::uint64_t seed = 0;
  bool keep_iterates = false;
  bool record_objective = false;
  /// Overrides the theta recursion (negative-control hook).
  ThetaSchedule::Recursion theta_recursion = theta_next;
};

struct RunResult {
  BlockMatrix final_eta;
  std::vector<IterationRecord> records;
  /// With keep_iterates: eta_1..eta_{K+1} and zeta_1..zeta_{K+1} (u for PASBCDS).
  std::vector<BlockMatrix> eta_iterates;
  std::vector<BlockMatrix> zeta_iterates;
};

/// Block index drawn at iteration k; shared by both solvers so matched runs
/// see the same i_k.
int select_block(std::uint64_t seed, std::int64_t k, int m);
/// Oracle stream for iteration k (the xi_{k+1} draw).
RngStream oracle_stream(std::uint64_t seed, std::int64_t k);

/// History-based reference solver (memory O(K m n)).
RunResult run_asbcds(const StochasticOracle& oracle, const DelaySchedule& delays,
                     const BlockMatrix& initial, const RunOptions& options);

/// Practical solver; keeps only the per-block snapshots the delay window needs.
RunResult run_pasbcds(const StochasticOracle& oracle, const DelaySchedule& delays,
                      const BlockMatrix& initial, const RunOptions& options);

}  // namespace wbary
