#include "wbary/optimizer_core.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>
#include <string>

#include "wbary/errors.hpp"

namespace wbary {

double theta_next(double theta) {
  if (!(theta > 0.0 && theta <= 1.0)) throw std::invalid_argument("theta_next: theta must lie in (0, 1]");
  // Same root as (sqrt(t^4 + 4 t^2) - t^2) / 2, written without cancellation.
  return 2.0 * theta / (std::sqrt(theta * theta + 4.0) + theta);
}

ThetaSchedule::ThetaSchedule(int m, Recursion recursion) : m_(m), recursion_(std::move(recursion)) {
  if (m < 1) throw std::invalid_argument("ThetaSchedule: m must be positive");
  cache_.push_back(1.0 / m);
}

double ThetaSchedule::at(std::int64_t k) {
  if (k < 1) throw std::invalid_argument("ThetaSchedule: index starts at 1");
  while (static_cast<std::int64_t>(cache_.size()) < k) cache_.push_back(recursion_(cache_.back()));
  return cache_[k - 1];
}

double step_size(double smoothness, int tau, int m) {
  if (!(smoothness > 0.0)) throw std::invalid_argument("step_size: smoothness must be positive");
  if (m < 1) throw std::invalid_argument("step_size: m must be positive");
  if (tau < 0) throw std::invalid_argument("step_size: tau must be nonnegative");
  if (tau > m) throw std::invalid_argument("step_size: staleness bound tau must not exceed m");
  const double t = static_cast<double>(tau);
  const double spread = (t * t + t) / m + 2.0 * t;
  return 1.0 / (smoothness * (3.0 + 12.0 * spread * spread));
}

std::int64_t batch_size(std::int64_t k, int m, double sigma2, double epsilon, double smoothness) {
  if (!(epsilon > 0.0) || !(smoothness > 0.0) || sigma2 < 0.0 || m < 1 || k < 0)
    throw std::invalid_argument("batch_size: need eps > 0, L > 0, sigma2 >= 0, m >= 1, k >= 0");
  const double raw = 8.0 * sigma2 * static_cast<double>(k + 2 * static_cast<std::int64_t>(m)) /
                     (m * smoothness * epsilon);
  // Guard against 160.00000000000003-style round-up.
  const double rounded = std::ceil(raw * (1.0 - 1e-12));
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(rounded));
}

// ---------------------------------------------------------------------------

DelaySchedule::DelaySchedule(int m, int tau, std::int64_t iterations, std::vector<std::int64_t> reads)
    : m_(m), tau_(tau), iterations_(iterations), reads_(std::move(reads)) {
  validate();
}

DelaySchedule DelaySchedule::fresh(int m, std::int64_t iterations) {
  if (m < 1 || iterations < 0) throw std::invalid_argument("DelaySchedule: bad dimensions");
  std::vector<std::int64_t> reads(static_cast<std::size_t>(iterations) * m);
  for (std::int64_t k = 0; k < iterations; ++k)
    for (int p = 0; p < m; ++p) reads[k * m + p] = k;
  return DelaySchedule(m, 0, iterations, std::move(reads));
}

DelaySchedule DelaySchedule::random(int m, int tau, std::int64_t iterations, std::uint64_t seed) {
  if (m < 1 || iterations < 0 || tau < 0) throw std::invalid_argument("DelaySchedule: bad dimensions");
  std::vector<std::int64_t> reads(static_cast<std::size_t>(iterations) * m);
  std::vector<std::int64_t> previous(m, 0);
  for (std::int64_t k = 0; k < iterations; ++k) {
    for (int p = 0; p < m; ++p) {
      auto rng = RngStream::keyed(seed, StreamDomain::delay_schedule, k, p);
      const auto lag = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(tau) + 1));
      const std::int64_t j = std::max(previous[p], std::max<std::int64_t>(0, k - lag));
      reads[k * m + p] = j;
      previous[p] = j;
    }
  }
  return DelaySchedule(m, tau, iterations, std::move(reads));
}

DelaySchedule DelaySchedule::from_table(int m, int tau,
                                        const std::vector<std::vector<std::int64_t>>& table) {
  std::vector<std::int64_t> reads;
  reads.reserve(table.size() * m);
  for (const auto& row : table) {
    if (static_cast<int>(row.size()) != m) throw ScheduleError("DelaySchedule: row width must equal m");
    reads.insert(reads.end(), row.begin(), row.end());
  }
  return DelaySchedule(m, tau, static_cast<std::int64_t>(table.size()), std::move(reads));
}

void DelaySchedule::validate() const {
  if (m_ < 1 || tau_ < 0) throw ScheduleError("DelaySchedule: need m >= 1 and tau >= 0");
  for (int p = 0; p < m_; ++p) {
    std::int64_t previous = 0;
    for (std::int64_t k = 0; k < iterations_; ++k) {
      const std::int64_t j = reads_[k * m_ + p];
      if (j > k || j < std::max<std::int64_t>(0, k - tau_))
        throw ScheduleError("DelaySchedule: read index of block " + std::to_string(p) + " at iteration " +
                            std::to_string(k) + " is outside the staleness window");
      if (j < previous)
        throw ScheduleError("DelaySchedule: read index of block " + std::to_string(p) + " decreases");
      previous = j;
    }
  }
}

std::int64_t DelaySchedule::read_index(int p, std::int64_t k) const {
  if (p < 0 || p >= m_ || k < 0 || k >= iterations_)
    throw ScheduleError("DelaySchedule: query outside the scheduled range");
  return reads_[k * m_ + p];
}

// ---------------------------------------------------------------------------

QuadraticConsensusProblem::QuadraticConsensusProblem(Graph graph, double mu, BlockMatrix b)
    : graph_(std::move(graph)), mu_(mu), b_(std::move(b)) {
  if (!(mu_ > 0.0)) throw std::invalid_argument("quadratic problem: mu must be positive");
  if (b_.cols() != graph_.size() || b_.rows() < 1)
    throw std::invalid_argument("quadratic problem: b needs one block per node");
  laplacian_ = wbary::laplacian(graph_);
  sqrt_w_ = sqrt_laplacian(laplacian_);
  sqrt_w_b_ = b_ * sqrt_w_;
  lambda_max_ = wbary::lambda_max(laplacian_);
}

QuadraticConsensusProblem::Evaluation QuadraticConsensusProblem::evaluate(const BlockMatrix& eta) const {
  if (eta.rows() != b_.rows() || eta.cols() != b_.cols())
    throw std::invalid_argument("quadratic problem: eta has wrong shape");
  const BlockMatrix s = eta * sqrt_w_;
  Evaluation out;
  out.value = s.squaredNorm() / (2.0 * mu_) + (s.array() * b_.array()).sum();
  out.primal = b_ + s / mu_;
  out.gradient = out.primal * sqrt_w_;
  return out;
}

Vector QuadraticConsensusProblem::partial_gradient(const BlockMatrix& eta, int block) const {
  return sqrt_w_b_.col(block) + eta * laplacian_.col(block) / mu_;
}

double QuadraticConsensusProblem::optimal_value() const {
  const BlockMatrix centered = b_.colwise() - b_.rowwise().mean();
  return -0.5 * mu_ * centered.squaredNorm();
}

BlockMatrix QuadraticConsensusProblem::optimal_primal() const {
  return b_.rowwise().mean().replicate(1, b_.cols());
}

QuadraticConsensusProblem::Evaluation quadratic_dual_eval(const QuadraticConsensusProblem& prob,
                                                          const BlockMatrix& eta) {
  return prob.evaluate(eta);
}

QuadraticOracle::QuadraticOracle(const QuadraticConsensusProblem& problem, double noise_std)
    : problem_(&problem), noise_std_(noise_std) {
  if (noise_std < 0.0) throw std::invalid_argument("quadratic oracle: noise_std must be nonnegative");
}

int QuadraticOracle::blocks() const { return problem_->graph().size(); }
int QuadraticOracle::block_dim() const { return static_cast<int>(problem_->b().rows()); }

Vector QuadraticOracle::partial_gradient(const BlockMatrix& point, int block, RngStream& rng) const {
  Vector g = problem_->partial_gradient(point, block);
  if (noise_std_ > 0.0)
    for (Eigen::Index l = 0; l < g.size(); ++l) g(l) += noise_std_ * rng.normal();
  return g;
}

double QuadraticOracle::variance_bound() const {
  return static_cast<double>(blocks()) * block_dim() * noise_std_ * noise_std_;
}

std::optional<double> QuadraticOracle::value(const BlockMatrix& point) const {
  return problem_->evaluate(point).value;
}

// ---------------------------------------------------------------------------

BlockMatrix compensated_iterate(const AsbcdsState& state, ThetaSchedule& thetas, std::int64_t k,
                                const DelaySchedule& delays) {
  if (k < 0 || static_cast<std::int64_t>(state.eta.size()) <= k ||
      static_cast<std::int64_t>(state.zeta.size()) <= k)
    throw ScheduleError("compensated_iterate: histories do not reach iteration k");
  const BlockMatrix& latest = state.eta[k];
  BlockMatrix omega(latest.rows(), latest.cols());
  for (int p = 0; p < static_cast<int>(latest.cols()); ++p) {
    const std::int64_t j = delays.read_index(p, k);
    if (j > k || j < 0) throw ScheduleError("compensated_iterate: read index outside history");
    // rho_i = prod_{l=j}^{i} d_l with d_l = theta_{l+1} (1 - theta_l) / theta_l. The
    // correction direction is theta_j / (1 - theta_j) * (zeta_j - eta_j): it equals
    // lambda_j - eta_{j-1} whenever block p was idle at iteration j - 1 and stays exact
    // when block p was the one updated there. That factor cancels the
    // (1 - theta_j) / theta_j inside d_j, leaving theta_{j+1} as the first term.
    double rho = thetas.at(j + 1);
    double weight = 0.0;
    for (std::int64_t i = j; i <= k; ++i) {
      if (i > j) {
        const double theta_i = thetas.at(i);
        rho *= thetas.at(i + 1) * (1.0 - theta_i) / theta_i;
      }
      weight += rho;
    }
    omega.col(p) = state.eta[j].col(p) + weight * (state.zeta[j].col(p) - state.eta[j].col(p));
  }
  return omega;
}

void pasbcds_step(PasbcdsState& state, int block, const Vector& gradient, double theta, double gamma,
                  int m) {
  if (gradient.size() != state.u.rows()) throw std::invalid_argument("pasbcds_step: gradient has wrong length");
  if (block < 0 || block >= state.u.cols()) throw std::invalid_argument("pasbcds_step: block out of range");
  const Vector delta = (gamma / (m * theta)) * gradient;
  state.u.col(block) -= delta;
  state.v.col(block) += ((1.0 - m * theta) / (theta * theta)) * delta;
}

int select_block(std::uint64_t seed, std::int64_t k, int m) {
  auto rng = RngStream::keyed(seed, StreamDomain::block_select, static_cast<std::uint64_t>(k));
  return static_cast<int>(rng.below(static_cast<std::uint64_t>(m)));
}

RngStream oracle_stream(std::uint64_t seed, std::int64_t k) {
  return RngStream::keyed(seed, StreamDomain::oracle, static_cast<std::uint64_t>(k));
}

namespace {

void check_run_inputs(const StochasticOracle& oracle, const DelaySchedule& delays,
                      const BlockMatrix& initial, const RunOptions& options) {
  if (initial.rows() != oracle.block_dim() || initial.cols() != oracle.blocks())
    throw std::invalid_argument("solver: initial point has wrong shape");
  if (delays.blocks() != oracle.blocks()) throw ScheduleError("solver: delay schedule has wrong block count");
  if (options.iterations < 0) throw std::invalid_argument("solver: iteration count must be nonnegative");
  if (delays.iterations() < options.iterations + 1)
    throw ScheduleError("solver: delay schedule shorter than the run");
  if (!(options.gamma > 0.0)) throw std::invalid_argument("solver: gamma must be positive");
}

std::int64_t max_staleness(const DelaySchedule& delays, std::int64_t k) {
  std::int64_t worst = 0;
  for (int p = 0; p < delays.blocks(); ++p) worst = std::max(worst, delays.staleness(p, k));
  return worst;
}

}  // namespace

RunResult run_asbcds(const StochasticOracle& oracle, const DelaySchedule& delays,
                     const BlockMatrix& initial, const RunOptions& options) {
  check_run_inputs(oracle, delays, initial, options);
  const int m = oracle.blocks();
  ThetaSchedule thetas(m, options.theta_recursion);
  AsbcdsState state;
  state.eta.push_back(initial);
  state.zeta.push_back(initial);
  state.lambda.push_back(initial);

  RunResult result;
  for (std::int64_t k = 0; k <= options.iterations; ++k) {
    const double theta = thetas.at(k + 1);
    state.lambda.push_back(theta * state.zeta[k] + (1.0 - theta) * state.eta[k]);
    const BlockMatrix omega = compensated_iterate(state, thetas, k, delays);

    const int block = select_block(options.seed, k, m);
    auto rng = oracle_stream(options.seed, k);
    const Vector g = oracle.partial_gradient(omega, block, rng);

    BlockMatrix zeta = state.zeta[k];
    zeta.col(block) -= (options.gamma / (m * theta)) * g;
    BlockMatrix eta = state.lambda[k + 1] + (m * theta) * (zeta - state.zeta[k]);
    state.zeta.push_back(std::move(zeta));
    state.eta.push_back(std::move(eta));

    IterationRecord rec{k, block, max_staleness(delays, k), std::nullopt};
    if (options.record_objective) rec.objective = oracle.value(state.eta.back());
    result.records.push_back(rec);
    if (options.keep_iterates) {
      result.eta_iterates.push_back(state.eta.back());
      result.zeta_iterates.push_back(state.zeta.back());
    }
  }
  result.final_eta = state.eta.back();
  return result;
}

RunResult run_pasbcds(const StochasticOracle& oracle, const DelaySchedule& delays,
                      const BlockMatrix& initial, const RunOptions& options) {
  check_run_inputs(oracle, delays, initial, options);
  const int m = oracle.blocks();
  const int tau = delays.tau();
  ThetaSchedule thetas(m, options.theta_recursion);

  PasbcdsState state{initial, BlockMatrix::Zero(initial.rows(), initial.cols()),
                     std::vector<std::int64_t>(m, 0)};
  struct Snapshot {
    std::int64_t iteration;
    Vector u, v;
  };
  std::vector<std::deque<Snapshot>> snapshots(m);
  for (int p = 0; p < m; ++p) snapshots[p].push_back({0, state.u.col(p), state.v.col(p)});

  RunResult result;
  BlockMatrix omega(initial.rows(), initial.cols());
  for (std::int64_t k = 0; k <= options.iterations; ++k) {
    const double theta = thetas.at(k + 1);
    for (int p = 0; p < m; ++p) {
      const std::int64_t j = delays.read_index(p, k);
      const auto& history = snapshots[p];
      auto it = std::upper_bound(history.begin(), history.end(), j,
                                 [](std::int64_t value, const Snapshot& s) { return value < s.iteration; });
      if (it == history.begin()) throw ScheduleError("run_pasbcds: snapshot for read index was discarded");
      const Snapshot& snap = *std::prev(it);
      omega.col(p) = snap.u + theta * theta * snap.v;
    }

    const int block = select_block(options.seed, k, m);
    auto rng = oracle_stream(options.seed, k);
    const Vector g = oracle.partial_gradient(omega, block, rng);
    pasbcds_step(state, block, g, theta, options.gamma, m);
    state.last_write[block] = k + 1;

    auto& history = snapshots[block];
    history.push_back({k + 1, state.u.col(block), state.v.col(block)});
    const std::int64_t oldest_needed = k + 1 - tau;
    for (auto& h : snapshots)
      while (h.size() >= 2 && h[1].iteration <= oldest_needed) h.pop_front();

    IterationRecord rec{k, block, max_staleness(delays, k), std::nullopt};
    const bool need_eta = options.keep_iterates || options.record_objective;
    if (need_eta) {
      const BlockMatrix eta = state.u + theta * theta * state.v;
      if (options.record_objective) rec.objective = oracle.value(eta);
      if (options.keep_iterates) {
        result.eta_iterates.push_back(eta);
        result.zeta_iterates.push_back(state.u);
      }
    }
    result.records.push_back(rec);
  }
  const double last_theta = thetas.at(options.iterations + 1);
  result.final_eta = state.u + last_theta * last_theta * state.v;
  return result;
}

}  // namespace wbary
