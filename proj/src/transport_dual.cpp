#include "wbary/transport_dual.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "wbary/errors.hpp"

namespace wbary {

SupportGrid::SupportGrid(Matrix points) : points_(std::move(points)) {
  if (points_.cols() < 1 || points_.rows() < 1)
    throw std::invalid_argument("support grid: need at least one point of positive dimension");
  if (!points_.allFinite()) throw std::invalid_argument("support grid: points must be finite");
  for (Eigen::Index a = 0; a < points_.cols(); ++a)
    for (Eigen::Index b = a + 1; b < points_.cols(); ++b)
      if (points_.col(a) == points_.col(b))
        throw std::invalid_argument("support grid: points must be pairwise distinct");
}

SupportGrid SupportGrid::linspace(double lo, double hi, int n) {
  if (n < 1) throw std::invalid_argument("support grid: n must be positive");
  if (n > 1 && !(hi > lo)) throw std::invalid_argument("support grid: need lo < hi");
  Matrix pts(1, n);
  if (n == 1) {
    pts(0, 0) = lo;
  } else {
    const double step = (hi - lo) / (n - 1);
    for (int l = 0; l < n; ++l) pts(0, l) = lo + step * l;
    pts(0, n - 1) = hi;
  }
  return SupportGrid(std::move(pts));
}

Measure Measure::gaussian_1d(double mean, double stddev) {
  if (!std::isfinite(mean)) throw std::invalid_argument("gaussian measure: mean must be finite");
  if (!(stddev > 0.0) || !std::isfinite(stddev))
    throw std::invalid_argument("gaussian measure: std must be positive");
  return Measure(Gaussian1d{mean, stddev});
}

Measure Measure::empirical(Matrix atoms, Vector weights) {
  if (atoms.cols() < 1 || atoms.cols() != weights.size())
    throw std::invalid_argument("discrete measure: need one weight per atom");
  if (!atoms.allFinite() || !weights.allFinite())
    throw std::invalid_argument("discrete measure: atoms and weights must be finite");
  if ((weights.array() < 0.0).any()) throw std::invalid_argument("discrete measure: negative weight");
  if (std::abs(weights.sum() - 1.0) > 1e-12)
    throw std::invalid_argument("discrete measure: weights must sum to 1");
  EmpiricalDiscrete law{std::move(atoms), std::move(weights), {}};
  law.cdf.resize(law.weights.size());
  double running = 0.0;
  for (Eigen::Index k = 0; k < law.weights.size(); ++k) {
    running += law.weights(k);
    law.cdf(k) = running;
  }
  return Measure(std::move(law));
}

int Measure::dim() const {
  if (const auto* d = discrete()) return static_cast<int>(d->atoms.rows());
  return 1;
}

void RegularizationConfig::validate() const {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw std::invalid_argument("beta must be positive");
}

Vector cost_column(const SupportGrid& grid, const Vector& y, const CostModel& cost) {
  if (y.size() != grid.dim()) throw std::invalid_argument("cost_column: dimension mismatch");
  const Matrix& z = grid.points();
  Vector out(grid.size());
  for (int l = 0; l < grid.size(); ++l) {
    const double sq = (z.col(l) - y).squaredNorm();
    out(l) = cost.power == 2.0 ? sq : std::pow(std::sqrt(sq), cost.power);
  }
  return out;
}

namespace {

void require_beta(double beta) {
  if (!(beta > 0.0)) throw std::invalid_argument("beta must be positive");
}

// Writes exp((eta - c)/beta - max) into `weights` and returns (max, sum).
std::pair<double, double> shifted_exponentials(const Vector& eta, const Vector& costs, double beta,
                                               Vector& weights) {
  if (eta.size() != costs.size() || eta.size() == 0)
    throw std::invalid_argument("softmax: eta and costs must have the same positive length");
  weights = (eta - costs) / beta;
  const double top = weights.maxCoeff();
  if (!std::isfinite(top)) throw NumericError("softmax: non-finite logits");
  weights = (weights.array() - top).exp();
  return {top, weights.sum()};
}

}  // namespace

Vector softmax_primal(const Vector& eta, const Vector& costs, double beta) {
  require_beta(beta);
  Vector w;
  auto [top, sum] = shifted_exponentials(eta, costs, beta, w);
  (void)top;
  return w / sum;
}

double smoothed_max(const Vector& eta, const Vector& costs, double beta) {
  require_beta(beta);
  Vector w;
  auto [top, sum] = shifted_exponentials(eta, costs, beta, w);
  return beta * (top + std::log(sum));
}

Vector sample_measure(const Measure& mu, RngStream& rng) {
  if (const auto* g = mu.gaussian()) {
    Vector y(1);
    y(0) = g->mean + g->stddev * rng.normal();
    return y;
  }
  const auto* d = mu.discrete();
  const double u = rng.uniform();
  // First atom whose cumulative weight exceeds u; zero-weight atoms are never hit.
  const auto* begin = d->cdf.data();
  const auto* end = begin + d->cdf.size();
  auto it = std::upper_bound(begin, end, u);
  Eigen::Index k = it == end ? d->cdf.size() - 1 : it - begin;
  while (k > 0 && d->weights(k) == 0.0) --k;
  return d->atoms.col(k);
}

GradientSample stochastic_grad(const Measure& mu, const SupportGrid& grid, const Vector& eta,
                               double beta, int batch, RngStream& rng, const CostModel& cost) {
  require_beta(beta);
  if (batch < 1) throw std::invalid_argument("stochastic_grad: batch size must be at least 1");
  if (eta.size() != grid.size()) throw std::invalid_argument("stochastic_grad: eta has wrong length");
  if (mu.dim() != grid.dim()) throw std::invalid_argument("stochastic_grad: measure/grid dimension mismatch");
  Vector acc = Vector::Zero(grid.size());
  for (int r = 0; r < batch; ++r) {
    const Vector y = sample_measure(mu, rng);
    acc += softmax_primal(eta, cost_column(grid, y, cost), beta);
  }
  return {acc / batch, batch};
}

double entropy_constant(const Measure& mu, double beta) {
  if (const auto* g = mu.gaussian())
    return beta * 0.5 * std::log(2.0 * std::numbers::pi * std::numbers::e * g->stddev * g->stddev);
  const auto* d = mu.discrete();
  double h = 0.0;
  for (Eigen::Index k = 0; k < d->weights.size(); ++k)
    if (d->weights(k) > 0.0) h -= d->weights(k) * std::log(d->weights(k));
  return beta * h;
}

DualEvaluation exact_dual(const Measure& mu, const SupportGrid& grid, const Vector& eta,
                          const RegularizationConfig& reg, const CostModel& cost) {
  reg.validate();
  const auto* d = mu.discrete();
  if (d == nullptr) throw std::invalid_argument("exact_dual: requires a discrete measure");
  if (eta.size() != grid.size()) throw std::invalid_argument("exact_dual: eta has wrong length");
  DualEvaluation out{0.0, Vector::Zero(grid.size())};
  Vector w;
  for (Eigen::Index k = 0; k < d->weights.size(); ++k) {
    const double q = d->weights(k);
    if (q == 0.0) continue;
    const Vector c = cost_column(grid, d->atoms.col(k), cost);
    auto [top, sum] = shifted_exponentials(eta, c, reg.beta, w);
    out.value += q * reg.beta * (top + std::log(sum));
    out.gradient += q * (w / sum);
  }
  if (reg.include_entropy_constant) out.value += entropy_constant(mu, reg.beta);
  return out;
}

double dual_value_mc(const Measure& mu, const SupportGrid& grid, const Vector& eta,
                     const RegularizationConfig& reg, int samples, RngStream& rng,
                     const CostModel& cost) {
  reg.validate();
  if (samples < 1) throw std::invalid_argument("dual_value_mc: sample count must be at least 1");
  if (eta.size() != grid.size()) throw std::invalid_argument("dual_value_mc: eta has wrong length");
  double acc = 0.0;
  for (int r = 0; r < samples; ++r) {
    const Vector y = sample_measure(mu, rng);
    acc += smoothed_max(eta, cost_column(grid, y, cost), reg.beta);
  }
  double value = acc / samples;
  if (reg.include_entropy_constant) value += entropy_constant(mu, reg.beta);
  return value;
}

}  // namespace wbary
