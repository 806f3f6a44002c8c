#pragma once

#include <variant>

#include "wbary/graph_topology.hpp"
#include "wbary/rng.hpp"

namespace wbary {

/// Fixed barycenter support z_1..z_n, stored as a d x n matrix.
class SupportGrid {
 public:
  explicit SupportGrid(Matrix points);

  /// n equally spaced points on [lo, hi] (both endpoints included).
  static SupportGrid linspace(double lo, double hi, int n);

  int size() const { return static_cast<int>(points_.cols()); }
  int dim() const { return static_cast<int>(points_.rows()); }
  const Matrix& points() const { return points_; }

 private:
  Matrix points_;
};

struct Gaussian1d {
  double mean = 0.0;
  double stddev = 1.0;
};

/// Weighted atoms (d x K) with a cached cumulative distribution.
struct EmpiricalDiscrete {
  Matrix atoms;
  Vector weights;
  Vector cdf;
};

class Measure {
 public:
  static Measure gaussian_1d(double mean, double stddev);
  /// Weights must be nonnegative and sum to 1 within 1e-12.
  static Measure empirical(Matrix atoms, Vector weights);

  bool is_discrete() const { return std::holds_alternative<EmpiricalDiscrete>(law_); }
  int dim() const;
  const Gaussian1d* gaussian() const { return std::get_if<Gaussian1d>(&law_); }
  const EmpiricalDiscrete* discrete() const { return std::get_if<EmpiricalDiscrete>(&law_); }

 private:
  explicit Measure(std::variant<Gaussian1d, EmpiricalDiscrete> law) : law_(std::move(law)) {}
  std::variant<Gaussian1d, EmpiricalDiscrete> law_;
};

/// c(z, y) = ||z - y||^power. power = 2 is the squared Euclidean default.
struct CostModel {
  double power = 2.0;
};

struct RegularizationConfig {
  double beta = 1.0;
  /// Adds the eta-independent beta * entropy(mu) term of the dual.
  bool include_entropy_constant = false;

  void validate() const;
};

Vector cost_column(const SupportGrid& grid, const Vector& y, const CostModel& cost = {});

/// Softmax of (eta - costs) / beta with max subtraction.
Vector softmax_primal(const Vector& eta, const Vector& costs, double beta);

/// beta * log sum_l exp((eta_l - c_l) / beta), stabilized.
double smoothed_max(const Vector& eta, const Vector& costs, double beta);

struct GradientSample {
  Vector mean_gradient;
  int samples_used = 0;
};

Vector sample_measure(const Measure& mu, RngStream& rng);

/// Average of `batch` softmax draws at independent samples of mu.
GradientSample stochastic_grad(const Measure& mu, const SupportGrid& grid, const Vector& eta,
                               double beta, int batch, RngStream& rng, const CostModel& cost = {});

struct DualEvaluation {
  double value = 0.0;
  Vector gradient;
};

/// Closed-form dual value and gradient for a discrete measure.
DualEvaluation exact_dual(const Measure& mu, const SupportGrid& grid, const Vector& eta,
                          const RegularizationConfig& reg, const CostModel& cost = {});

/// Monte-Carlo dual value over `samples` draws. The entropy constant is added
/// in closed form when requested (differential entropy for Gaussians).
double dual_value_mc(const Measure& mu, const SupportGrid& grid, const Vector& eta,
                     const RegularizationConfig& reg, int samples, RngStream& rng,
                     const CostModel& cost = {});

/// beta * entropy(mu): Shannon entropy for discrete, differential for Gaussian.
double entropy_constant(const Measure& mu, double beta);

}  // namespace wbary
