#pragma once

#include <memory>

#include "wbary/transport_dual.hpp"

namespace wbary {

struct LocalEvaluation {
  double value = 0.0;
  Vector primal;
};

/// What one node knows about its own term of the dual: a stochastic gradient
/// oracle and a Monte-Carlo evaluator. The gradient is the node's primal
/// estimate, so `evaluate` returns both.
class LocalDualOracle {
 public:
  virtual ~LocalDualOracle() = default;

  virtual int dim() const = 0;
  virtual Vector gradient(const Vector& eta_bar, int batch, RngStream& rng) const = 0;
  virtual LocalEvaluation evaluate(const Vector& eta_bar, int samples, RngStream& rng) const = 0;
};

/// Entropic semi-discrete transport from a measure onto a fixed grid.
class MeasureDualOracle final : public LocalDualOracle {
 public:
  MeasureDualOracle(Measure measure, std::shared_ptr<const SupportGrid> grid, double beta,
                    CostModel cost = {});

  int dim() const override { return grid_->size(); }
  Vector gradient(const Vector& eta_bar, int batch, RngStream& rng) const override;
  /// Average of smoothed_max (entropy constant excluded) and of softmax_primal
  /// over the same `samples` draws.
  LocalEvaluation evaluate(const Vector& eta_bar, int samples, RngStream& rng) const override;

  const Measure& measure() const { return measure_; }
  const SupportGrid& grid() const { return *grid_; }
  double beta() const { return beta_; }

 private:
  Measure measure_;
  std::shared_ptr<const SupportGrid> grid_;
  double beta_;
  CostModel cost_;
};

/// F*(y) = <y, b> + ||y||^2 / (2 mu), the conjugate of (mu/2)||x - b||^2.
/// Gradients carry additive N(0, noise_std^2) noise per coordinate and batch
/// averaging divides the variance by the batch size.
class QuadraticLocalOracle final : public LocalDualOracle {
 public:
  QuadraticLocalOracle(Vector b, double mu, double noise_std);

  int dim() const override { return static_cast<int>(b_.size()); }
  Vector gradient(const Vector& eta_bar, int batch, RngStream& rng) const override;
  LocalEvaluation evaluate(const Vector& eta_bar, int samples, RngStream& rng) const override;

  const Vector& b() const { return b_; }
  double mu() const { return mu_; }
  double noise_std() const { return noise_std_; }

 private:
  Vector b_;
  double mu_;
  double noise_std_;
};

}  // namespace wbary
