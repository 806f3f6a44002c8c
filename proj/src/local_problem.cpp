#include "wbary/local_problem.hpp"

#include <cmath>
#include <stdexcept>

namespace wbary {

MeasureDualOracle::MeasureDualOracle(Measure measure, std::shared_ptr<const SupportGrid> grid,
                                     double beta, CostModel cost)
    : measure_(std::move(measure)), grid_(std::move(grid)), beta_(beta), cost_(cost) {
  if (!grid_) throw std::invalid_argument("MeasureDualOracle: null grid");
  if (!(beta_ > 0.0) || !std::isfinite(beta_))
    throw std::invalid_argument("MeasureDualOracle: beta must be positive and finite");
  if (measure_.dim() != grid_->dim())
    throw std::invalid_argument("MeasureDualOracle: measure and grid dimensions differ");
}

Vector MeasureDualOracle::gradient(const Vector& eta_bar, int batch, RngStream& rng) const {
  return stochastic_grad(measure_, *grid_, eta_bar, beta_, batch, rng, cost_).mean_gradient;
}

LocalEvaluation MeasureDualOracle::evaluate(const Vector& eta_bar, int samples,
                                            RngStream& rng) const {
  if (samples < 1) throw std::invalid_argument("evaluate: samples must be >= 1");
  if (eta_bar.size() != grid_->size())
    throw std::invalid_argument("evaluate: dual vector does not match the grid");
  LocalEvaluation out{0.0, Vector::Zero(grid_->size())};
  for (int s = 0; s < samples; ++s) {
    const Vector y = sample_measure(measure_, rng);
    const Vector c = cost_column(*grid_, y, cost_);
    out.value += smoothed_max(eta_bar, c, beta_);
    out.primal += softmax_primal(eta_bar, c, beta_);
  }
  out.value /= samples;
  out.primal /= samples;
  return out;
}

QuadraticLocalOracle::QuadraticLocalOracle(Vector b, double mu, double noise_std)
    : b_(std::move(b)), mu_(mu), noise_std_(noise_std) {
  if (b_.size() == 0) throw std::invalid_argument("QuadraticLocalOracle: empty b");
  if (!(mu_ > 0.0)) throw std::invalid_argument("QuadraticLocalOracle: mu must be positive");
  if (!(noise_std_ >= 0.0)) throw std::invalid_argument("QuadraticLocalOracle: noise_std must be >= 0");
}

Vector QuadraticLocalOracle::gradient(const Vector& eta_bar, int batch, RngStream& rng) const {
  if (batch < 1) throw std::invalid_argument("gradient: batch must be >= 1");
  Vector g = b_ + eta_bar / mu_;
  if (noise_std_ > 0.0) {
    const double scale = noise_std_ / std::sqrt(static_cast<double>(batch));
    for (Eigen::Index l = 0; l < g.size(); ++l) g(l) += scale * rng.normal();
  }
  return g;
}

LocalEvaluation QuadraticLocalOracle::evaluate(const Vector& eta_bar, int, RngStream&) const {
  return {eta_bar.dot(b_) + eta_bar.squaredNorm() / (2.0 * mu_), b_ + eta_bar / mu_};
}

}  // namespace wbary
