#pragma once

#include <cstdint>

#include "wbary/transport_dual.hpp"

namespace wbary {

/// Per-node barycenter estimates, column i = p_i. Each column must lie in
/// the probability simplex within 1e-10.
class PrimalSnapshot {
 public:
  static constexpr double kSimplexTolerance = 1e-10;

  explicit PrimalSnapshot(BlockMatrix weights);

  int nodes() const { return static_cast<int>(weights_.cols()); }
  int dim() const { return static_cast<int>(weights_.rows()); }
  const BlockMatrix& weights() const { return weights_; }

 private:
  BlockMatrix weights_;
};

/// M_eval-sample average of softmax draws at eta_bar. The sample stream is
/// keyed only by eval_seed, so repeated calls see the same draws.
Vector primal_estimate(const Vector& eta_bar, const Measure& mu, const SupportGrid& grid,
                       double beta, int eval_samples, std::uint64_t eval_seed,
                       const CostModel& cost = {});

/// sum over edges of ||p_i - p_j||^2.
double consensus_distance(const Graph& graph, const PrimalSnapshot& snapshot);

/// (1/2) sum_l |p_l - q_l|.
double total_variation(const Vector& p, const Vector& q);

}  // namespace wbary
