#include "wbary/metrics.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "wbary/local_problem.hpp"

namespace wbary {

PrimalSnapshot::PrimalSnapshot(BlockMatrix weights) : weights_(std::move(weights)) {
  for (Eigen::Index i = 0; i < weights_.cols(); ++i) {
    const auto col = weights_.col(i);
    if (!col.allFinite() || col.minCoeff() < -kSimplexTolerance ||
        std::abs(col.sum() - 1.0) > kSimplexTolerance)
      throw std::invalid_argument("PrimalSnapshot: column " + std::to_string(i) +
                                  " is not in the simplex");
  }
}

Vector primal_estimate(const Vector& eta_bar, const Measure& mu, const SupportGrid& grid,
                       double beta, int eval_samples, std::uint64_t eval_seed,
                       const CostModel& cost) {
  // Reuse the oracle's evaluator so simulator snapshots and this function agree exactly.
  auto shared_grid = std::make_shared<const SupportGrid>(grid);
  MeasureDualOracle oracle(mu, shared_grid, beta, cost);
  RngStream rng = RngStream::keyed(eval_seed, StreamDomain::eval);
  return oracle.evaluate(eta_bar, eval_samples, rng).primal;
}

double consensus_distance(const Graph& graph, const PrimalSnapshot& snapshot) {
  if (snapshot.nodes() != graph.size())
    throw std::invalid_argument("consensus_distance: snapshot has " +
                                std::to_string(snapshot.nodes()) + " nodes, graph has " +
                                std::to_string(graph.size()));
  return consensus_quadratic(graph, snapshot.weights());
}

double total_variation(const Vector& p, const Vector& q) {
  if (p.size() != q.size()) throw std::invalid_argument("total_variation: size mismatch");
  return 0.5 * (p - q).cwiseAbs().sum();
}

}  // namespace wbary
