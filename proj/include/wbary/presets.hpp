#pragma once

#include <cstdint>
#include <memory>
#include <variant>
#include <vector>

#include "wbary/local_problem.hpp"
#include "wbary/mnist_ingest.hpp"

namespace wbary {

using LocalProblems = std::vector<std::shared_ptr<const LocalDualOracle>>;

struct GaussianRanges {
  double support_lo = -5.0;
  double support_hi = 5.0;
  double mean_lo = -4.0;
  double mean_hi = 4.0;
  double std_lo = 0.1;
  double std_hi = 0.6;

  void validate() const;
  bool operator==(const GaussianRanges&) const = default;
};

/// Node i observes N(mean_i, std_i^2) with mean and std drawn uniformly from
/// the ranges; the barycenter lives on n equally spaced support points.
struct GaussianPreset {
  int m = 0;
  int n = 0;
  std::uint64_t seed = 0;
  GaussianRanges ranges;
  std::shared_ptr<const SupportGrid> grid;
  std::vector<Gaussian1d> params;

  std::vector<Measure> measures() const;
};

GaussianPreset gaussian_preset(int m, int n, std::uint64_t seed, const GaussianRanges& ranges = {});

/// m images of one digit turned into measures on the shared pixel grid.
struct MnistPreset {
  int digit = 3;
  int m = 0;
  std::uint64_t seed = 0;
  std::shared_ptr<const SupportGrid> grid;
  std::vector<std::size_t> image_indices;
  std::vector<Measure> measures;
};

MnistPreset mnist_preset(const IdxImages& images, const IdxLabels& labels, int digit, int m,
                         std::uint64_t seed, bool keep_zero_pixels = false);

/// Local primal terms (mu/2)||x_i - b_i||^2; column i of b is b_i.
struct QuadraticPreset {
  double mu = 1.0;
  double noise_std = 0.0;
  BlockMatrix b;

  /// Minimum of the decentralized dual: -(mu/2) ||b - mean(b)||^2.
  double optimal_value() const;
};

/// b entries standard normal, keyed by (seed, node).
QuadraticPreset quadratic_preset(int m, int n, double mu, double noise_std, std::uint64_t seed);

using ExperimentPreset = std::variant<GaussianPreset, MnistPreset, QuadraticPreset>;

LocalProblems measure_locals(std::shared_ptr<const SupportGrid> grid, const std::vector<Measure>& measures,
                             double beta);
LocalProblems quadratic_locals(const QuadraticPreset& preset);

}  // namespace wbary
