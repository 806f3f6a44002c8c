#include "wbary/presets.hpp"

#include <cmath>
#include <stdexcept>

namespace wbary {

void GaussianRanges::validate() const {
  auto finite = [](double x) { return std::isfinite(x); };
  if (!finite(support_lo) || !finite(support_hi) || !(support_lo < support_hi))
    throw std::invalid_argument("gaussian ranges: need support_lo < support_hi");
  if (!finite(mean_lo) || !finite(mean_hi) || !(mean_lo <= mean_hi))
    throw std::invalid_argument("gaussian ranges: need mean_lo <= mean_hi");
  if (!finite(std_hi) || !(std_lo > 0.0) || !(std_lo <= std_hi))
    throw std::invalid_argument("gaussian ranges: need 0 < std_lo <= std_hi");
}

std::vector<Measure> GaussianPreset::measures() const {
  std::vector<Measure> out;
  out.reserve(params.size());
  for (const auto& p : params) out.push_back(Measure::gaussian_1d(p.mean, p.stddev));
  return out;
}

GaussianPreset gaussian_preset(int m, int n, std::uint64_t seed, const GaussianRanges& ranges) {
  if (m < 2) throw std::invalid_argument("gaussian_preset: m must be >= 2");
  if (n < 2) throw std::invalid_argument("gaussian_preset: n must be >= 2");
  ranges.validate();
  GaussianPreset p{m, n, seed, ranges,
                   std::make_shared<const SupportGrid>(SupportGrid::linspace(ranges.support_lo, ranges.support_hi, n)),
                   {}};
  p.params.reserve(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    RngStream rng = RngStream::keyed(seed, StreamDomain::preset, static_cast<std::uint64_t>(i));
    const double mean = rng.uniform(ranges.mean_lo, ranges.mean_hi);
    const double stddev = rng.uniform(ranges.std_lo, ranges.std_hi);
    p.params.push_back({mean, stddev});
  }
  return p;
}

MnistPreset mnist_preset(const IdxImages& images, const IdxLabels& labels, int digit, int m,
                         std::uint64_t seed, bool keep_zero_pixels) {
  if (labels.labels.size() != images.count)
    throw std::invalid_argument("mnist_preset: image and label counts differ");
  MnistPreset p;
  p.digit = digit;
  p.m = m;
  p.seed = seed;
  p.grid = std::make_shared<const SupportGrid>(pixel_grid(images.rows, images.cols));
  p.image_indices = select_digit(labels, digit, m, seed);
  for (std::size_t idx : p.image_indices)
    p.measures.push_back(image_to_measure(images, idx, keep_zero_pixels).to_measure());
  return p;
}

double QuadraticPreset::optimal_value() const {
  const BlockMatrix centered = b.colwise() - b.rowwise().mean();
  return -0.5 * mu * centered.squaredNorm();
}

QuadraticPreset quadratic_preset(int m, int n, double mu, double noise_std, std::uint64_t seed) {
  if (m < 2 || n < 1) throw std::invalid_argument("quadratic_preset: need m >= 2 and n >= 1");
  if (!(mu > 0.0)) throw std::invalid_argument("quadratic_preset: mu must be positive");
  if (!(noise_std >= 0.0)) throw std::invalid_argument("quadratic_preset: noise_std must be >= 0");
  QuadraticPreset p{mu, noise_std, BlockMatrix(n, m)};
  for (int i = 0; i < m; ++i) {
    RngStream rng = RngStream::keyed(seed, StreamDomain::preset, static_cast<std::uint64_t>(i), 2);
    for (int l = 0; l < n; ++l) p.b(l, i) = rng.normal();
  }
  return p;
}

LocalProblems measure_locals(std::shared_ptr<const SupportGrid> grid, const std::vector<Measure>& measures,
                             double beta) {
  LocalProblems out;
  out.reserve(measures.size());
  for (const auto& mu : measures) out.push_back(std::make_shared<const MeasureDualOracle>(mu, grid, beta));
  return out;
}

LocalProblems quadratic_locals(const QuadraticPreset& preset) {
  LocalProblems out;
  for (Eigen::Index i = 0; i < preset.b.cols(); ++i)
    out.push_back(std::make_shared<const QuadraticLocalOracle>(preset.b.col(i), preset.mu, preset.noise_std));
  return out;
}

}  // namespace wbary
