#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace wbary {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Stacked per-node vectors: column i is the block of node i (n rows, m columns).
/// The Kronecker factor of W = W_bar (x) I_n is never formed; applying W to a
/// BlockMatrix X is X * W_bar.
using BlockMatrix = Eigen::MatrixXd;

enum class TopologyKind { complete, erdos_renyi, cycle, star };

std::string_view to_string(TopologyKind kind);
TopologyKind topology_kind_from_string(std::string_view name);

struct TopologySpec {
  TopologyKind kind = TopologyKind::complete;
  int m = 2;
  std::optional<double> er_edge_prob;
  std::optional<std::uint64_t> seed;

  /// Throws std::invalid_argument on m < 2 or inconsistent Erdos-Renyi fields.
  void validate() const;
  std::string label() const;
};

/// Undirected, loop-free, connected graph with sorted adjacency lists.
class Graph {
 public:
  using Edge = std::pair<int, int>;

  /// Builds from an edge list (either orientation, duplicates rejected).
  /// Throws ConstructionError if the result is disconnected.
  static Graph from_edges(int m, std::span<const Edge> edges);

  int size() const { return static_cast<int>(adjacency_.size()); }
  std::span<const int> neighbors(int i) const { return adjacency_.at(i); }
  int degree(int i) const { return static_cast<int>(adjacency_.at(i).size()); }
  bool has_edge(int i, int j) const;

  /// Edges with i < j, lexicographically sorted.
  std::vector<Edge> edges() const;
  std::size_t edge_count() const;

  bool operator==(const Graph&) const = default;

 private:
  explicit Graph(std::vector<std::vector<int>> adjacency) : adjacency_(std::move(adjacency)) {}
  std::vector<std::vector<int>> adjacency_;
};

/// Breadth-first reachability from node 0 over raw adjacency lists.
bool is_connected(const std::vector<std::vector<int>>& adjacency);

/// Erdos-Renyi graphs are resampled with seed + attempt for up to this many
/// attempts before construction fails.
inline constexpr int kErdosRenyiAttempts = 100;

Graph build_topology(const TopologySpec& spec);

/// Dense graph Laplacian: deg(i) on the diagonal, -1 per edge, 0 elsewhere.
Matrix laplacian(const Graph& g);

/// Largest eigenvalue of a symmetric PSD matrix. Dense symmetric eigensolve
/// for m <= 1000, power iteration above.
double lambda_max(const Matrix& laplacian, double tol = 1e-10);

/// Power iteration with Rayleigh-quotient stopping rule; exposed so the
/// large-m path can be checked against the dense solver.
double lambda_max_power(const Matrix& laplacian, double tol = 1e-10, int max_iterations = 100000);

inline constexpr int kDenseSpectralLimit = 1000;

/// Symmetric PSD square root via eigendecomposition. Eigenvalues within
/// 1e-10 * max(1, |lambda|_max) of zero are set to zero; anything more
/// negative is a NumericError.
Matrix sqrt_laplacian(const Matrix& laplacian);

struct SpectralInfo {
  double lambda_max = 0.0;
  std::optional<Matrix> sqrt_laplacian;
};

SpectralInfo spectral_info(const Matrix& laplacian, bool with_sqrt);

/// sum over edges of ||x_i - x_j||^2, i.e. x^T W x = ||sqrt(W) x||^2.
double consensus_quadratic(const Graph& g, const BlockMatrix& x);

}  // namespace wbary
