#include "wbary/graph_topology.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>

#include "wbary/errors.hpp"
#include "wbary/rng.hpp"

namespace wbary {

std::string_view to_string(TopologyKind kind) {
  switch (kind) {
    case TopologyKind::complete: return "complete";
    case TopologyKind::erdos_renyi: return "erdos_renyi";
    case TopologyKind::cycle: return "cycle";
    case TopologyKind::star: return "star";
  }
  return "unknown";
}

TopologyKind topology_kind_from_string(std::string_view name) {
  if (name == "complete") return TopologyKind::complete;
  if (name == "erdos_renyi") return TopologyKind::erdos_renyi;
  if (name == "cycle") return TopologyKind::cycle;
  if (name == "star") return TopologyKind::star;
  throw std::invalid_argument("unknown topology kind '" + std::string(name) + "'");
}

void TopologySpec::validate() const {
  if (m < 2) throw std::invalid_argument("topology: m must be at least 2");
  if (kind == TopologyKind::erdos_renyi) {
    if (!er_edge_prob) throw std::invalid_argument("topology: erdos_renyi requires er_edge_prob");
    if (!(*er_edge_prob > 0.0 && *er_edge_prob <= 1.0))
      throw std::invalid_argument("topology: er_edge_prob must lie in (0, 1]");
    if (!seed) throw std::invalid_argument("topology: erdos_renyi requires seed");
  } else if (er_edge_prob) {
    throw std::invalid_argument("topology: er_edge_prob is only valid for erdos_renyi");
  }
}

std::string TopologySpec::label() const { return std::string(to_string(kind)); }

bool is_connected(const std::vector<std::vector<int>>& adjacency) {
  if (adjacency.empty()) return false;
  std::vector<char> seen(adjacency.size(), 0);
  std::deque<int> frontier{0};
  seen[0] = 1;
  std::size_t reached = 1;
  while (!frontier.empty()) {
    const int u = frontier.front();
    frontier.pop_front();
    for (int v : adjacency[u]) {
      if (!seen[v]) {
        seen[v] = 1;
        ++reached;
        frontier.push_back(v);
      }
    }
  }
  return reached == adjacency.size();
}

Graph Graph::from_edges(int m, std::span<const Edge> edges) {
  if (m < 1) throw std::invalid_argument("graph: node count must be positive");
  std::vector<std::vector<int>> adj(m);
  for (auto [i, j] : edges) {
    if (i < 0 || j < 0 || i >= m || j >= m) throw std::invalid_argument("graph: edge endpoint out of range");
    if (i == j) throw std::invalid_argument("graph: self-loops are not allowed");
    adj[i].push_back(j);
    adj[j].push_back(i);
  }
  for (auto& list : adj) {
    std::sort(list.begin(), list.end());
    if (std::adjacent_find(list.begin(), list.end()) != list.end())
      throw std::invalid_argument("graph: duplicate edge");
  }
  if (!is_connected(adj)) throw ConstructionError("graph: not connected");
  return Graph(std::move(adj));
}

bool Graph::has_edge(int i, int j) const {
  const auto& list = adjacency_.at(i);
  return std::binary_search(list.begin(), list.end(), j);
}

std::vector<Graph::Edge> Graph::edges() const {
  std::vector<Edge> out;
  for (int i = 0; i < size(); ++i)
    for (int j : adjacency_[i])
      if (i < j) out.emplace_back(i, j);
  return out;
}

std::size_t Graph::edge_count() const {
  std::size_t total = 0;
  for (const auto& list : adjacency_) total += list.size();
  return total / 2;
}

namespace {

std::vector<Graph::Edge> sample_erdos_renyi(int m, double p, std::uint64_t seed) {
  auto rng = RngStream::keyed(seed, StreamDomain::topology);
  std::vector<Graph::Edge> edges;
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j)
      if (rng.uniform() < p) edges.emplace_back(i, j);
  return edges;
}

}  // namespace

Graph build_topology(const TopologySpec& spec) {
  spec.validate();
  const int m = spec.m;
  std::vector<Graph::Edge> edges;
  switch (spec.kind) {
    case TopologyKind::complete:
      for (int i = 0; i < m; ++i)
        for (int j = i + 1; j < m; ++j) edges.emplace_back(i, j);
      break;
    case TopologyKind::cycle:
      if (m == 2) {
        edges.emplace_back(0, 1);
      } else {
        for (int i = 0; i < m; ++i) edges.emplace_back(i, (i + 1) % m);
      }
      break;
    case TopologyKind::star:
      for (int i = 1; i < m; ++i) edges.emplace_back(0, i);
      break;
    case TopologyKind::erdos_renyi:
      for (int attempt = 0; attempt < kErdosRenyiAttempts; ++attempt) {
        auto candidate = sample_erdos_renyi(m, *spec.er_edge_prob, *spec.seed + attempt);
        std::vector<std::vector<int>> adj(m);
        for (auto [i, j] : candidate) {
          adj[i].push_back(j);
          adj[j].push_back(i);
        }
        if (is_connected(adj)) return Graph::from_edges(m, candidate);
      }
      throw ConstructionError("topology: erdos_renyi graph still disconnected after " +
                              std::to_string(kErdosRenyiAttempts) + " attempts");
  }
  return Graph::from_edges(m, edges);
}

Matrix laplacian(const Graph& g) {
  const int m = g.size();
  Matrix L = Matrix::Zero(m, m);
  for (int i = 0; i < m; ++i) {
    L(i, i) = g.degree(i);
    for (int j : g.neighbors(i)) L(i, j) = -1.0;
  }
  return L;
}

namespace {

void require_square(const Matrix& a, const char* what) {
  if (a.rows() != a.cols() || a.rows() == 0)
    throw std::invalid_argument(std::string(what) + ": matrix must be square and non-empty");
}

}  // namespace

double lambda_max_power(const Matrix& laplacian, double tol, int max_iterations) {
  require_square(laplacian, "lambda_max");
  const Eigen::Index m = laplacian.rows();
  Vector x(m);
  auto rng = RngStream::keyed(0x5eed, StreamDomain::diagnostics);
  for (Eigen::Index i = 0; i < m; ++i) x(i) = rng.uniform(-1.0, 1.0);
  x.normalize();
  double previous = 0.0;
  for (int it = 0; it < max_iterations; ++it) {
    Vector y = laplacian * x;
    const double rayleigh = x.dot(y);
    const double norm = y.norm();
    if (norm == 0.0) return 0.0;
    x = y / norm;
    if (it > 0 && std::abs(rayleigh - previous) <= tol * std::abs(rayleigh)) return rayleigh;
    previous = rayleigh;
  }
  throw NumericError("lambda_max: power iteration did not converge");
}

double lambda_max(const Matrix& laplacian, double tol) {
  require_square(laplacian, "lambda_max");
  if (!(tol > 0.0)) throw std::invalid_argument("lambda_max: tol must be positive");
  if (laplacian.rows() > kDenseSpectralLimit) return lambda_max_power(laplacian, tol);
  Eigen::SelfAdjointEigenSolver<Matrix> solver(laplacian, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericError("lambda_max: eigensolve failed");
  return solver.eigenvalues().maxCoeff();
}

Matrix sqrt_laplacian(const Matrix& laplacian) {
  require_square(laplacian, "sqrt_laplacian");
  if (laplacian.rows() > kDenseSpectralLimit)
    throw std::invalid_argument("sqrt_laplacian: only supported for m <= 1000");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(laplacian);
  if (solver.info() != Eigen::Success) throw NumericError("sqrt_laplacian: eigensolve failed");
  Vector roots = solver.eigenvalues();
  // The square root turns a 1e-15 residue of the zero eigenvalue into 3e-8,
  // which would leak into sqrt(W) 1. Connected graphs with m <= 1000 have
  // algebraic connectivity >= 4/m^2, far above this cutoff.
  const double cutoff = 1e-10 * std::max(1.0, roots.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < roots.size(); ++i) {
    if (roots(i) < -cutoff) throw NumericError("sqrt_laplacian: matrix is not positive semi-definite");
    roots(i) = roots(i) <= cutoff ? 0.0 : std::sqrt(roots(i));
  }
  const Matrix& v = solver.eigenvectors();
  Matrix s = v * roots.asDiagonal() * v.transpose();
  return 0.5 * (s + s.transpose());
}

SpectralInfo spectral_info(const Matrix& laplacian, bool with_sqrt) {
  SpectralInfo info;
  info.lambda_max = lambda_max(laplacian);
  if (with_sqrt) info.sqrt_laplacian = sqrt_laplacian(laplacian);
  return info;
}

double consensus_quadratic(const Graph& g, const BlockMatrix& x) {
  if (x.cols() != g.size())
    throw std::invalid_argument("consensus_quadratic: expected one block per node");
  double total = 0.0;
  for (auto [i, j] : g.edges()) total += (x.col(i) - x.col(j)).squaredNorm();
  return total;
}

}  // namespace wbary
