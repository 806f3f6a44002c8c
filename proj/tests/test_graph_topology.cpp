#include <doctest.h>

#include <cmath>
#include <set>
#include <Eigen/SVD>

#include "wbary/errors.hpp"
#include "wbary/graph_topology.hpp"
#include "wbary/rng.hpp"

using namespace wbary;

namespace {

std::set<int> neighbor_set(const Graph& g, int i) {
  auto nb = g.neighbors(i);
  return {nb.begin(), nb.end()};
}

Graph make(TopologyKind kind, int m) { return build_topology({kind, m, std::nullopt, std::nullopt}); }

// PSD square root through the SVD, an algorithm independent of the
// library's symmetric eigensolver.
Matrix svd_sqrt(const Matrix& a) {
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeFullU);
  return svd.matrixU() * svd.singularValues().cwiseSqrt().asDiagonal() * svd.matrixU().transpose();
}

BlockMatrix random_block(int n, int m, std::uint64_t seed) {
  RngStream rng(seed);
  BlockMatrix x(n, m);
  for (int i = 0; i < m; ++i)
    for (int l = 0; l < n; ++l) x(l, i) = rng.normal();
  return x;
}

}  // namespace

TEST_CASE("cycle and star have the textbook neighborhoods") {
  const Graph c = make(TopologyKind::cycle, 3);
  for (int i = 0; i < 3; ++i) CHECK(neighbor_set(c, i) == std::set<int>{(i + 2) % 3, (i + 1) % 3});

  const Graph s = make(TopologyKind::star, 5);
  CHECK(s.degree(0) == 4);
  for (int i = 1; i < 5; ++i) CHECK(neighbor_set(s, i) == std::set<int>{0});

  const Graph k = make(TopologyKind::complete, 6);
  CHECK(k.edge_count() == 15);
  CHECK(make(TopologyKind::cycle, 2).edge_count() == 1);
}

TEST_CASE("Erdos-Renyi graphs are connected and reproducible") {
  const TopologySpec spec{TopologyKind::erdos_renyi, 20, 0.3, 7};
  const Graph a = build_topology(spec);
  const Graph b = build_topology(spec);
  CHECK(a == b);
  CHECK(a.edges() == b.edges());

  std::vector<std::vector<int>> adj(20);
  for (int i = 0; i < 20; ++i) adj[static_cast<std::size_t>(i)].assign(a.neighbors(i).begin(), a.neighbors(i).end());
  CHECK(is_connected(adj));

  const Graph other = build_topology({TopologyKind::erdos_renyi, 20, 0.3, 8});
  CHECK_FALSE(other == a);
}

TEST_CASE("construction errors") {
  CHECK_THROWS_AS(build_topology({TopologyKind::cycle, 1, std::nullopt, std::nullopt}), std::invalid_argument);
  CHECK_THROWS_AS(build_topology({TopologyKind::erdos_renyi, 10, std::nullopt, 1}), std::invalid_argument);
  CHECK_THROWS_AS(build_topology({TopologyKind::cycle, 5, 0.5, std::nullopt}), std::invalid_argument);
  CHECK_THROWS_AS(build_topology({TopologyKind::erdos_renyi, 40, 1e-6, 3}), ConstructionError);

  const std::vector<Graph::Edge> split{{0, 1}, {2, 3}};
  CHECK_THROWS_AS(Graph::from_edges(4, split), ConstructionError);
  const std::vector<Graph::Edge> loop{{0, 0}, {0, 1}};
  CHECK_THROWS_AS(Graph::from_edges(2, loop), std::invalid_argument);
  const std::vector<Graph::Edge> dup{{0, 1}, {1, 0}};
  CHECK_THROWS_AS(Graph::from_edges(2, dup), std::invalid_argument);
}

TEST_CASE("Laplacian matches the definition") {
  Matrix expect3(3, 3);
  expect3 << 2, -1, -1, -1, 2, -1, -1, -1, 2;
  CHECK(laplacian(make(TopologyKind::cycle, 3)) == expect3);

  Matrix expect2(2, 2);
  expect2 << 1, -1, -1, 1;
  CHECK(laplacian(make(TopologyKind::complete, 2)) == expect2);

  for (auto kind : {TopologyKind::complete, TopologyKind::cycle, TopologyKind::star}) {
    const Graph g = make(kind, 9);
    const Matrix L = laplacian(g);
    for (int i = 0; i < 9; ++i) {
      CHECK(L.row(i).sum() == 0.0);
      CHECK(L(i, i) == g.degree(i));
      for (int j = 0; j < 9; ++j)
        if (i != j) CHECK((L(i, j) == 0.0 || L(i, j) == -1.0));
    }
    RngStream rng(42);
    for (int t = 0; t < 100; ++t) {
      Vector x(9);
      for (int i = 0; i < 9; ++i) x(i) = rng.normal();
      CHECK(x.dot(L * x) >= -1e-12);
    }
  }
}

TEST_CASE("lambda_max closed forms") {
  for (int m : {3, 5, 20}) {
    CHECK(lambda_max(laplacian(make(TopologyKind::complete, m))) == doctest::Approx(m).epsilon(1e-8));
    CHECK(lambda_max(laplacian(make(TopologyKind::star, m))) == doctest::Approx(m).epsilon(1e-8));
  }
  CHECK(lambda_max(laplacian(make(TopologyKind::cycle, 4))) == doctest::Approx(4.0).epsilon(1e-10));
  for (int m : {5, 7, 12}) {
    // cycle spectrum 2 - 2 cos(2 pi j / m), largest at j = floor(m/2)
    const double expect = 2.0 - 2.0 * std::cos(2.0 * M_PI * (m / 2) / m);
    CHECK(lambda_max(laplacian(make(TopologyKind::cycle, m))) == doctest::Approx(expect).epsilon(1e-10));
  }
}

TEST_CASE("power iteration agrees with the dense solver") {
  for (auto kind : {TopologyKind::complete, TopologyKind::cycle, TopologyKind::star}) {
    const Matrix L = laplacian(make(kind, 11));
    CHECK(lambda_max_power(L) == doctest::Approx(lambda_max(L)).epsilon(1e-6));
  }
  CHECK_THROWS_AS(lambda_max_power(laplacian(make(TopologyKind::cycle, 30)), 1e-14, 3), NumericError);
}

TEST_CASE("sqrt_laplacian") {
  const Matrix L2 = laplacian(make(TopologyKind::complete, 2));
  Matrix expect(2, 2);
  expect << 1, -1, -1, 1;
  expect /= std::sqrt(2.0);
  CHECK((sqrt_laplacian(L2) - expect).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((sqrt_laplacian(L2) * sqrt_laplacian(L2) - L2).cwiseAbs().maxCoeff() < 1e-12);

  CHECK(sqrt_laplacian(Matrix::Zero(3, 3)) == Matrix::Zero(3, 3));

  for (int m : {3, 8, 10}) {
    const Matrix L = laplacian(build_topology({TopologyKind::erdos_renyi, m, 0.5, 3}));
    const Matrix S = sqrt_laplacian(L);
    CHECK((S * S - L).cwiseAbs().maxCoeff() < 1e-8);
    // the kernel of L must stay exactly in the kernel of the root
    CHECK((S * Vector::Ones(m)).norm() < 1e-12);
    CHECK((S - svd_sqrt(L)).cwiseAbs().maxCoeff() < 1e-6);
  }

  Matrix bad(2, 2);
  bad << -1, 0, 0, 1;
  CHECK_THROWS_AS(sqrt_laplacian(bad), NumericError);
}

TEST_CASE("consensus_quadratic") {
  const Graph k2 = make(TopologyKind::complete, 2);
  BlockMatrix x(1, 2);
  x << 0, 1;
  CHECK(consensus_quadratic(k2, x) == 1.0);
  CHECK(consensus_quadratic(make(TopologyKind::cycle, 6), BlockMatrix::Constant(3, 6, 0.7)) == 0.0);
  CHECK_THROWS_AS(consensus_quadratic(k2, BlockMatrix::Zero(1, 3)), std::invalid_argument);

  for (std::uint64_t s = 0; s < 50; ++s) {
    RngStream rng = RngStream::keyed(s, StreamDomain::diagnostics);
    const int m = 2 + static_cast<int>(rng.below(9));
    const int n = 1 + static_cast<int>(rng.below(5));
    const Graph g = m == 2 ? make(TopologyKind::complete, 2)
                           : build_topology({TopologyKind::erdos_renyi, m, 0.5, s});
    const BlockMatrix xs = random_block(n, m, s + 100);
    const Matrix L = laplacian(g);
    const double via_root = (xs * sqrt_laplacian(L)).squaredNorm();
    const double via_form = (xs * L * xs.transpose()).trace();
    CHECK(consensus_quadratic(g, xs) == doctest::Approx(via_root).epsilon(1e-8));
    CHECK(consensus_quadratic(g, xs) == doctest::Approx(via_form).epsilon(1e-10));
  }
}
