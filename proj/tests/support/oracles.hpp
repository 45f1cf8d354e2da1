#pragma once

// Independent reference implementations used only by tests. They share no
// code path with the library: everything is dense and written out step by step.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "warpcenter/graph.hpp"
#include "warpcenter/signal.hpp"

namespace oracle {

/// Squared distances by the naive double loop.
inline Eigen::MatrixXd naive_sq_distances(const std::vector<std::vector<double>>& rows) {
  const auto n = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXd d(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t t = 0; t < rows[i].size(); ++t) acc += (rows[i][t] - rows[j][t]) * (rows[i][t] - rows[j][t]);
      d(i, j) = acc;
    }
  return d;
}

inline std::vector<std::vector<double>> rows_of(const warpcenter::ObservationSet& obs) {
  std::vector<std::vector<double>> rows;
  for (std::size_t k = 0; k < obs.count(); ++k) rows.emplace_back(obs.row(k).begin(), obs.row(k).end());
  return rows;
}

/// Straight-line dense Laplacian construction: every step on a full N x N matrix.
inline Eigen::MatrixXd dense_laplacian(const std::vector<std::vector<double>>& rows, std::size_t m) {
  const Eigen::MatrixXd d = naive_sq_distances(rows);
  const auto n = d.rows();
  // tau_i = M-th smallest over j != i
  std::vector<double> tau(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    std::vector<double> others;
    for (Eigen::Index j = 0; j < n; ++j)
      if (j != i) others.push_back(d(i, j));
    std::sort(others.begin(), others.end());
    tau[static_cast<std::size_t>(i)] = others[m - 1];
  }
  std::vector<double> sorted_tau = tau;
  std::sort(sorted_tau.begin(), sorted_tau.end());
  const std::size_t h = sorted_tau.size() / 2;
  const double median = sorted_tau.size() % 2 ? sorted_tau[h] : 0.5 * (sorted_tau[h - 1] + sorted_tau[h]);
  const double eps = median / 3.0;

  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (i != j) l(i, j) = -std::exp(-d(i, j) / eps);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j <= i; ++j)
      if (d(i, j) > tau[static_cast<std::size_t>(i)]) {
        l(i, j) = 0.0;
        l(j, i) = 0.0;
      }
  Eigen::VectorXd s = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (j != i) s[i] += l(i, j);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (j != i) l(i, j) = l(i, j) / (s[i] * s[j]);
  for (Eigen::Index i = 0; i < n; ++i) {
    double acc = 0.0;
    for (Eigen::Index j = 0; j < n; ++j)
      if (j != i) acc += l(j, i);
    l(i, i) = -acc;
  }
  return l;
}

/// Dirichlet solution by eliminating the two boundary nodes and a dense LU solve.
inline std::vector<double> dense_dirichlet(const Eigen::MatrixXd& l, std::size_t i0, std::size_t i1) {
  const auto n = static_cast<std::size_t>(l.rows());
  std::vector<std::size_t> interior;
  for (std::size_t k = 0; k < n; ++k)
    if (k != i0 && k != i1) interior.push_back(k);
  std::vector<double> x(n, 0.0);
  x[i1] = 1.0;
  if (interior.empty()) return x;
  const auto m = static_cast<Eigen::Index>(interior.size());
  Eigen::MatrixXd a(m, m);
  Eigen::VectorXd b(m);
  for (Eigen::Index r = 0; r < m; ++r) {
    for (Eigen::Index c = 0; c < m; ++c) a(r, c) = l(interior[r], interior[c]);
    b[r] = -l(interior[r], i1);
  }
  const Eigen::VectorXd xi = a.fullPivLu().solve(b);
  for (Eigen::Index r = 0; r < m; ++r) x[interior[static_cast<std::size_t>(r)]] = xi[r];
  return x;
}

/// Dimension of the numerical null space of a dense symmetric matrix.
inline std::size_t null_space_dimension(const Eigen::MatrixXd& l, double rel_tol = 1e-9) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(l);
  const double scale = es.eigenvalues().cwiseAbs().maxCoeff();
  std::size_t dim = 0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
    if (std::abs(es.eigenvalues()[i]) <= rel_tol * scale) ++dim;
  return dim;
}

/// Exhaustive centrality straight from the definition on a dense Laplacian.
inline std::vector<double> exhaustive_scores(const Eigen::MatrixXd& l) {
  const auto n = static_cast<std::size_t>(l.rows());
  std::vector<double> c(n, 0.0);
  const double denom = static_cast<double>(n * (n - 1) - 1);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const auto x = dense_dirichlet(l, i, j);
      for (std::size_t k = 0; k < n; ++k) c[k] += (x[k] - 0.5) * (x[k] - 0.5) / denom;
    }
  return c;
}

/// Unit-weight path 0 - 1 - ... - (n-1).
inline warpcenter::SparseLaplacian path_graph(std::size_t n) {
  std::vector<warpcenter::SparseLaplacian::Edge> edges;
  for (std::size_t k = 0; k + 1 < n; ++k) edges.push_back({k, k + 1, 1.0});
  return warpcenter::SparseLaplacian::from_edges(n, edges);
}

/// Random connected weighted graph: a random spanning tree plus extra edges.
inline warpcenter::SparseLaplacian random_connected_graph(std::size_t n, std::mt19937_64& rng,
                                                          double extra_edge_prob = 0.3) {
  std::uniform_real_distribution<double> weight(0.1, 2.0);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::vector<warpcenter::SparseLaplacian::Edge> edges;
  std::vector<std::vector<char>> has(n, std::vector<char>(n, 0));
  for (std::size_t k = 1; k < n; ++k) {
    const std::size_t parent = std::uniform_int_distribution<std::size_t>(0, k - 1)(rng);
    edges.push_back({parent, k, weight(rng)});
    has[parent][k] = has[k][parent] = 1;
  }
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b)
      if (!has[a][b] && coin(rng) < extra_edge_prob) edges.push_back({a, b, weight(rng)});
  return warpcenter::SparseLaplacian::from_edges(n, edges);
}

/// Points of a regular grid inside an asymmetric arc (annulus sector with
/// uneven thickness), connected N/S/E/W with unit weights.
struct GridArc {
  std::vector<Eigen::Vector2d> points;
  warpcenter::SparseLaplacian laplacian;
};

inline GridArc grid_arc(double spacing) {
  std::vector<Eigen::Vector2d> pts;
  std::vector<std::pair<int, int>> cells;
  const int lim = static_cast<int>(std::ceil(1.3 / spacing));
  auto inside = [](double x, double y) {
    const double r = std::hypot(x, y);
    const double theta = std::atan2(y, x);
    if (theta < 0.0 || theta > 2.6) return false;
    const double thickness = 0.12 + 0.12 * theta / 2.6;  // asymmetric
    return r >= 1.0 - thickness && r <= 1.0 + thickness;
  };
  for (int iy = -lim; iy <= lim; ++iy)
    for (int ix = -lim; ix <= lim; ++ix) {
      const double x = ix * spacing;
      const double y = iy * spacing;
      if (inside(x, y)) {
        pts.emplace_back(x, y);
        cells.emplace_back(ix, iy);
      }
    }
  std::vector<warpcenter::SparseLaplacian::Edge> edges;
  for (std::size_t a = 0; a < cells.size(); ++a)
    for (std::size_t b = a + 1; b < cells.size(); ++b) {
      const int dx = std::abs(cells[a].first - cells[b].first);
      const int dy = std::abs(cells[a].second - cells[b].second);
      if (dx + dy == 1) edges.push_back({a, b, 1.0});
    }
  return GridArc{pts, warpcenter::SparseLaplacian::from_edges(pts.size(), edges)};
}

}  // namespace oracle
