#include "warpcenter/graph.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <string>

#include "warpcenter/error.hpp"
#include "warpcenter/parallel.hpp"

namespace warpcenter {

using SpMat = Eigen::SparseMatrix<double>;

SparseLaplacian SparseLaplacian::from_edges(std::size_t n, const std::vector<Edge>& edges) {
  if (n == 0) throw ArgumentError("Laplacian needs at least one node");
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(3 * edges.size());
  std::vector<double> diag(n, 0.0);
  for (const Edge& e : edges) {
    if (e.a >= n || e.b >= n) throw ArgumentError("edge endpoint out of range");
    if (e.a == e.b) throw ArgumentError("self loops are not allowed");
    if (!(e.weight > 0.0) || !std::isfinite(e.weight)) throw ArgumentError("edge weight must be positive");
    const auto a = static_cast<int>(e.a);
    const auto b = static_cast<int>(e.b);
    triplets.emplace_back(a, b, -e.weight);
    triplets.emplace_back(b, a, -e.weight);
    diag[e.a] += e.weight;
    diag[e.b] += e.weight;
  }
  for (std::size_t i = 0; i < n; ++i) triplets.emplace_back(static_cast<int>(i), static_cast<int>(i), diag[i]);
  SpMat m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  m.setFromTriplets(triplets.begin(), triplets.end());
  m.makeCompressed();
  return SparseLaplacian(std::move(m));
}

SparseLaplacian SparseLaplacian::from_matrix(SpMat matrix, double tolerance) {
  if (matrix.rows() != matrix.cols() || matrix.rows() == 0)
    throw ArgumentError("Laplacian must be a non-empty square matrix");
  matrix.makeCompressed();
  const SpMat asymmetry = matrix - SpMat(matrix.transpose());
  for (Eigen::Index col = 0; col < asymmetry.outerSize(); ++col)
    for (SpMat::InnerIterator it(asymmetry, col); it; ++it)
      if (it.value() != 0.0) throw ArgumentError("Laplacian must be exactly symmetric");
  const Eigen::Index n = matrix.rows();
  std::vector<double> row_sum(static_cast<std::size_t>(n), 0.0);
  double max_diag = 0.0;
  for (Eigen::Index col = 0; col < n; ++col) {
    for (SpMat::InnerIterator it(matrix, col); it; ++it) {
      if (it.row() == col) {
        if (it.value() < 0.0) throw ArgumentError("Laplacian diagonal must be >= 0");
        max_diag = std::max(max_diag, it.value());
      } else if (it.value() > 0.0) {
        throw ArgumentError("Laplacian off-diagonals must be <= 0");
      }
      row_sum[static_cast<std::size_t>(it.row())] += it.value();
    }
  }
  for (std::size_t i = 0; i < row_sum.size(); ++i)
    if (std::abs(row_sum[i]) > tolerance * max_diag)
      throw ArgumentError("Laplacian row " + std::to_string(i) + " does not sum to zero");
  return SparseLaplacian(std::move(matrix));
}

std::size_t SparseLaplacian::degree(std::size_t k) const {
  std::size_t d = 0;
  for (SpMat::InnerIterator it(matrix_, static_cast<Eigen::Index>(k)); it; ++it)
    if (static_cast<std::size_t>(it.row()) != k && it.value() != 0.0) ++d;
  return d;
}

double SparseLaplacian::max_diagonal() const {
  double best = 0.0;
  for (Eigen::Index k = 0; k < matrix_.outerSize(); ++k) best = std::max(best, std::abs(matrix_.coeff(k, k)));
  return best;
}

Eigen::MatrixXd pairwise_sq_distances(const ObservationSet& obs, std::size_t threads) {
  const std::size_t n = obs.count();
  if (n < 2) throw ArgumentError("pairwise distances need at least two observations");
  const std::size_t len = obs.length();
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  parallel_for(n, threads, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      auto a = obs.row(i);
      for (std::size_t j = 0; j < i; ++j) {
        auto b = obs.row(j);
        double acc = 0.0;
        for (std::size_t t = 0; t < len; ++t) {
          const double diff = a[t] - b[t];
          acc += diff * diff;
        }
        d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = acc;
      }
    }
  });
  for (Eigen::Index i = 0; i < d.rows(); ++i)
    for (Eigen::Index j = 0; j < i; ++j) d(j, i) = d(i, j);
  return d;
}

namespace {

double median_of(std::vector<double> v) {
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

}  // namespace

LaplacianBuild build_laplacian_from_distances(const Eigen::MatrixXd& d, const GraphBuildParams& params) {
  const auto n = static_cast<std::size_t>(d.rows());
  if (d.rows() != d.cols()) throw ArgumentError("distance matrix must be square");
  if (params.m < 1) throw ArgumentError("neighbour count M must be >= 1");
  if (n < params.m + 1)
    throw ArgumentError("need N >= M + 1 observations (N = " + std::to_string(n) +
                        ", M = " + std::to_string(params.m) + ")");

  // tau_i: M-th smallest distance to the other nodes.
  std::vector<double> tau(n);
  std::vector<double> others(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t w = 0;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) others[w++] = d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    const auto nth = others.begin() + static_cast<std::ptrdiff_t>(params.m - 1);
    std::nth_element(others.begin(), nth, others.end());
    tau[i] = *nth;
  }

  double epsilon = 0.0;
  if (params.epsilon_override) {
    epsilon = *params.epsilon_override;
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw ArgumentError("epsilon override must be > 0");
  } else {
    epsilon = median_of(tau) / 3.0;
    if (!(epsilon > 0.0))
      throw ConstructionError(ConstructionError::Kind::DuplicateObservations,
                              "kernel bandwidth is zero: more than half of the observations have a duplicate "
                              "among their M nearest neighbours; deduplicate the input");
  }

  // Kept affinities per node, neighbours in ascending order. The pair (i, j), j < i,
  // survives iff d_ij <= tau_i.
  struct Neighbour {
    std::size_t j;
    double w;
  };
  std::vector<std::vector<Neighbour>> adj(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      const double dij = d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      if (dij > tau[i]) continue;
      const double w = std::exp(-dij / epsilon);
      if (w == 0.0) continue;
      adj[i].push_back({j, w});
      adj[j].push_back({i, w});
    }
  }
  for (auto& row : adj) std::sort(row.begin(), row.end(), [](const auto& a, const auto& b) { return a.j < b.j; });

  // s_i = sum_j L_ij with L_ij = -w_ij (negative)
  std::vector<double> s(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& nb : adj[i]) s[i] -= nb.w;
    if (s[i] == 0.0)
      throw ConstructionError(ConstructionError::Kind::IsolatedNode,
                              "observation " + std::to_string(i) +
                                  " has no neighbours after sparsification; increase M");
  }

  std::vector<Eigen::Triplet<double>> triplets;
  std::size_t nnz = n;
  for (const auto& row : adj) nnz += row.size();
  triplets.reserve(nnz);
  for (std::size_t i = 0; i < n; ++i) {
    double diag = 0.0;
    for (const auto& nb : adj[i]) {
      const double v = -nb.w / (s[i] * s[nb.j]);
      triplets.emplace_back(static_cast<int>(nb.j), static_cast<int>(i), v);
      diag -= v;
    }
    triplets.emplace_back(static_cast<int>(i), static_cast<int>(i), diag);
  }
  SpMat m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  m.setFromTriplets(triplets.begin(), triplets.end());
  m.makeCompressed();
  return LaplacianBuild{SparseLaplacian::from_matrix(std::move(m)), std::move(tau), epsilon};
}

LaplacianBuild build_laplacian_detailed(const ObservationSet& obs, const GraphBuildParams& params,
                                        std::size_t threads) {
  if (obs.count() < params.m + 1)
    throw ArgumentError("need N >= M + 1 observations (N = " + std::to_string(obs.count()) +
                        ", M = " + std::to_string(params.m) + ")");
  return build_laplacian_from_distances(pairwise_sq_distances(obs, threads), params);
}

SparseLaplacian build_laplacian(const ObservationSet& obs, const GraphBuildParams& params, std::size_t threads) {
  return build_laplacian_detailed(obs, params, threads).laplacian;
}

bool is_connected(const SparseLaplacian& lap) {
  const std::size_t n = lap.size();
  const SpMat& m = lap.matrix();
  std::vector<char> seen(n, 0);
  std::queue<std::size_t> frontier;
  frontier.push(0);
  seen[0] = 1;
  std::size_t reached = 1;
  while (!frontier.empty()) {
    const std::size_t k = frontier.front();
    frontier.pop();
    for (SpMat::InnerIterator it(m, static_cast<Eigen::Index>(k)); it; ++it) {
      const auto r = static_cast<std::size_t>(it.row());
      if (r == k || it.value() == 0.0 || seen[r]) continue;
      seen[r] = 1;
      ++reached;
      frontier.push(r);
    }
  }
  return reached == n;
}

}  // namespace warpcenter
