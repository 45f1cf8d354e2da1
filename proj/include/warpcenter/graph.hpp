#pragma once

#include <cstddef>
#include <optional>
#include <tuple>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "warpcenter/signal.hpp"

namespace warpcenter {

/// Symmetric graph Laplacian: off-diagonals <= 0, diagonals >= 0, zero row sums.
///
/// Stored as a compressed column-major matrix holding both triangles; every
/// (i, j) entry is written from the same value as (j, i), so symmetry is exact.
class SparseLaplacian {
public:
  struct Edge {
    std::size_t a;
    std::size_t b;
    double weight;  ///< affinity w_ab > 0; stored as L_ab = -weight
  };

  /// Builds L from undirected weighted edges; the diagonal is filled so rows sum to zero.
  static SparseLaplacian from_edges(std::size_t n, const std::vector<Edge>& edges);

  /// Wraps an existing matrix after checking the Laplacian invariants.
  /// `tolerance` bounds |row sum| relative to max |L_ii|.
  static SparseLaplacian from_matrix(Eigen::SparseMatrix<double> matrix, double tolerance = 1e-12);

  std::size_t size() const noexcept { return static_cast<std::size_t>(matrix_.rows()); }
  const Eigen::SparseMatrix<double>& matrix() const noexcept { return matrix_; }
  Eigen::MatrixXd dense() const { return Eigen::MatrixXd(matrix_); }
  /// Number of stored off-diagonal entries in column k.
  std::size_t degree(std::size_t k) const;
  double max_diagonal() const;

private:
  explicit SparseLaplacian(Eigen::SparseMatrix<double> m) : matrix_(std::move(m)) {}

  Eigen::SparseMatrix<double> matrix_;
};

struct GraphBuildParams {
  std::size_t m = 10;                     ///< neighbours per observation
  std::optional<double> epsilon_override; ///< kernel bandwidth; derived from tau when absent
};

/// Dense symmetric matrix D_ij = ||f_i - f_j||^2, D_ii = 0.
Eigen::MatrixXd pairwise_sq_distances(const ObservationSet& obs, std::size_t threads = 0);

/// Diagnostics of one Laplacian construction.
struct LaplacianBuild {
  SparseLaplacian laplacian;
  std::vector<double> tau;  ///< M-th smallest distance per node (self excluded)
  double epsilon;          ///< bandwidth used
};

/// Sparse density-normalized kNN affinity Laplacian.
///
///  1. d_ij = squared distance; tau_i = M-th smallest d_ij over j != i
///  2. eps  = median(tau) / 3 (mean of the two middle values for even N)
///  3. W_ij = exp(-d_ij / eps), kept iff d_ij <= tau_max(i,j)  (the larger index decides)
///  4. s_i  = -sum_j W_ij;  L_ij = -W_ij / (s_i s_j);  L_ii = -sum_{j!=i} L_ij
///
/// Throws ConstructionError (IsolatedNode) when a node loses all edges and
/// (DuplicateObservations) when eps == 0.
LaplacianBuild build_laplacian_detailed(const ObservationSet& obs, const GraphBuildParams& params,
                                        std::size_t threads = 0);
SparseLaplacian build_laplacian(const ObservationSet& obs, const GraphBuildParams& params,
                                std::size_t threads = 0);

/// Same construction from a precomputed distance matrix.
LaplacianBuild build_laplacian_from_distances(const Eigen::MatrixXd& sq_distances,
                                              const GraphBuildParams& params);

/// True iff the off-diagonal pattern forms one connected component (BFS).
bool is_connected(const SparseLaplacian& lap);

}  // namespace warpcenter
