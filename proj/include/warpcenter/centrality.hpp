#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "warpcenter/graph.hpp"
#include "warpcenter/signal.hpp"

namespace warpcenter {

/// Steady-state temperatures with x[i0] = 0 and x[i1] = 1.
struct DirichletSolution {
  std::vector<double> x;
  std::size_t i0 = 0;
  std::size_t i1 = 0;
  double residual = 0.0;  ///< ||S (L x)_I|| / ||S L_IB x_B||, S = diag(L)^(-1/2), interior rows
};

enum class SolverBackend { Auto, Direct, Iterative };

struct SolverOptions {
  SolverBackend backend = SolverBackend::Auto;
  std::size_t direct_limit = 20000;  ///< Auto picks the direct factorization up to this N
  double tolerance = 1e-10;          ///< required relative residual
  int max_iterations = 0;            ///< iterative backend; 0 = 10 * N
};

/// Reusable solver for Dirichlet problems on one Laplacian.
///
/// The reduced system L_II x_I = -L_IB x_B is solved in place on an N x N SPD
/// matrix that equals the diagonally scaled S L S except for identity
/// rows/columns at the two boundary nodes. Its sparsity pattern never changes,
/// so the fill-reducing ordering and symbolic factorization are computed once.
/// A few steps of iterative refinement follow when the residual is above
/// tolerance. Not thread-safe; use one per worker.
class DirichletSolver {
public:
  explicit DirichletSolver(const SparseLaplacian& lap, SolverOptions options = {});
  ~DirichletSolver();
  DirichletSolver(DirichletSolver&&) noexcept;
  DirichletSolver& operator=(DirichletSolver&&) noexcept;

  DirichletSolution solve(std::size_t i0, std::size_t i1);

  bool direct() const noexcept;

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

DirichletSolution solve_dirichlet(const SparseLaplacian& lap, std::size_t i0, std::size_t i1,
                                  SolverOptions options = {});

/// Ordered seed pair (i0, i1), i0 != i1.
struct SeedPair {
  std::size_t i0;
  std::size_t i1;
  friend bool operator==(const SeedPair&, const SeedPair&) = default;
};

/// Seed pair of trial `trial`, uniform over the n(n-1) ordered pairs and a pure
/// function of (rng_seed, trial).
SeedPair trial_seed_pair(std::uint64_t rng_seed, std::size_t trial, std::size_t n);

/// Per-node variance-of-temperature scores; smaller is more central.
struct CentralityScores {
  std::vector<double> c;     ///< sums / (trials - 1)
  std::vector<double> sums;  ///< accumulated (x_k - 0.5)^2
  std::size_t trials = 0;
};

struct CentralityOptions {
  std::size_t threads = 0;
  SolverOptions solver{};
};

/// Adds (x_k - 0.5)^2 of trials [first, last) to `sums`, in trial order.
/// Results do not depend on the thread count.
void accumulate_trials(const SparseLaplacian& lap, std::uint64_t rng_seed, std::size_t first,
                       std::size_t last, std::span<double> sums, const CentralityOptions& options = {});

/// Randomized centrality with `trials` >= 2 seeded Dirichlet solves.
CentralityScores centrality_scores(const SparseLaplacian& lap, std::size_t trials, std::uint64_t rng_seed,
                                   const CentralityOptions& options = {});

/// Deterministic variant over all n(n-1) ordered pairs, lexicographic order.
CentralityScores centrality_scores_exhaustive(const SparseLaplacian& lap,
                                              const CentralityOptions& options = {});

/// Node indices by ascending score; ties by ascending index.
std::vector<std::size_t> rank_by_centrality(const CentralityScores& scores);

/// Mean of the k first-ranked observations.
Signal central_average(const ObservationSet& obs, std::span<const std::size_t> ranking, std::size_t k);

/// Mean of the k last-ranked observations.
Signal peripheral_average(const ObservationSet& obs, std::span<const std::size_t> ranking, std::size_t k);

struct EstimateOptions {
  std::size_t m = 10;
  std::size_t trials = 1000;
  std::size_t k = 5;
  std::uint64_t seed = 0;
  bool exhaustive = false;
  std::size_t threads = 0;
  SolverOptions solver{};
};

struct StageTimings {
  double laplacian_s = 0.0;
  double centrality_s = 0.0;
  double average_s = 0.0;
};

struct TemplateEstimate {
  Signal estimate;
  CentralityScores scores;
  std::vector<std::size_t> ranking;
  double epsilon = 0.0;
  std::size_t nonzeros = 0;
  StageTimings timings;
};

/// Laplacian -> connectivity check -> centrality -> ranking -> K-central average.
/// A disconnected graph raises ConstructionError(Disconnected) suggesting a larger M.
TemplateEstimate estimate_template(const ObservationSet& obs, const EstimateOptions& options);

/// Same pipeline on a prebuilt Laplacian.
TemplateEstimate estimate_template_with(const ObservationSet& obs, const LaplacianBuild& build,
                                        const EstimateOptions& options);

}  // namespace warpcenter
