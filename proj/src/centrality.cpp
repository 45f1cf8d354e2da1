#include "warpcenter/centrality.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>

#include "warpcenter/error.hpp"
#include "warpcenter/parallel.hpp"
#include "warpcenter/seed.hpp"

namespace warpcenter {

using SpMat = Eigen::SparseMatrix<double>;

static std::string format_residual(double r) {
  std::ostringstream os;
  os.precision(3);
  os << r;
  return os.str();
}

struct DirichletSolver::Impl {
  SpMat laplacian;
  Eigen::VectorXd scale;  // 1/sqrt(L_kk); the factorized matrix is S L S
  SpMat system;           // S L S with identity rows/columns at the boundary nodes
  SolverOptions options;
  bool direct = true;
  Eigen::SimplicialLDLT<SpMat, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt;
  Eigen::ConjugateGradient<SpMat, Eigen::Lower | Eigen::Upper, Eigen::IncompleteCholesky<double>> cg;
  std::vector<std::pair<Eigen::Index, double>> saved;
  Eigen::VectorXd rhs;
  // Scaled Laplacian grounded at one node, factorized once. A Dirichlet problem
  // with boundary {i0, i1} is an affine image of the potential driven by a
  // unit current from i1 to i0, so most trials need only triangular solves.
  Eigen::SimplicialLDLT<SpMat, Eigen::Lower, Eigen::AMDOrdering<int>> grounded;
  Eigen::Index ground = 0;
  bool grounded_ok = false;

  static constexpr int kRefinementSteps = 3;

  Impl(const SparseLaplacian& lap, SolverOptions opts) : laplacian(lap.matrix()), options(opts) {
    const auto n = static_cast<std::size_t>(laplacian.rows());
    // Density-normalized Laplacians can span dozens of decades; symmetric
    // diagonal scaling keeps the factorization accurate.
    scale.resize(laplacian.rows());
    for (Eigen::Index k = 0; k < laplacian.rows(); ++k) {
      const double d = laplacian.coeff(k, k);
      scale[k] = d > 0.0 ? 1.0 / std::sqrt(d) : 1.0;
    }
    system = laplacian;
    for (Eigen::Index c = 0; c < system.outerSize(); ++c)
      for (SpMat::InnerIterator it(system, c); it; ++it) it.valueRef() *= scale[it.row()] * scale[c];

    direct = options.backend == SolverBackend::Direct ||
             (options.backend == SolverBackend::Auto && n <= options.direct_limit);
    if (direct) {
      ldlt.analyzePattern(system);
      factorize_grounded();
    } else {
      cg.analyzePattern(system);
      cg.setMaxIterations(options.max_iterations > 0 ? options.max_iterations : static_cast<int>(10 * n));
      cg.setTolerance(0.1 * options.tolerance);
    }
    rhs.setZero(laplacian.rows());
  }

  bool acceptable(const Eigen::VectorXd& d) const {
    return (d.array() > 1e-14 * d.cwiseAbs().maxCoeff()).all();
  }

  void factorize_grounded() {
    if (laplacian.rows() < 2) return;
    for (Eigen::Index k = 1; k < system.outerSize(); ++k)
      if (system.outerIndexPtr()[k + 1] - system.outerIndexPtr()[k] >
          system.outerIndexPtr()[ground + 1] - system.outerIndexPtr()[ground])
        ground = k;
    isolate(ground);
    grounded.compute(system);
    restore();
    grounded_ok = grounded.info() == Eigen::Success && acceptable(grounded.vectorD());
  }

  // Potential phi with L phi = q and phi[ground] = 0; q must sum to zero.
  Eigen::VectorXd potential(const Eigen::VectorXd& q) const {
    Eigen::VectorXd b = scale.cwiseProduct(q);
    b[ground] = 0.0;
    Eigen::VectorXd phi = scale.cwiseProduct(Eigen::VectorXd(grounded.solve(b)));
    phi[ground] = 0.0;
    return phi;
  }

  std::optional<DirichletSolution> solve_grounded(std::size_t i0, std::size_t i1) {
    const auto b0 = static_cast<Eigen::Index>(i0);
    const auto b1 = static_cast<Eigen::Index>(i1);
    Eigen::VectorXd q = Eigen::VectorXd::Zero(laplacian.rows());
    q[b1] = 1.0;
    q[b0] = -1.0;
    const Eigen::VectorXd phi = potential(q);
    const double resistance = phi[b1] - phi[b0];
    if (!(resistance > 0.0) || !std::isfinite(resistance)) return std::nullopt;
    Eigen::VectorXd x = (phi.array() - phi[b0]) / resistance;
    x[b0] = 0.0;
    x[b1] = 1.0;
    Eigen::VectorXd r;
    double res = residual(x, b0, b1, r);
    for (int step = 0; step < kRefinementSteps && !(res <= options.tolerance); ++step) {
      // correction with L dx = r inside and dx = 0 on the boundary
      r[b0] = -r.sum();
      const Eigen::VectorXd psi = potential(r);
      const double a = -(psi[b1] - psi[b0]) / resistance;
      Eigen::VectorXd dx = psi + a * phi;
      dx.array() -= dx[b0];
      dx[b0] = 0.0;
      dx[b1] = 0.0;
      x += dx;
      res = residual(x, b0, b1, r);
    }
    // the exact solution obeys the maximum principle; remove rounding excursions
    x = x.cwiseMax(0.0).cwiseMin(1.0);
    res = residual(x, b0, b1, r);
    if (!(res <= options.tolerance)) return std::nullopt;
    return DirichletSolution{std::vector<double>(x.data(), x.data() + x.size()), i0, i1, res};
  }

  Eigen::Index find(Eigen::Index row, Eigen::Index col) const {
    const int* inner = system.innerIndexPtr();
    const int* first = inner + system.outerIndexPtr()[col];
    const int* last = inner + system.outerIndexPtr()[col + 1];
    const int* hit = std::lower_bound(first, last, static_cast<int>(row));
    return hit - inner;
  }

  void set(Eigen::Index pos, double v) {
    saved.emplace_back(pos, system.valuePtr()[pos]);
    system.valuePtr()[pos] = v;
  }

  void isolate(Eigen::Index b) {
    for (Eigen::Index p = system.outerIndexPtr()[b]; p < system.outerIndexPtr()[b + 1]; ++p) {
      const Eigen::Index r = system.innerIndexPtr()[p];
      if (r == b) {
        set(p, 1.0);
      } else {
        set(p, 0.0);
        set(find(b, r), 0.0);
      }
    }
  }

  void restore() {
    for (auto it = saved.rbegin(); it != saved.rend(); ++it) system.valuePtr()[it->first] = it->second;
    saved.clear();
  }

  // Relative residual of the diagonally scaled system, ||S (L x)_I|| / ||S L_IB x_B||.
  // Unscaled row norms can differ by many decades, which makes the plain
  // relative residual meaningless. Sets r = -(L x) on the interior.
  double residual(const Eigen::VectorXd& x, Eigen::Index b0, Eigen::Index b1, Eigen::VectorXd& r) const {
    r = -(laplacian * x);
    r[b0] = 0.0;
    r[b1] = 0.0;
    const double den = scale.cwiseProduct(rhs).squaredNorm();
    const double num = scale.cwiseProduct(r).squaredNorm();
    return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
  }

  Eigen::VectorXd scaled_solve(const Eigen::VectorXd& b) {
    const Eigen::VectorXd y = direct ? Eigen::VectorXd(ldlt.solve(scale.cwiseProduct(b)))
                                     : Eigen::VectorXd(cg.solve(scale.cwiseProduct(b)));
    return scale.cwiseProduct(y);
  }

  DirichletSolution solve(std::size_t i0, std::size_t i1) {
    const auto n = static_cast<std::size_t>(laplacian.rows());
    if (i0 >= n || i1 >= n) throw ArgumentError("seed node out of range");
    if (i0 == i1) throw ArgumentError("seed nodes must differ");
    const auto b0 = static_cast<Eigen::Index>(i0);
    const auto b1 = static_cast<Eigen::Index>(i1);

    // interior right-hand side -L_IB x_B with x_B = (0, 1)
    rhs.setZero();
    for (SpMat::InnerIterator it(laplacian, b1); it; ++it)
      if (it.row() != b0 && it.row() != b1) rhs[it.row()] = -it.value();

    if (grounded_ok)
      if (auto sol = solve_grounded(i0, i1)) return std::move(*sol);

    isolate(b0);
    isolate(b1);
    if (direct) {
      ldlt.factorize(system);
      bool ok = ldlt.info() == Eigen::Success;
      ok = ok && acceptable(ldlt.vectorD());
      if (!ok) {
        restore();
        throw SolverError("reduced Dirichlet system is singular or indefinite (seeds " + std::to_string(i0) +
                          ", " + std::to_string(i1) + "); the graph is probably disconnected");
      }
    } else {
      cg.factorize(system);
    }

    Eigen::VectorXd x = scaled_solve(rhs);
    x[b0] = 0.0;
    x[b1] = 1.0;
    Eigen::VectorXd r;
    double res = residual(x, b0, b1, r);
    for (int step = 0; step < kRefinementSteps && !(res <= options.tolerance); ++step) {
      Eigen::VectorXd dx = scaled_solve(r);
      dx[b0] = 0.0;
      dx[b1] = 0.0;
      x += dx;
      res = residual(x, b0, b1, r);
    }
    restore();
    if (!(res <= options.tolerance))
      throw SolverError("Dirichlet solve (seeds " + std::to_string(i0) + ", " + std::to_string(i1) +
                            ") reached relative residual " + format_residual(res),
                        res);
    return DirichletSolution{std::vector<double>(x.data(), x.data() + x.size()), i0, i1, res};
  }
};

DirichletSolver::DirichletSolver(const SparseLaplacian& lap, SolverOptions options)
    : impl_(std::make_unique<Impl>(lap, options)) {}
DirichletSolver::~DirichletSolver() = default;
DirichletSolver::DirichletSolver(DirichletSolver&&) noexcept = default;
DirichletSolver& DirichletSolver::operator=(DirichletSolver&&) noexcept = default;

DirichletSolution DirichletSolver::solve(std::size_t i0, std::size_t i1) { return impl_->solve(i0, i1); }

bool DirichletSolver::direct() const noexcept { return impl_->direct; }

DirichletSolution solve_dirichlet(const SparseLaplacian& lap, std::size_t i0, std::size_t i1,
                                  SolverOptions options) {
  return DirichletSolver(lap, options).solve(i0, i1);
}

SeedPair trial_seed_pair(std::uint64_t rng_seed, std::size_t trial, std::size_t n) {
  CounterStream stream(derive_seed(rng_seed, trial));
  const auto i = static_cast<std::size_t>(stream.below(n));
  auto j = static_cast<std::size_t>(stream.below(n - 1));
  if (j >= i) ++j;
  return {i, j};
}

namespace {

// Solves trials [first, last) in blocks, then accumulates each block in trial order.
template <class PairOf>
void accumulate_pairs(const SparseLaplacian& lap, PairOf pair_of, std::size_t first, std::size_t last,
                      std::span<double> sums, const CentralityOptions& options) {
  const std::size_t n = lap.size();
  if (sums.size() != n) throw ArgumentError("sums vector must have one entry per node");
  if (n < 2) throw ArgumentError("centrality needs at least two nodes");
  if (first >= last) return;

  const std::size_t workers = resolve_threads(options.threads);
  const std::size_t block = 32 * workers;
  std::vector<std::optional<DirichletSolver>> solvers(workers);
  std::vector<std::vector<double>> temps(std::min(block, last - first));

  for (std::size_t start = first; start < last; start += block) {
    const std::size_t count = std::min(block, last - start);
    parallel_for(count, workers, [&](std::size_t w, std::size_t begin, std::size_t end) {
      if (!solvers[w]) solvers[w].emplace(lap, options.solver);
      for (std::size_t t = begin; t < end; ++t) {
        const SeedPair pair = pair_of(start + t);
        try {
          temps[t] = solvers[w]->solve(pair.i0, pair.i1).x;
        } catch (const SolverError& e) {
          throw SolverError("trial " + std::to_string(start + t) + " with seed pair (" +
                                std::to_string(pair.i0) + ", " + std::to_string(pair.i1) + "): " + e.what(),
                            e.residual());
        }
      }
    });
    for (std::size_t t = 0; t < count; ++t) {
      const auto& x = temps[t];
      for (std::size_t k = 0; k < n; ++k) {
        const double dev = x[k] - 0.5;
        sums[k] += dev * dev;
      }
    }
  }
}

CentralityScores finish(std::vector<double> sums, std::size_t trials) {
  CentralityScores out;
  out.trials = trials;
  out.c.resize(sums.size());
  const double denom = static_cast<double>(trials - 1);
  for (std::size_t k = 0; k < sums.size(); ++k) out.c[k] = sums[k] / denom;
  out.sums = std::move(sums);
  return out;
}

}  // namespace

void accumulate_trials(const SparseLaplacian& lap, std::uint64_t rng_seed, std::size_t first, std::size_t last,
                       std::span<double> sums, const CentralityOptions& options) {
  const std::size_t n = lap.size();
  accumulate_pairs(
      lap, [&](std::size_t t) { return trial_seed_pair(rng_seed, t, n); }, first, last, sums, options);
}

CentralityScores centrality_scores(const SparseLaplacian& lap, std::size_t trials, std::uint64_t rng_seed,
                                   const CentralityOptions& options) {
  if (trials < 2) throw ArgumentError("centrality needs at least 2 trials");
  std::vector<double> sums(lap.size(), 0.0);
  accumulate_trials(lap, rng_seed, 0, trials, sums, options);
  return finish(std::move(sums), trials);
}

CentralityScores centrality_scores_exhaustive(const SparseLaplacian& lap, const CentralityOptions& options) {
  const std::size_t n = lap.size();
  if (n < 2) throw ArgumentError("centrality needs at least two nodes");
  const std::size_t trials = n * (n - 1);
  std::vector<double> sums(n, 0.0);
  accumulate_pairs(
      lap,
      [n](std::size_t t) {
        const std::size_t i = t / (n - 1);
        const std::size_t r = t % (n - 1);
        return SeedPair{i, r < i ? r : r + 1};
      },
      0, trials, sums, options);
  return finish(std::move(sums), trials);
}

std::vector<std::size_t> rank_by_centrality(const CentralityScores& scores) {
  std::vector<std::size_t> order(scores.c.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores.c[a] < scores.c[b]; });
  return order;
}

namespace {

Signal mean_of_rows(const ObservationSet& obs, std::span<const std::size_t> rows) {
  if (rows.size() == 1) return obs.signal(rows.front());
  std::vector<double> acc(obs.length(), 0.0);
  for (std::size_t idx : rows) {
    auto r = obs.row(idx);
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += r[i];
  }
  const double inv = 1.0 / static_cast<double>(rows.size());
  for (double& v : acc) v *= inv;
  return Signal(std::move(acc), obs.dt(), obs.t0());
}

void check_ranking(const ObservationSet& obs, std::span<const std::size_t> ranking, std::size_t k) {
  if (ranking.size() != obs.count()) throw ArgumentError("ranking must list every observation");
  if (k < 1 || k > obs.count())
    throw ArgumentError("K must be in [1, N] (K = " + std::to_string(k) + ", N = " + std::to_string(obs.count()) +
                        ")");
  for (std::size_t idx : ranking)
    if (idx >= obs.count()) throw ArgumentError("ranking index out of range");
}

}  // namespace

Signal central_average(const ObservationSet& obs, std::span<const std::size_t> ranking, std::size_t k) {
  check_ranking(obs, ranking, k);
  return mean_of_rows(obs, ranking.first(k));
}

Signal peripheral_average(const ObservationSet& obs, std::span<const std::size_t> ranking, std::size_t k) {
  check_ranking(obs, ranking, k);
  return mean_of_rows(obs, ranking.last(k));
}

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void check_estimate_options(const ObservationSet& obs, const EstimateOptions& options) {
  if (options.m < 1) throw ArgumentError("M must be >= 1");
  if (obs.count() < options.m + 1)
    throw ArgumentError("need N >= M + 1 observations (N = " + std::to_string(obs.count()) +
                        ", M = " + std::to_string(options.m) + ")");
  if (!options.exhaustive && options.trials < 2) throw ArgumentError("J must be >= 2");
  if (options.k < 1 || options.k > obs.count())
    throw ArgumentError("K must be in [1, N] (K = " + std::to_string(options.k) +
                        ", N = " + std::to_string(obs.count()) + ")");
}

}  // namespace

TemplateEstimate estimate_template_with(const ObservationSet& obs, const LaplacianBuild& build,
                                        const EstimateOptions& options) {
  check_estimate_options(obs, options);
  const SparseLaplacian& lap = build.laplacian;
  if (lap.size() != obs.count()) throw ArgumentError("Laplacian size does not match observation count");
  if (!is_connected(lap))
    throw ConstructionError(ConstructionError::Kind::Disconnected,
                            "affinity graph is disconnected with M = " + std::to_string(options.m) +
                                "; increase M");

  auto start = std::chrono::steady_clock::now();
  const CentralityOptions copts{options.threads, options.solver};
  CentralityScores scores = options.exhaustive ? centrality_scores_exhaustive(lap, copts)
                                               : centrality_scores(lap, options.trials, options.seed, copts);
  std::vector<std::size_t> ranking = rank_by_centrality(scores);
  const double centrality_s = seconds_since(start);

  start = std::chrono::steady_clock::now();
  Signal estimate = central_average(obs, ranking, options.k);
  const double average_s = seconds_since(start);

  TemplateEstimate out{std::move(estimate), std::move(scores), std::move(ranking), build.epsilon,
                       static_cast<std::size_t>(lap.matrix().nonZeros()), {}};
  out.timings.centrality_s = centrality_s;
  out.timings.average_s = average_s;
  return out;
}

TemplateEstimate estimate_template(const ObservationSet& obs, const EstimateOptions& options) {
  check_estimate_options(obs, options);
  const auto start = std::chrono::steady_clock::now();
  const LaplacianBuild build = build_laplacian_detailed(obs, GraphBuildParams{options.m, std::nullopt},
                                                        options.threads);
  const double laplacian_s = seconds_since(start);
  TemplateEstimate out = estimate_template_with(obs, build, options);
  out.timings.laplacian_s = laplacian_s;
  return out;
}

}  // namespace warpcenter
