#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "warpcenter/signal.hpp"

namespace warpcenter {

/// Squared-exponential warp kernel h(t) = alpha * exp(-t^2 / (2 sigma^2)).
struct WarpKernelParams {
  double alpha = 1e-4;  ///< variance scale, seconds^2 (>= 0)
  double sigma = 0.1;   ///< correlation length, seconds (> 0)

  void validate() const;
  double operator()(double lag) const noexcept;
};

/// One sampled warp perturbation u(t); the warp is g(t) = t + u(t).
struct WarpField {
  std::vector<double> u;
};

/// Grid covariance K_ij = h((i - j) dt), without jitter.
Eigen::MatrixXd warp_covariance(const WarpKernelParams& params, std::size_t grid_len, double dt);

/// Lower Cholesky factor of K + jitter * I. Jitter starts at 1e-12 * scale and
/// grows by 10x up to 1e-6 * scale; throws ModelError if every attempt fails.
Eigen::MatrixXd cholesky_with_jitter(const Eigen::MatrixXd& covariance, double scale,
                                     double* jitter_used = nullptr);

/// Factors the grid covariance once and draws any number of seeded fields.
class WarpSampler {
public:
  WarpSampler(const WarpKernelParams& params, std::size_t grid_len, double dt);

  /// Draw from a fresh std::mt19937_64 seeded with `seed`.
  WarpField draw(std::uint64_t seed) const;

  /// Draw consuming standard normals from `engine`.
  template <class Engine>
  WarpField draw_from(Engine& engine) const;

  std::size_t grid_len() const noexcept { return grid_len_; }
  /// Jitter actually added to the diagonal (0 when alpha == 0).
  double jitter() const noexcept { return jitter_; }

private:
  WarpField draw_standard(const Eigen::VectorXd& z) const;

  std::size_t grid_len_;
  bool zero_;
  double jitter_ = 0.0;
  Eigen::MatrixXd factor_;
};

WarpField sample_warp_field(const WarpKernelParams& params, std::size_t grid_len, double dt,
                            std::uint64_t rng_seed);

/// f(t_i + u_i) by linear interpolation on f's grid, warped times clamped to the domain.
Signal apply_warp(const Signal& f, const WarpField& warp);

/// n observations f(g_k(t)) + n_k(t), n_k white Gaussian with std `noise_std`.
///
/// Observation k draws its warp then its noise from std::mt19937_64 seeded with
/// derive_seed(rng_seed, k), so the set is independent of generation order.
/// `threads` = 0 selects the default worker count.
ObservationSet generate_observations(const Signal& f, const WarpKernelParams& params, std::size_t n,
                                     double noise_std, std::uint64_t rng_seed, std::size_t threads = 0,
                                     std::vector<WarpField>* warps_out = nullptr);

/// Point-wise mean over observations.
Signal ensemble_average(const ObservationSet& obs);

/// f convolved with a sampled normal pdf of the given variance (seconds^2).
/// Kernel truncated at +-5 std and renormalized to unit sum; edges replicated.
Signal gaussian_blur_oracle(const Signal& f, double variance);

/// The built-in synthetic prototype on [0, 1]: zero until a kink at 0.15, a linear
/// rise to 1, a step down to 0.3 at 0.45 and a step down to 0 at 0.60.
Signal synthetic_truth(std::size_t samples = 501);

template <class Engine>
WarpField WarpSampler::draw_from(Engine& engine) const {
  if (zero_) return WarpField{std::vector<double>(grid_len_, 0.0)};
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd z(static_cast<Eigen::Index>(grid_len_));
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = normal(engine);
  return draw_standard(z);
}

}  // namespace warpcenter
