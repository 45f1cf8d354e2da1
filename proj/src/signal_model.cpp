#include "warpcenter/signal_model.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "warpcenter/error.hpp"
#include "warpcenter/parallel.hpp"
#include "warpcenter/seed.hpp"

namespace warpcenter {

void WarpKernelParams::validate() const {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw ArgumentError("warp kernel alpha must be >= 0");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ArgumentError("warp kernel sigma must be > 0");
}

double WarpKernelParams::operator()(double lag) const noexcept {
  return alpha * std::exp(-(lag * lag) / (2.0 * sigma * sigma));
}

Eigen::MatrixXd warp_covariance(const WarpKernelParams& params, std::size_t grid_len, double dt) {
  params.validate();
  const auto n = static_cast<Eigen::Index>(grid_len);
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    k(i, i) = params(0.0);
    for (Eigen::Index j = 0; j < i; ++j) {
      const double v = params(static_cast<double>(i - j) * dt);
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  return k;
}

Eigen::MatrixXd cholesky_with_jitter(const Eigen::MatrixXd& covariance, double scale, double* jitter_used) {
  const double first = 1e-12 * scale;
  const double last = 1e-6 * scale;
  for (double jitter = first; jitter <= last * (1.0 + 1e-9); jitter *= 10.0) {
    Eigen::MatrixXd a = covariance;
    a.diagonal().array() += jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() == Eigen::Success) {
      if (jitter_used) *jitter_used = jitter;
      return llt.matrixL();
    }
  }
  throw ModelError("covariance matrix is numerically indefinite: Cholesky failed with jitter up to " +
                   std::to_string(last));
}

WarpSampler::WarpSampler(const WarpKernelParams& params, std::size_t grid_len, double dt)
    : grid_len_(grid_len), zero_(params.alpha == 0.0) {
  params.validate();
  if (grid_len == 0) throw ArgumentError("warp grid must have at least one sample");
  if (!(dt > 0.0)) throw ArgumentError("warp grid dt must be positive");
  if (zero_) return;
  const Eigen::MatrixXd k = warp_covariance(params, grid_len, dt);
  factor_ = cholesky_with_jitter(k, params.alpha, &jitter_);
}

WarpField WarpSampler::draw_standard(const Eigen::VectorXd& z) const {
  const Eigen::VectorXd u = factor_.triangularView<Eigen::Lower>() * z;
  return WarpField{std::vector<double>(u.data(), u.data() + u.size())};
}

WarpField WarpSampler::draw(std::uint64_t seed) const {
  std::mt19937_64 engine(seed);
  return draw_from(engine);
}

WarpField sample_warp_field(const WarpKernelParams& params, std::size_t grid_len, double dt,
                            std::uint64_t rng_seed) {
  return WarpSampler(params, grid_len, dt).draw(rng_seed);
}

namespace {

// f at fractional sample position pos, clamped to [0, L-1].
double interpolate(std::span<const double> f, double pos) {
  const double last = static_cast<double>(f.size() - 1);
  pos = std::clamp(pos, 0.0, last);
  const double base = std::floor(pos);
  const auto idx = static_cast<std::size_t>(base);
  const double frac = pos - base;
  if (frac == 0.0 || idx + 1 >= f.size()) return f[idx];
  return f[idx] + frac * (f[idx + 1] - f[idx]);
}

std::vector<double> warp_samples(std::span<const double> f, std::span<const double> u, double dt) {
  std::vector<double> out(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = interpolate(f, static_cast<double>(i) + u[i] / dt);
  return out;
}

}  // namespace

Signal apply_warp(const Signal& f, const WarpField& warp) {
  if (warp.u.size() != f.size())
    throw ArgumentError("warp length " + std::to_string(warp.u.size()) + " != signal length " +
                        std::to_string(f.size()));
  return Signal(warp_samples(f.samples(), warp.u, f.dt()), f.dt(), f.t0());
}

ObservationSet generate_observations(const Signal& f, const WarpKernelParams& params, std::size_t n,
                                     double noise_std, std::uint64_t rng_seed, std::size_t threads,
                                     std::vector<WarpField>* warps_out) {
  if (n == 0) throw ArgumentError("observation count must be >= 1");
  if (!(noise_std >= 0.0) || !std::isfinite(noise_std)) throw ArgumentError("noise_std must be >= 0");
  const WarpSampler sampler(params, f.size(), f.dt());
  const std::size_t len = f.size();
  std::vector<double> data(n * len);
  std::vector<WarpField> warps(warps_out ? n : 0);

  parallel_for(n, threads, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) {
      std::mt19937_64 engine(derive_seed(rng_seed, k));
      WarpField warp = sampler.draw_from(engine);
      std::vector<double> row = warp_samples(f.samples(), warp.u, f.dt());
      if (noise_std > 0.0) {
        std::normal_distribution<double> noise(0.0, noise_std);
        for (double& v : row) v += noise(engine);
      }
      std::copy(row.begin(), row.end(), data.begin() + static_cast<std::ptrdiff_t>(k * len));
      if (warps_out) warps[k] = std::move(warp);
    }
  });

  if (warps_out) *warps_out = std::move(warps);
  return ObservationSet(n, len, std::move(data), f.dt(), f.t0());
}

Signal ensemble_average(const ObservationSet& obs) {
  std::vector<double> mean(obs.length(), 0.0);
  for (std::size_t k = 0; k < obs.count(); ++k) {
    auto r = obs.row(k);
    for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += r[i];
  }
  const double inv = 1.0 / static_cast<double>(obs.count());
  for (double& v : mean) v *= inv;
  return Signal(std::move(mean), obs.dt(), obs.t0());
}

Signal gaussian_blur_oracle(const Signal& f, double variance) {
  if (!(variance > 0.0) || !std::isfinite(variance)) throw ArgumentError("blur variance must be > 0");
  const double std_samples = std::sqrt(variance) / f.dt();
  const auto half = static_cast<std::ptrdiff_t>(std::floor(5.0 * std_samples));
  if (half < 1)
    throw ArgumentError("blur kernel has fewer than 3 taps; variance too small for dt = " +
                        std::to_string(f.dt()));

  std::vector<double> kernel(static_cast<std::size_t>(2 * half + 1));
  double total = 0.0;
  for (std::ptrdiff_t m = -half; m <= half; ++m) {
    const double t = static_cast<double>(m) * f.dt();
    const double w = std::exp(-(t * t) / (2.0 * variance));
    kernel[static_cast<std::size_t>(m + half)] = w;
    total += w;
  }
  for (double& w : kernel) w /= total;

  auto x = f.samples();
  const auto len = static_cast<std::ptrdiff_t>(x.size());
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  std::vector<double> out(x.size());
  for (std::ptrdiff_t i = 0; i < len; ++i) {
    // Accumulate deviations from x[i] so constants come out exact.
    double acc = 0.0;
    for (std::ptrdiff_t m = -half; m <= half; ++m) {
      const std::ptrdiff_t j = std::clamp<std::ptrdiff_t>(i - m, 0, len - 1);
      acc += kernel[static_cast<std::size_t>(m + half)] * (x[j] - x[i]);
    }
    out[i] = std::clamp(x[i] + acc, *lo, *hi);
  }
  return Signal(std::move(out), f.dt(), f.t0());
}

Signal synthetic_truth(std::size_t samples) {
  if (samples < 2) throw ArgumentError("synthetic truth needs at least 2 samples");
  std::vector<double> f(samples);
  const double denom = static_cast<double>(samples - 1);
  for (std::size_t i = 0; i < samples; ++i) {
    const double t = static_cast<double>(i) / denom;
    if (t < 0.15)
      f[i] = 0.0;
    else if (t < 0.45)
      f[i] = (t - 0.15) / 0.3;
    else if (t < 0.6)
      f[i] = 0.3;
    else
      f[i] = 0.0;
  }
  return Signal(std::move(f), 1.0 / denom, 0.0);
}

}  // namespace warpcenter
