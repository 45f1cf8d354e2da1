#pragma once

// Synthetic ECG-like beat trains for segmentation and ordering tests.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "warpcenter/signal.hpp"

namespace ecg_synth {

struct BeatTrainParams {
  double fs = 360.0;             ///< Hz
  double duration_s = 900.0;     ///< record length
  double mean_rr_s = 0.78;       ///< typical beat interval
  double rr_jitter_s = 0.04;     ///< std of typical intervals
  double anomaly_rate = 0.05;    ///< fraction of anomalous intervals
  double short_lo = 0.68;        ///< premature beats: interval factor in [short_lo, short_hi]
  double short_hi = 0.90;
  double long_lo = 1.10;         ///< delayed beats: interval factor in [long_lo, long_hi]
  double long_hi = 1.32;
  double amplitude_jitter = 0.03;  ///< relative std of each beat's amplitude
  double wander = 0.03;            ///< baseline wander amplitude
  double noise_std = 0.04;
};

struct BeatTrain {
  warpcenter::Signal record;
  std::vector<double> beat_times;
};

/// One beat: P, Q, R, S and T waves as Gaussians relative to the R peak at 0.
inline double beat_shape(double t) {
  auto g = [](double t, double mu, double s, double a) { return a * std::exp(-0.5 * (t - mu) * (t - mu) / (s * s)); };
  return g(t, -0.20, 0.025, 0.12) + g(t, -0.03, 0.010, -0.15) + g(t, 0.0, 0.012, 1.0) +
         g(t, 0.035, 0.012, -0.25) + g(t, 0.25, 0.045, 0.30);
}

inline BeatTrain beat_train(const BeatTrainParams& p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> jitter(0.0, p.rr_jitter_s);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, p.noise_std);
  std::normal_distribution<double> gain(1.0, p.amplitude_jitter);

  std::vector<double> beats;
  std::vector<double> gains;
  double t = 0.5;
  while (t < p.duration_s - 0.5) {
    beats.push_back(t);
    gains.push_back(gain(rng));
    double rr = p.mean_rr_s + jitter(rng);
    const double u = coin(rng);
    if (u < p.anomaly_rate / 2) rr *= p.short_lo + (p.short_hi - p.short_lo) * coin(rng);
    else if (u < p.anomaly_rate) rr *= p.long_lo + (p.long_hi - p.long_lo) * coin(rng);
    t += rr;
  }
  const double phase = 2.0 * std::acos(-1.0) * coin(rng);
  const auto n = static_cast<std::size_t>(p.duration_s * p.fs);
  std::vector<double> x(n, 0.0);
  const double dt = 1.0 / p.fs;
  for (std::size_t k = 0; k < beats.size(); ++k) {
    const double b = beats[k];
    const auto lo = static_cast<std::ptrdiff_t>((b - 0.4) * p.fs);
    const auto hi = static_cast<std::ptrdiff_t>((b + 0.6) * p.fs);
    for (std::ptrdiff_t i = std::max<std::ptrdiff_t>(lo, 0); i < std::min<std::ptrdiff_t>(hi, n); ++i)
      x[static_cast<std::size_t>(i)] += gains[k] * beat_shape(static_cast<double>(i) * dt - b);
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double ti = static_cast<double>(i) * dt;
    x[i] += p.wander * std::sin(2.0 * std::acos(-1.0) * 0.25 * ti + phase) + noise(rng);
  }
  return BeatTrain{warpcenter::Signal(std::move(x), dt, 0.0), std::move(beats)};
}

}  // namespace ecg_synth
