#include "warpcenter/segmentation.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <set>
#include <string>

#include "warpcenter/error.hpp"

namespace warpcenter {

namespace {

// Linear-interpolation quantile on the sorted sample.
double sample_quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

std::ptrdiff_t samples_for(double seconds, double dt) { return static_cast<std::ptrdiff_t>(std::lround(seconds / dt)); }

}  // namespace

double PeakThreshold::resolve(const Signal& sig) const {
  if (kind == Kind::Absolute) return value;
  auto s = sig.samples();
  return value * sample_quantile({s.begin(), s.end()}, quantile);
}

void SegmentationParams::validate() const {
  if (!(pre_s >= 0.0)) throw ArgumentError("pre window must be >= 0 seconds");
  if (!(post_s > 0.0)) throw ArgumentError("post window must be > 0 seconds");
  if (!(min_peak_distance_s > 0.0)) throw ArgumentError("minimum peak distance must be > 0 seconds");
  if (threshold.kind == PeakThreshold::Kind::QuantileRelative &&
      !(threshold.quantile >= 0.0 && threshold.quantile <= 1.0))
    throw ArgumentError("threshold quantile must lie in [0, 1]");
  if (!std::isfinite(threshold.value)) throw ArgumentError("threshold must be finite");
}

std::vector<std::size_t> detect_peaks(const Signal& sig, const SegmentationParams& params) {
  params.validate();
  auto x = sig.samples();
  if (x.size() < 3) return {};
  const double thr = params.threshold.resolve(sig);

  std::vector<std::size_t> candidates;
  for (std::size_t i = 1; i + 1 < x.size(); ++i)
    if (x[i] > x[i - 1] && x[i] >= x[i + 1] && x[i] > thr) candidates.push_back(i);

  std::stable_sort(candidates.begin(), candidates.end(), [&](std::size_t a, std::size_t b) { return x[a] > x[b]; });

  const auto min_gap = static_cast<std::size_t>(std::ceil(params.min_peak_distance_s / sig.dt() - 1e-9));
  std::set<std::size_t> accepted;
  for (std::size_t c : candidates) {
    auto next = accepted.lower_bound(c);
    if (next != accepted.end() && *next - c < min_gap) continue;
    if (next != accepted.begin() && c - *std::prev(next) < min_gap) continue;
    accepted.insert(c);
  }
  return {accepted.begin(), accepted.end()};
}

Segmentation extract_excerpts(const Signal& sig, const std::vector<std::size_t>& peaks,
                              const SegmentationParams& params) {
  params.validate();
  if (!std::is_sorted(peaks.begin(), peaks.end())) throw ArgumentError("peaks must be sorted ascending");
  const std::ptrdiff_t before = samples_for(params.pre_s, sig.dt());
  const std::ptrdiff_t after = samples_for(params.post_s, sig.dt());
  const auto len = static_cast<std::size_t>(before + after + 1);
  const auto total = static_cast<std::ptrdiff_t>(sig.size());

  std::vector<double> data;
  std::vector<std::size_t> kept;
  std::size_t dropped = 0;
  auto x = sig.samples();
  for (std::size_t p : peaks) {
    const auto pi = static_cast<std::ptrdiff_t>(p);
    if (pi - before < 0 || pi + after >= total) {
      ++dropped;
      continue;
    }
    data.insert(data.end(), x.begin() + (pi - before), x.begin() + (pi + after + 1));
    kept.push_back(p);
  }
  if (kept.empty())
    throw SegmentationError("no excerpt fits inside the record (" + std::to_string(peaks.size()) +
                            " peaks, window of " + std::to_string(len) + " samples)");
  const double t0 = -static_cast<double>(before) * sig.dt();
  return Segmentation{ObservationSet(kept.size(), len, std::move(data), sig.dt(), t0), std::move(kept), dropped};
}

std::vector<std::optional<double>> peak_to_peak_distances(const ObservationSet& obs,
                                                          const SegmentationParams& params) {
  const std::ptrdiff_t origin = samples_for(-obs.t0(), obs.dt());
  std::vector<std::optional<double>> out;
  out.reserve(obs.count());
  for (std::size_t k = 0; k < obs.count(); ++k) {
    const std::vector<std::size_t> peaks = detect_peaks(obs.signal(k), params);
    auto first = std::find_if(peaks.begin(), peaks.end(), [&](std::size_t p) {
      return std::abs(static_cast<std::ptrdiff_t>(p) - origin) <= 1;
    });
    if (first == peaks.end() || std::next(first) == peaks.end()) {
      out.emplace_back(std::nullopt);
      continue;
    }
    out.emplace_back(static_cast<double>(*std::next(first) - *first) * obs.dt());
  }
  return out;
}

}  // namespace warpcenter
