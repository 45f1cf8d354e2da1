#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "warpcenter/signal.hpp"

namespace warpcenter {

/// Peak threshold, either an absolute amplitude or `fraction` times the
/// `quantile` of the signal's amplitudes.
struct PeakThreshold {
  enum class Kind { Absolute, QuantileRelative };

  Kind kind = Kind::QuantileRelative;
  double value = 0.6;      ///< absolute amplitude, or the fraction for QuantileRelative
  double quantile = 0.99;  ///< used by QuantileRelative only

  static PeakThreshold absolute(double amplitude) { return {Kind::Absolute, amplitude, 0.0}; }
  static PeakThreshold relative(double fraction, double quantile) {
    return {Kind::QuantileRelative, fraction, quantile};
  }

  double resolve(const Signal& sig) const;
};

struct SegmentationParams {
  double pre_s = 0.1;
  double post_s = 1.0;
  double min_peak_distance_s = 0.3;
  PeakThreshold threshold{};

  void validate() const;
};

/// Local maxima (x[i-1] < x[i] >= x[i+1], interior samples only) above the
/// threshold, pruned greedily by descending amplitude so accepted peaks are at
/// least min_peak_distance_s apart. Returned in ascending order.
std::vector<std::size_t> detect_peaks(const Signal& sig, const SegmentationParams& params);

struct Segmentation {
  ObservationSet excerpts;
  std::vector<std::size_t> peaks;  ///< peaks whose window fit, one per excerpt
  std::size_t dropped = 0;
};

/// Excerpts [p - round(pre_s/dt), p + round(post_s/dt)] around each peak, t0 = -round(pre_s/dt) dt.
/// Windows crossing the record boundary are dropped; throws SegmentationError if none survive.
Segmentation extract_excerpts(const Signal& sig, const std::vector<std::size_t>& peaks,
                              const SegmentationParams& params);

/// Seconds from the peak at t = 0 to the next detected peak in each excerpt;
/// nullopt when the excerpt holds fewer than two peaks.
std::vector<std::optional<double>> peak_to_peak_distances(const ObservationSet& obs,
                                                          const SegmentationParams& params);

}  // namespace warpcenter
