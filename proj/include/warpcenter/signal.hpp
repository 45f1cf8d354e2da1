#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace warpcenter {

/// Uniformly sampled real-valued signal.
///
/// Invariants: samples non-empty and finite, dt > 0. The constructor enforces
/// them and throws ArgumentError otherwise.
class Signal {
public:
  Signal(std::vector<double> samples, double dt, double t0 = 0.0);

  std::span<const double> samples() const noexcept { return samples_; }
  std::size_t size() const noexcept { return samples_.size(); }
  double dt() const noexcept { return dt_; }
  double t0() const noexcept { return t0_; }
  double time_at(std::size_t i) const noexcept { return t0_ + static_cast<double>(i) * dt_; }
  double operator[](std::size_t i) const noexcept { return samples_[i]; }

  bool same_grid(const Signal& other) const noexcept {
    return size() == other.size() && dt_ == other.dt_ && t0_ == other.t0_;
  }

  friend bool operator==(const Signal&, const Signal&) = default;

private:
  std::vector<double> samples_;
  double dt_;
  double t0_;
};

/// N >= 1 signals sharing one time grid, stored row-major (one row per observation).
class ObservationSet {
public:
  explicit ObservationSet(std::vector<Signal> observations);
  /// Row-major construction: data.size() must equal n * length.
  ObservationSet(std::size_t n, std::size_t length, std::vector<double> data, double dt, double t0);

  std::size_t count() const noexcept { return n_; }
  std::size_t length() const noexcept { return length_; }
  double dt() const noexcept { return dt_; }
  double t0() const noexcept { return t0_; }

  std::span<const double> row(std::size_t k) const noexcept {
    return {data_.data() + k * length_, length_};
  }
  Signal signal(std::size_t k) const;
  std::span<const double> data() const noexcept { return data_; }

  /// Observations [begin, begin + len) of every row, with t0 shifted accordingly.
  ObservationSet slice(std::size_t begin, std::size_t len) const;

  friend bool operator==(const ObservationSet&, const ObservationSet&) = default;

private:
  std::size_t n_;
  std::size_t length_;
  std::vector<double> data_;
  double dt_;
  double t0_;
};

}  // namespace warpcenter
