#include "warpcenter/signal.hpp"

#include <cmath>
#include <string>

#include "warpcenter/error.hpp"

namespace warpcenter {

namespace {

void check_grid(std::size_t length, double dt, double t0) {
  if (length == 0) throw ArgumentError("signal must have at least one sample");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ArgumentError("sample interval dt must be positive and finite");
  if (!std::isfinite(t0)) throw ArgumentError("t0 must be finite");
}

void check_finite(std::span<const double> v) {
  for (std::size_t i = 0; i < v.size(); ++i)
    if (!std::isfinite(v[i])) throw ArgumentError("non-finite sample at index " + std::to_string(i));
}

}  // namespace

Signal::Signal(std::vector<double> samples, double dt, double t0)
    : samples_(std::move(samples)), dt_(dt), t0_(t0) {
  check_grid(samples_.size(), dt_, t0_);
  check_finite(samples_);
}

ObservationSet::ObservationSet(std::vector<Signal> observations) {
  if (observations.empty()) throw ArgumentError("observation set must hold at least one observation");
  const Signal& first = observations.front();
  n_ = observations.size();
  length_ = first.size();
  dt_ = first.dt();
  t0_ = first.t0();
  data_.reserve(n_ * length_);
  for (std::size_t k = 0; k < n_; ++k) {
    if (!observations[k].same_grid(first))
      throw ArgumentError("observation " + std::to_string(k) + " does not share the grid of observation 0");
    auto s = observations[k].samples();
    data_.insert(data_.end(), s.begin(), s.end());
  }
}

ObservationSet::ObservationSet(std::size_t n, std::size_t length, std::vector<double> data, double dt,
                               double t0)
    : n_(n), length_(length), data_(std::move(data)), dt_(dt), t0_(t0) {
  if (n_ == 0) throw ArgumentError("observation set must hold at least one observation");
  check_grid(length_, dt_, t0_);
  if (data_.size() != n_ * length_) throw ArgumentError("observation data size does not equal n * length");
  check_finite(data_);
}

Signal ObservationSet::signal(std::size_t k) const {
  auto r = row(k);
  return Signal({r.begin(), r.end()}, dt_, t0_);
}

ObservationSet ObservationSet::slice(std::size_t begin, std::size_t len) const {
  if (len == 0 || begin + len > length_) throw ArgumentError("slice exceeds observation length");
  std::vector<double> out;
  out.reserve(n_ * len);
  for (std::size_t k = 0; k < n_; ++k) {
    auto r = row(k).subspan(begin, len);
    out.insert(out.end(), r.begin(), r.end());
  }
  return ObservationSet(n_, len, std::move(out), dt_, t0_ + static_cast<double>(begin) * dt_);
}

}  // namespace warpcenter
