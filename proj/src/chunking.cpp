#include "warpcenter/chunking.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "warpcenter/error.hpp"

namespace warpcenter {

void ChunkPlan::validate(std::size_t length) const {
  if (chunk_len == 0 || chunk_len > length)
    throw ArgumentError("chunk length must be in [1, " + std::to_string(length) + "]");
  if (hop == 0) throw ArgumentError("hop must be > 0");
  if (chunk_len == length) return;  // single piece
  if (hop >= chunk_len) throw ArgumentError("hop must be smaller than the chunk length");
  if (chunk_len > 2 * hop) throw ArgumentError("taper (chunk_len - hop) must not exceed hop");
}

std::vector<std::size_t> piece_starts(std::size_t length, const ChunkPlan& plan) {
  plan.validate(length);
  std::vector<std::size_t> starts{0};
  while (starts.back() + plan.chunk_len < length) {
    const std::size_t next = starts.back() + plan.hop;
    starts.push_back(next + plan.chunk_len > length ? length - plan.chunk_len : next);
  }
  return starts;
}

namespace {

double ramp_up(std::size_t m, std::size_t ramp) {
  return 0.5 * (1.0 - std::cos(std::numbers::pi * (static_cast<double>(m) + 0.5) / static_cast<double>(ramp)));
}

double ramp_down(std::size_t m, std::size_t ramp) {
  return 0.5 * (1.0 + std::cos(std::numbers::pi * (static_cast<double>(m) + 0.5) / static_cast<double>(ramp)));
}

}  // namespace

std::vector<double> piece_window(std::size_t length, const ChunkPlan& plan, std::size_t index) {
  const std::vector<std::size_t> starts = piece_starts(length, plan);
  if (index >= starts.size()) throw ArgumentError("piece index out of range");
  std::vector<double> w(plan.chunk_len, 1.0);
  if (starts.size() == 1) return w;

  const std::size_t ramp = plan.taper();
  const std::size_t start = starts[index];
  const std::size_t nominal = index * plan.hop;  // > start only for a clamped last piece
  if (index > 0) {
    const std::size_t lead = nominal - start;
    for (std::size_t n = 0; n < lead; ++n) w[n] = 0.0;
    for (std::size_t m = 0; m < ramp; ++m) w[lead + m] = ramp_up(m, ramp);
  }
  if (index + 1 < starts.size()) {
    for (std::size_t m = 0; m < ramp; ++m) w[plan.hop + m] = ramp_down(m, ramp);
  }
  return w;
}

std::vector<ObservationSet> dissect(const ObservationSet& obs, const ChunkPlan& plan) {
  std::vector<ObservationSet> pieces;
  for (std::size_t start : piece_starts(obs.length(), plan)) pieces.push_back(obs.slice(start, plan.chunk_len));
  return pieces;
}

Signal overlap_add(const std::vector<Signal>& pieces, const ChunkPlan& plan, std::size_t length) {
  const std::vector<std::size_t> starts = piece_starts(length, plan);
  if (pieces.size() != starts.size())
    throw ArgumentError("expected " + std::to_string(starts.size()) + " pieces, got " +
                        std::to_string(pieces.size()));
  for (std::size_t t = 0; t < pieces.size(); ++t)
    if (pieces[t].size() != plan.chunk_len)
      throw ArgumentError("piece " + std::to_string(t) + " has " + std::to_string(pieces[t].size()) +
                          " samples, expected " + std::to_string(plan.chunk_len));
  if (pieces.size() == 1) return pieces.front();

  std::vector<double> out(length, 0.0);
  for (std::size_t t = 0; t < pieces.size(); ++t) {
    const std::vector<double> w = piece_window(length, plan, t);
    auto x = pieces[t].samples();
    for (std::size_t n = 0; n < plan.chunk_len; ++n)
      if (w[n] != 0.0) out[starts[t] + n] += w[n] * x[n];
  }
  return Signal(std::move(out), pieces.front().dt(), pieces.front().t0());
}

std::uint64_t piece_seed(std::uint64_t rng_seed, std::size_t piece) noexcept {
  return rng_seed + static_cast<std::uint64_t>(piece) * 0x9E3779B97F4A7C15ULL;
}

ChunkedEstimate estimate_template_chunked_detailed(const ObservationSet& obs, const ChunkPlan& plan,
                                                   const EstimateOptions& options) {
  if (plan.chunk_len < kMinChunkLength && plan.chunk_len != obs.length())
    throw ArgumentError("chunk length must be >= " + std::to_string(kMinChunkLength) + " samples");
  const std::vector<ObservationSet> pieces = dissect(obs, plan);
  std::vector<TemplateEstimate> results;
  results.reserve(pieces.size());
  for (std::size_t t = 0; t < pieces.size(); ++t) {
    EstimateOptions piece_options = options;
    piece_options.seed = piece_seed(options.seed, t);
    const std::string where = "piece " + std::to_string(t) + ": ";
    try {
      results.push_back(estimate_template(pieces[t], piece_options));
    } catch (const ConstructionError& e) {
      throw ConstructionError(e.kind(), where + e.what());
    } catch (const SolverError& e) {
      throw SolverError(where + e.what(), e.residual());
    } catch (const ArgumentError& e) {
      throw ArgumentError(where + e.what());
    }
  }
  std::vector<Signal> estimates;
  estimates.reserve(results.size());
  for (const auto& r : results) estimates.push_back(r.estimate);
  Signal combined = overlap_add(estimates, plan, obs.length());
  return ChunkedEstimate{std::move(combined), piece_starts(obs.length(), plan), std::move(results)};
}

Signal estimate_template_chunked(const ObservationSet& obs, const ChunkPlan& plan,
                                 const EstimateOptions& options) {
  return estimate_template_chunked_detailed(obs, plan, options).estimate;
}

}  // namespace warpcenter
