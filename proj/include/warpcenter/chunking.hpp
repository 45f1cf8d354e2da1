#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "warpcenter/centrality.hpp"
#include "warpcenter/signal.hpp"

namespace warpcenter {

inline constexpr std::size_t kMinChunkLength = 16;

/// Overlapping pieces of chunk_len samples every hop samples, recombined with
/// half-cosine ramps of length chunk_len - hop.
struct ChunkPlan {
  std::size_t chunk_len = 0;
  std::size_t hop = 0;

  std::size_t taper() const noexcept { return chunk_len - hop; }
  /// Throws ArgumentError unless 0 < hop < chunk_len <= 2 hop and chunk_len <= length,
  /// or the plan covers `length` with a single piece.
  void validate(std::size_t length) const;
};

/// Piece starts for a signal of `length` samples: 0, hop, 2 hop, ... with the
/// last start clamped to length - chunk_len.
std::vector<std::size_t> piece_starts(std::size_t length, const ChunkPlan& plan);

/// Window of piece `index` in its local coordinates. Ramps sit where the piece
/// overlaps its neighbours on the nominal hop grid; the first piece has no left
/// ramp and the last no right ramp. The windows sum to 1 at every sample.
std::vector<double> piece_window(std::size_t length, const ChunkPlan& plan, std::size_t index);

std::vector<ObservationSet> dissect(const ObservationSet& obs, const ChunkPlan& plan);

/// Windowed sum of pieces at their plan offsets; output has `length` samples.
Signal overlap_add(const std::vector<Signal>& pieces, const ChunkPlan& plan, std::size_t length);

/// Seed for piece t: rng_seed + t * 0x9E3779B97F4A7C15 (piece 0 uses rng_seed itself).
std::uint64_t piece_seed(std::uint64_t rng_seed, std::size_t piece) noexcept;

struct ChunkedEstimate {
  Signal estimate;
  std::vector<std::size_t> starts;
  std::vector<TemplateEstimate> pieces;
};

/// Per-piece estimate_template (piece t seeded with piece_seed(seed, t)) followed
/// by overlap_add. Failures are rethrown with the piece index prefixed. Pieces
/// shorter than kMinChunkLength are rejected.
ChunkedEstimate estimate_template_chunked_detailed(const ObservationSet& obs, const ChunkPlan& plan,
                                                   const EstimateOptions& options);
Signal estimate_template_chunked(const ObservationSet& obs, const ChunkPlan& plan,
                                 const EstimateOptions& options);

}  // namespace warpcenter
