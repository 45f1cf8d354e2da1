#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "warpcenter/centrality.hpp"
#include "warpcenter/graph.hpp"
#include "warpcenter/signal.hpp"

namespace warpcenter::csv {

// Signal file:          "# dt=<s>\n# t0=<s>\n" then one sample per line.
// Observation set file: same header, then one comma-separated observation per line.
// Numbers use the shortest round-trip decimal form.

std::string format_double(double v);

void write_signal(std::ostream& out, const Signal& sig);
void write_observations(std::ostream& out, const ObservationSet& obs);
Signal read_signal(std::istream& in);
ObservationSet read_observations(std::istream& in);

void write_signal(const std::filesystem::path& path, const Signal& sig);
void write_observations(const std::filesystem::path& path, const ObservationSet& obs);
Signal read_signal(const std::filesystem::path& path);
ObservationSet read_observations(const std::filesystem::path& path);

/// "node,score,rank" rows in ranking order; rank is 0 for the most central node.
void write_scores(std::ostream& out, const CentralityScores& scores, std::span<const std::size_t> ranking);
/// "index,time" rows; time relative to the record's t0 grid.
void write_peaks(std::ostream& out, const Signal& record, std::span<const std::size_t> peaks);
/// "row,col,value" for every stored entry, row-major order.
void write_laplacian(std::ostream& out, const SparseLaplacian& lap);
/// "excerpt,distance" rows, NA for missing.
void write_peak_to_peak(std::ostream& out, const std::vector<std::optional<double>>& distances);

}  // namespace warpcenter::csv
