#include "warpcenter/csv.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <string_view>

#include "warpcenter/error.hpp"

namespace warpcenter::csv {

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, res.ptr};
}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_double(std::string_view text, std::size_t line) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw FormatError("line " + std::to_string(line) + ": cannot parse number '" + std::string(text) + "'");
  return v;
}

struct Grid {
  std::optional<double> dt;
  double t0 = 0.0;
};

// Reads "# key=value" header lines, then hands each data line to `row`.
template <class RowFn>
Grid read_body(std::istream& in, RowFn row) {
  Grid grid;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view = trim(line);
    if (view.empty()) continue;
    if (view.front() == '#') {
      view.remove_prefix(1);
      view = trim(view);
      const auto eq = view.find('=');
      if (eq == std::string_view::npos) continue;
      const std::string_view key = trim(view.substr(0, eq));
      const std::string_view value = view.substr(eq + 1);
      if (key == "dt") grid.dt = parse_double(value, lineno);
      if (key == "t0") grid.t0 = parse_double(value, lineno);
      continue;
    }
    row(view, lineno);
  }
  if (!grid.dt) throw FormatError("missing '# dt=<seconds>' header line");
  return grid;
}

void write_header(std::ostream& out, double dt, double t0) {
  out << "# dt=" << format_double(dt) << "\n# t0=" << format_double(t0) << '\n';
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "' for reading");
  return in;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw Error("failed writing '" + path.string() + "'");
}

}  // namespace

void write_signal(std::ostream& out, const Signal& sig) {
  write_header(out, sig.dt(), sig.t0());
  for (double v : sig.samples()) out << format_double(v) << '\n';
}

void write_observations(std::ostream& out, const ObservationSet& obs) {
  write_header(out, obs.dt(), obs.t0());
  for (std::size_t k = 0; k < obs.count(); ++k) {
    auto r = obs.row(k);
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (i) out << ',';
      out << format_double(r[i]);
    }
    out << '\n';
  }
}

Signal read_signal(std::istream& in) {
  std::vector<double> samples;
  const Grid grid = read_body(in, [&](std::string_view line, std::size_t lineno) {
    if (line.find(',') != std::string_view::npos)
      throw FormatError("line " + std::to_string(lineno) + ": signal files hold one value per line");
    samples.push_back(parse_double(line, lineno));
  });
  if (samples.empty()) throw FormatError("signal file holds no samples");
  return Signal(std::move(samples), *grid.dt, grid.t0);
}

ObservationSet read_observations(std::istream& in) {
  std::vector<double> data;
  std::size_t rows = 0;
  std::size_t width = 0;
  const Grid grid = read_body(in, [&](std::string_view line, std::size_t lineno) {
    std::size_t fields = 0;
    while (true) {
      const auto comma = line.find(',');
      data.push_back(parse_double(line.substr(0, comma), lineno));
      ++fields;
      if (comma == std::string_view::npos) break;
      line.remove_prefix(comma + 1);
    }
    if (rows == 0) width = fields;
    if (fields != width)
      throw FormatError("line " + std::to_string(lineno) + ": observation has " + std::to_string(fields) +
                        " samples, expected " + std::to_string(width));
    ++rows;
  });
  if (rows == 0) throw FormatError("observation file holds no observations");
  return ObservationSet(rows, width, std::move(data), *grid.dt, grid.t0);
}

void write_signal(const std::filesystem::path& path, const Signal& sig) {
  auto out = open_out(path);
  write_signal(out, sig);
  finish(out, path);
}

void write_observations(const std::filesystem::path& path, const ObservationSet& obs) {
  auto out = open_out(path);
  write_observations(out, obs);
  finish(out, path);
}

Signal read_signal(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_signal(in);
}

ObservationSet read_observations(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_observations(in);
}

void write_scores(std::ostream& out, const CentralityScores& scores, std::span<const std::size_t> ranking) {
  out << "node,score,rank\n";
  for (std::size_t r = 0; r < ranking.size(); ++r)
    out << ranking[r] << ',' << format_double(scores.c[ranking[r]]) << ',' << r << '\n';
}

void write_peaks(std::ostream& out, const Signal& record, std::span<const std::size_t> peaks) {
  out << "index,time\n";
  for (std::size_t p : peaks) out << p << ',' << format_double(record.time_at(p)) << '\n';
}

void write_laplacian(std::ostream& out, const SparseLaplacian& lap) {
  const Eigen::SparseMatrix<double, Eigen::RowMajor> rows(lap.matrix());
  out << "row,col,value\n";
  for (Eigen::Index r = 0; r < rows.outerSize(); ++r)
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(rows, r); it; ++it)
      out << it.row() << ',' << it.col() << ',' << format_double(it.value()) << '\n';
}

void write_peak_to_peak(std::ostream& out, const std::vector<std::optional<double>>& distances) {
  out << "excerpt,distance\n";
  for (std::size_t k = 0; k < distances.size(); ++k)
    out << k << ',' << (distances[k] ? format_double(*distances[k]) : std::string("NA")) << '\n';
}

}  // namespace warpcenter::csv
