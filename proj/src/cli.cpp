#include "warpcenter/cli.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "warpcenter/centrality.hpp"
#include "warpcenter/chunking.hpp"
#include "warpcenter/csv.hpp"
#include "warpcenter/error.hpp"
#include "warpcenter/graph.hpp"
#include "warpcenter/segmentation.hpp"
#include "warpcenter/signal_model.hpp"

namespace warpcenter::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr const char* kManifestName = "manifest.jsonl";

// Replayable record of one run. `params` holds every flag except --threads
// (results do not depend on it); input paths are stored absolute.
struct Manifest {
  Manifest(std::string cmd, bool timings) : command(std::move(cmd)), with_timings(timings) {}

  std::string command;
  json params = json::object();
  json outputs = json::object();
  std::vector<json> stages;
  bool with_timings = false;

  void stage(std::string name, json fields, double seconds) {
    json rec = {{"record", "stage"}, {"stage", std::move(name)}};
    for (auto& [k, v] : fields.items()) rec[k] = v;
    if (with_timings) rec["seconds"] = seconds;
    stages.push_back(std::move(rec));
  }

  void write(const fs::path& dir) const {
    std::ofstream out(dir / kManifestName, std::ios::binary);
    if (!out) throw Error("cannot write manifest in '" + dir.string() + "'");
    json run = {{"record", "run"}, {"command", command}, {"params", params}, {"outputs", outputs}};
    out << run.dump() << '\n';
    for (const auto& s : stages) out << s.dump() << '\n';
  }
};

class Log {
public:
  Log(std::ostream& out, std::string command) : out_(out), command_(std::move(command)) {}
  void line(const std::string& text) { out_ << '[' << command_ << "] " << text << std::endl; }

private:
  std::ostream& out_;
  std::string command_;
};

double since(std::chrono::steady_clock::time_point t) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

std::string absolute_path(const std::string& p) { return fs::absolute(p).lexically_normal().string(); }

fs::path prepare_out_dir(const std::string& dir) {
  fs::path p(dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (!fs::is_directory(p)) throw Error("cannot create output directory '" + dir + "'");
  return p;
}

template <class Fn>
void write_text(const fs::path& path, Fn fn) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  fn(out);
  out.flush();
  if (!out) throw Error("failed writing '" + path.string() + "'");
}

// ---------------------------------------------------------------- synth

struct SynthConfig {
  std::size_t n = 1000;
  double alpha = 1e-4;
  double sigma = 0.1;
  double noise = 0.0;
  std::size_t samples = 501;
  std::string truth;
  std::uint64_t seed = 0;
  bool warps = false;
  std::string out_dir = ".";
  std::size_t threads = 0;
  bool timings = false;
};

int run_synth(const SynthConfig& cfg, std::ostream& out) {
  Log log(out, "synth");
  const WarpKernelParams kernel{cfg.alpha, cfg.sigma};
  kernel.validate();
  if (cfg.n < 1) throw ArgumentError("--n must be >= 1");
  if (!(cfg.noise >= 0.0)) throw ArgumentError("--noise must be >= 0");
  if (cfg.truth.empty() && cfg.samples < 2) throw ArgumentError("--samples must be >= 2");

  Manifest manifest("synth", cfg.timings);
  manifest.params = {{"n", cfg.n},         {"alpha", cfg.alpha}, {"sigma", cfg.sigma},
                     {"noise", cfg.noise}, {"samples", cfg.samples},
                     {"truth", cfg.truth.empty() ? std::string() : absolute_path(cfg.truth)},
                     {"seed", cfg.seed},   {"warps", cfg.warps}};

  const Signal truth = cfg.truth.empty() ? synthetic_truth(cfg.samples) : csv::read_signal(fs::path(cfg.truth));
  const fs::path dir = prepare_out_dir(cfg.out_dir);
  log.line("seed=" + std::to_string(cfg.seed));

  const auto start = std::chrono::steady_clock::now();
  std::vector<WarpField> warps;
  const ObservationSet obs =
      generate_observations(truth, kernel, cfg.n, cfg.noise, cfg.seed, cfg.threads, cfg.warps ? &warps : nullptr);
  manifest.stage("generate", {{"observations", obs.count()}, {"length", obs.length()}}, since(start));

  csv::write_signal(dir / "truth.csv", truth);
  csv::write_observations(dir / "observations.csv", obs);
  manifest.outputs["truth"] = "truth.csv";
  manifest.outputs["observations"] = "observations.csv";
  if (cfg.warps) {
    std::vector<double> data;
    data.reserve(obs.count() * obs.length());
    for (const auto& w : warps) data.insert(data.end(), w.u.begin(), w.u.end());
    csv::write_observations(dir / "warps.csv",
                            ObservationSet(obs.count(), obs.length(), std::move(data), obs.dt(), obs.t0()));
    manifest.outputs["warps"] = "warps.csv";
  }
  manifest.write(dir);
  log.line("wrote " + std::to_string(obs.count()) + " observations of " + std::to_string(obs.length()) +
           " samples to " + (dir / "observations.csv").string());
  return kOk;
}

// ---------------------------------------------------------------- segment

struct SegmentConfig {
  std::string input;
  double pre = 0.1;
  double post = 1.0;
  double min_distance = 0.3;
  std::optional<double> threshold;
  double threshold_fraction = 0.6;
  double threshold_quantile = 0.99;
  bool p2p = false;
  std::string out_dir = ".";
  bool timings = false;
};

int run_segment(const SegmentConfig& cfg, std::ostream& out) {
  Log log(out, "segment");
  SegmentationParams params;
  params.pre_s = cfg.pre;
  params.post_s = cfg.post;
  params.min_peak_distance_s = cfg.min_distance;
  params.threshold = cfg.threshold ? PeakThreshold::absolute(*cfg.threshold)
                                   : PeakThreshold::relative(cfg.threshold_fraction, cfg.threshold_quantile);
  params.validate();

  Manifest manifest("segment", cfg.timings);
  manifest.params = {{"input", absolute_path(cfg.input)},
                     {"pre", cfg.pre},
                     {"post", cfg.post},
                     {"min-distance", cfg.min_distance}};
  if (cfg.threshold) manifest.params["threshold"] = *cfg.threshold;
  manifest.params["threshold-fraction"] = cfg.threshold_fraction;
  manifest.params["threshold-quantile"] = cfg.threshold_quantile;
  manifest.params["p2p"] = cfg.p2p;

  const Signal record = csv::read_signal(fs::path(cfg.input));
  const fs::path dir = prepare_out_dir(cfg.out_dir);

  auto start = std::chrono::steady_clock::now();
  const std::vector<std::size_t> peaks = detect_peaks(record, params);
  manifest.stage("detect", {{"peaks", peaks.size()}}, since(start));
  log.line("detected " + std::to_string(peaks.size()) + " peaks");

  start = std::chrono::steady_clock::now();
  const Segmentation seg = extract_excerpts(record, peaks, params);
  manifest.stage("extract", {{"excerpts", seg.excerpts.count()}, {"dropped", seg.dropped}}, since(start));

  csv::write_observations(dir / "observations.csv", seg.excerpts);
  write_text(dir / "peaks.csv", [&](std::ostream& o) { csv::write_peaks(o, record, seg.peaks); });
  manifest.outputs["observations"] = "observations.csv";
  manifest.outputs["peaks"] = "peaks.csv";
  if (cfg.p2p) {
    const auto distances = peak_to_peak_distances(seg.excerpts, params);
    write_text(dir / "p2p.csv", [&](std::ostream& o) { csv::write_peak_to_peak(o, distances); });
    manifest.outputs["p2p"] = "p2p.csv";
  }
  manifest.write(dir);
  log.line("N=" + std::to_string(seg.excerpts.count()) + " excerpt_length=" +
           std::to_string(seg.excerpts.length()) + " dropped=" + std::to_string(seg.dropped));
  return kOk;
}

// ---------------------------------------------------------------- estimate

struct EstimateConfig {
  std::string input;
  std::size_t m = 10;
  std::size_t j = 1000;
  std::size_t k = 5;
  std::uint64_t seed = 0;
  bool exhaustive = false;
  bool chunked = false;
  std::size_t chunk_len = 0;
  std::size_t hop = 0;
  std::string dump_laplacian;
  bool plot_data = false;
  std::string out_dir = ".";
  std::size_t threads = 0;
  bool timings = false;
};

int run_estimate(const EstimateConfig& cfg, std::ostream& out) {
  Log log(out, "estimate");
  Manifest manifest("estimate", cfg.timings);
  manifest.params = {{"input", absolute_path(cfg.input)},
                     {"m", cfg.m},
                     {"j", cfg.j},
                     {"k", cfg.k},
                     {"seed", cfg.seed},
                     {"exhaustive", cfg.exhaustive},
                     {"chunked", cfg.chunked}};
  if (cfg.chunked) {
    manifest.params["chunk-len"] = cfg.chunk_len;
    manifest.params["hop"] = cfg.hop;
  }
  if (!cfg.dump_laplacian.empty()) manifest.params["dump-laplacian"] = absolute_path(cfg.dump_laplacian);
  manifest.params["plot-data"] = cfg.plot_data;

  auto start = std::chrono::steady_clock::now();
  const ObservationSet obs = csv::read_observations(fs::path(cfg.input));
  manifest.stage("read", {{"observations", obs.count()}, {"length", obs.length()}}, since(start));
  log.line("read " + std::to_string(obs.count()) + " observations of " + std::to_string(obs.length()) + " samples");

  EstimateOptions options;
  options.m = cfg.m;
  options.trials = cfg.j;
  options.k = cfg.k;
  options.seed = cfg.seed;
  options.exhaustive = cfg.exhaustive;
  options.threads = cfg.threads;

  if (cfg.m < 1 || obs.count() < cfg.m + 1)
    throw ArgumentError("--m must satisfy 1 <= M <= N - 1 (N = " + std::to_string(obs.count()) + ")");
  if (cfg.k < 1 || cfg.k > obs.count())
    throw ArgumentError("--k must satisfy 1 <= K <= N (N = " + std::to_string(obs.count()) + ")");
  if (!cfg.exhaustive && cfg.j < 2) throw ArgumentError("--j must be >= 2");
  if (cfg.chunked) {
    if (!cfg.dump_laplacian.empty()) throw ArgumentError("--dump-laplacian cannot be combined with --chunked");
    const std::size_t len = cfg.chunk_len == 0 ? obs.length() : cfg.chunk_len;
    ChunkPlan{len, cfg.hop == 0 ? len : cfg.hop}.validate(obs.length());
  }

  const fs::path dir = prepare_out_dir(cfg.out_dir);
  Signal estimate = obs.signal(0);
  std::vector<std::size_t> central_ranking;

  if (cfg.chunked) {
    const std::size_t len = cfg.chunk_len == 0 ? obs.length() : cfg.chunk_len;
    const ChunkPlan plan{len, cfg.hop == 0 ? len : cfg.hop};
    start = std::chrono::steady_clock::now();
    ChunkedEstimate result = estimate_template_chunked_detailed(obs, plan, options);
    manifest.stage("chunked", {{"pieces", result.pieces.size()}}, since(start));
    write_text(dir / "scores.csv", [&](std::ostream& o) {
      o << "piece,start,node,score,rank\n";
      for (std::size_t t = 0; t < result.pieces.size(); ++t) {
        const auto& piece = result.pieces[t];
        for (std::size_t r = 0; r < piece.ranking.size(); ++r)
          o << t << ',' << result.starts[t] << ',' << piece.ranking[r] << ','
            << csv::format_double(piece.scores.c[piece.ranking[r]]) << ',' << r << '\n';
      }
    });
    estimate = std::move(result.estimate);
    log.line("estimated " + std::to_string(result.pieces.size()) + " pieces");
  } else {
    start = std::chrono::steady_clock::now();
    const LaplacianBuild build = build_laplacian_detailed(obs, GraphBuildParams{cfg.m, std::nullopt}, cfg.threads);
    manifest.stage("laplacian",
                   {{"nonzeros", build.laplacian.matrix().nonZeros()},
                    {"epsilon", build.epsilon},
                    {"connected", is_connected(build.laplacian)}},
                   since(start));
    if (!cfg.dump_laplacian.empty())
      write_text(fs::path(cfg.dump_laplacian), [&](std::ostream& o) { csv::write_laplacian(o, build.laplacian); });

    TemplateEstimate result = estimate_template_with(obs, build, options);
    manifest.stage("centrality", {{"trials", result.scores.trials}}, result.timings.centrality_s);
    manifest.stage("average", {{"k", cfg.k}}, result.timings.average_s);
    write_text(dir / "scores.csv",
               [&](std::ostream& o) { csv::write_scores(o, result.scores, result.ranking); });
    estimate = std::move(result.estimate);
    central_ranking = std::move(result.ranking);
    log.line("most central observation: " + std::to_string(central_ranking.front()));
  }

  csv::write_signal(dir / "estimate.csv", estimate);
  manifest.outputs["estimate"] = "estimate.csv";
  manifest.outputs["scores"] = "scores.csv";
  if (cfg.plot_data) {
    csv::write_signal(dir / "ensemble.csv", ensemble_average(obs));
    manifest.outputs["ensemble"] = "ensemble.csv";
    if (!central_ranking.empty()) {
      csv::write_signal(dir / "peripheral.csv", peripheral_average(obs, central_ranking, cfg.k));
      manifest.outputs["peripheral"] = "peripheral.csv";
    }
  }
  manifest.write(dir);
  log.line("wrote " + (dir / "estimate.csv").string());
  return kOk;
}

// ---------------------------------------------------------------- blur

struct BlurConfig {
  std::string input;
  double variance = 0.0;
  std::string out_dir = ".";
  bool timings = false;
};

int run_blur(const BlurConfig& cfg, std::ostream& out) {
  Log log(out, "blur");
  if (!(cfg.variance > 0.0)) throw ArgumentError("--variance must be > 0");
  Manifest manifest("blur", cfg.timings);
  manifest.params = {{"input", absolute_path(cfg.input)}, {"variance", cfg.variance}};
  const Signal truth = csv::read_signal(fs::path(cfg.input));
  const fs::path dir = prepare_out_dir(cfg.out_dir);
  const auto start = std::chrono::steady_clock::now();
  const Signal blurred = gaussian_blur_oracle(truth, cfg.variance);
  manifest.stage("blur", {{"samples", blurred.size()}}, since(start));
  csv::write_signal(dir / "blurred.csv", blurred);
  manifest.outputs["blurred"] = "blurred.csv";
  manifest.write(dir);
  log.line("wrote " + (dir / "blurred.csv").string());
  return kOk;
}

// ---------------------------------------------------------------- replay

std::string param_text(const json& v) {
  if (v.is_number_float()) return csv::format_double(v.get<double>());
  if (v.is_number_unsigned()) return std::to_string(v.get<std::uint64_t>());
  if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
  return v.get<std::string>();
}

std::optional<std::string> read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) return std::nullopt;
  return std::string(std::istreambuf_iterator<char>(in), {});
}

int run_replay(const std::string& manifest_path, std::size_t threads, std::ostream& out, std::ostream& err);

// ---------------------------------------------------------------- dispatch

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Template estimation from time-warped observations by graph centrality", "warpcenter"};
  app.require_subcommand(1);

  SynthConfig synth;
  auto* s = app.add_subcommand("synth", "Generate warped noisy observations of a prototype signal");
  s->add_option("--n", synth.n, "Number of observations")->check(CLI::PositiveNumber);
  s->add_option("--alpha", synth.alpha, "Warp kernel variance scale (s^2)")->check(CLI::NonNegativeNumber);
  s->add_option("--sigma", synth.sigma, "Warp kernel correlation length (s)")->check(CLI::PositiveNumber);
  s->add_option("--noise", synth.noise, "White noise standard deviation")->check(CLI::NonNegativeNumber);
  s->add_option("--samples", synth.samples, "Grid length of the built-in prototype");
  s->add_option("--truth", synth.truth, "Prototype signal CSV (default: built-in)");
  s->add_option("--seed", synth.seed, "Master seed");
  s->add_flag("--warps", synth.warps, "Also write the sampled warp fields");
  s->add_option("--out-dir", synth.out_dir, "Output directory");
  s->add_option("--threads", synth.threads, "Worker threads (0 = default)");
  s->add_flag("--manifest-timings", synth.timings, "Record per-stage wall-clock time in the manifest");

  SegmentConfig seg;
  std::optional<double> threshold;
  auto* g = app.add_subcommand("segment", "Cut a long record into peak-aligned excerpts");
  g->add_option("--input", seg.input, "Record CSV")->required();
  g->add_option("--pre", seg.pre, "Seconds before each peak");
  g->add_option("--post", seg.post, "Seconds after each peak");
  g->add_option("--min-distance", seg.min_distance, "Minimum seconds between peaks");
  g->add_option("--threshold", threshold, "Absolute peak threshold");
  g->add_option("--threshold-fraction", seg.threshold_fraction, "Relative threshold fraction");
  g->add_option("--threshold-quantile", seg.threshold_quantile, "Relative threshold amplitude quantile");
  g->add_flag("--p2p", seg.p2p, "Also write peak-to-peak distances per excerpt");
  g->add_option("--out-dir", seg.out_dir, "Output directory");
  g->add_flag("--manifest-timings", seg.timings, "Record per-stage wall-clock time in the manifest");

  EstimateConfig est;
  auto* e = app.add_subcommand("estimate", "Estimate the prototype as the K-central average");
  e->add_option("--input", est.input, "Observations CSV")->required();
  e->add_option("--m", est.m, "Neighbours per observation");
  e->add_option("--j", est.j, "Centrality trials");
  e->add_option("--k", est.k, "Number of central observations to average");
  e->add_option("--seed", est.seed, "Master seed");
  e->add_flag("--exhaustive", est.exhaustive, "Enumerate all ordered seed pairs instead of sampling");
  e->add_flag("--chunked", est.chunked, "Estimate overlapping pieces separately and overlap-add");
  e->add_option("--chunk-len", est.chunk_len, "Samples per piece (with --chunked)");
  e->add_option("--hop", est.hop, "Samples between piece starts (with --chunked)");
  e->add_option("--dump-laplacian", est.dump_laplacian, "Write the Laplacian as row,col,value CSV");
  e->add_flag("--plot-data", est.plot_data, "Also write ensemble and peripheral averages");
  e->add_option("--out-dir", est.out_dir, "Output directory");
  e->add_option("--threads", est.threads, "Worker threads (0 = default)");
  e->add_flag("--manifest-timings", est.timings, "Record per-stage wall-clock time in the manifest");

  BlurConfig blur;
  auto* b = app.add_subcommand("blur", "Convolve a signal with a normal pdf of given variance");
  b->add_option("--input", blur.input, "Signal CSV")->required();
  b->add_option("--variance", blur.variance, "Kernel variance (s^2)")->required();
  b->add_option("--out-dir", blur.out_dir, "Output directory");
  b->add_flag("--manifest-timings", blur.timings, "Record per-stage wall-clock time in the manifest");

  std::string manifest_path;
  std::size_t replay_threads = 0;
  auto* r = app.add_subcommand("replay", "Re-run a recorded command and compare its outputs byte-for-byte");
  r->add_option("--manifest", manifest_path, "manifest.jsonl of the original run")->required();
  r->add_option("--threads", replay_threads, "Worker threads (0 = default)");

  std::vector<std::string> rest(args.begin() + (args.empty() ? 0 : 1), args.end());
  std::reverse(rest.begin(), rest.end());
  try {
    app.parse(rest);
  } catch (const CLI::ParseError& ex) {
    if (ex.get_exit_code() == 0) {
      app.exit(ex, out, err);
      return kOk;
    }
    err << "usage error: " << ex.what() << "\n" << "run with --help for usage\n";
    return kUsage;
  }
  seg.threshold = threshold;

  if (s->parsed()) return run_synth(synth, out);
  if (g->parsed()) return run_segment(seg, out);
  if (e->parsed()) return run_estimate(est, out);
  if (b->parsed()) return run_blur(blur, out);
  return run_replay(manifest_path, replay_threads, out, err);
}

int guarded(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  try {
    return dispatch(args, out, err);
  } catch (const ArgumentError& ex) {
    err << "usage error: " << ex.what() << '\n';
    return kUsage;
  } catch (const SegmentationError& ex) {
    err << "segmentation error: " << ex.what() << '\n';
    return kSegmentationEmpty;
  } catch (const ConstructionError& ex) {
    err << "graph error: " << ex.what() << '\n';
    if (ex.kind() == ConstructionError::Kind::DuplicateObservations) return kDuplicates;
    err << "hint: increase --m\n";
    return kDisconnected;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << '\n';
    return kOther;
  }
}

int run_replay(const std::string& manifest_path, std::size_t threads, std::ostream& out, std::ostream& err) {
  Log log(out, "replay");
  std::ifstream in(manifest_path, std::ios::binary);
  if (!in) throw Error("cannot open manifest '" + manifest_path + "'");
  std::string first;
  std::getline(in, first);
  const json run = json::parse(first);
  if (run.value("record", "") != "run") throw FormatError("manifest does not start with a run record");
  const std::string command = run.at("command").get<std::string>();

  const fs::path original_dir = fs::path(manifest_path).parent_path();
  std::mt19937_64 name_rng(std::random_device{}());
  const fs::path scratch = fs::temp_directory_path() / ("warpcenter-replay-" + std::to_string(name_rng()));

  std::vector<std::string> args{"warpcenter", command};
  for (const auto& [key, value] : run.at("params").items()) {
    if (value.is_boolean()) {
      if (value.get<bool>()) args.push_back("--" + key);
      continue;
    }
    const std::string text = param_text(value);
    if (text.empty()) continue;
    if (key == "dump-laplacian") {
      args.push_back("--" + key);
      args.push_back((scratch / "laplacian.dump").string());
      continue;
    }
    args.push_back("--" + key);
    args.push_back(text);
  }
  args.push_back("--out-dir");
  args.push_back(scratch.string());
  if (threads != 0 && command != "segment" && command != "blur") {
    args.push_back("--threads");
    args.push_back(std::to_string(threads));
  }

  std::ostringstream sub_out;
  const int code = guarded(args, sub_out, err);
  if (code != kOk) {
    fs::remove_all(scratch);
    err << "replayed command failed with exit code " << code << '\n';
    return code;
  }
  bool identical = true;
  for (const auto& [name, file] : run.at("outputs").items()) {
    const auto before = read_file(original_dir / file.get<std::string>());
    const auto after = read_file(scratch / file.get<std::string>());
    const bool same = before && after && *before == *after;
    log.line(name + " " + (same ? "identical" : "DIFFERS"));
    identical = identical && same;
  }
  fs::remove_all(scratch);
  log.line(identical ? "replay matches" : "replay differs");
  return identical ? kOk : kOther;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  return guarded(args, out, err);
}

}  // namespace warpcenter::cli
