#include <doctest.h>

#include <cmath>
#include <random>

#include "warpcenter/chunking.hpp"
#include "warpcenter/error.hpp"
#include "warpcenter/signal_model.hpp"

using namespace warpcenter;

namespace {

std::vector<double> window_sum(std::size_t length, const ChunkPlan& plan) {
  const auto starts = piece_starts(length, plan);
  std::vector<double> sum(length, 0.0);
  for (std::size_t t = 0; t < starts.size(); ++t) {
    const auto w = piece_window(length, plan, t);
    for (std::size_t n = 0; n < plan.chunk_len; ++n) sum[starts[t] + n] += w[n];
  }
  return sum;
}

double l2(const Signal& a, const Signal& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

}  // namespace

TEST_CASE("piece starts") {
  CHECK(piece_starts(10, {6, 4}) == std::vector<std::size_t>{0, 4});
  CHECK(piece_starts(100, {100, 7}) == std::vector<std::size_t>{0});
  CHECK(piece_starts(100, {40, 30}) == std::vector<std::size_t>{0, 30, 60});
  CHECK(piece_starts(95, {40, 30}) == std::vector<std::size_t>{0, 30, 55});
  CHECK(piece_starts(70, {40, 30}) == std::vector<std::size_t>{0, 30});
}

TEST_CASE("plan validation") {
  CHECK_THROWS_AS(piece_starts(100, {40, 40}), ArgumentError);  // no overlap
  CHECK_THROWS_AS(piece_starts(100, {40, 10}), ArgumentError);  // taper longer than hop
  CHECK_THROWS_AS(piece_starts(100, {101, 50}), ArgumentError);
  CHECK_THROWS_AS(piece_starts(100, {40, 0}), ArgumentError);
  CHECK_NOTHROW(piece_starts(10, {10, 3}));  // single piece, any hop
  CHECK_NOTHROW(piece_starts(100, {16, 8}));
  CHECK_NOTHROW(piece_starts(100, {10, 6}));
}

TEST_CASE("COLA window sum is one everywhere for random plans") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t chunk = 16 + rng() % 200;
    const std::size_t hop = (chunk + 1) / 2 + rng() % (chunk - (chunk + 1) / 2);
    const std::size_t length = chunk + rng() % 2000;
    const ChunkPlan plan{chunk, hop};
    REQUIRE_NOTHROW(plan.validate(length));
    for (double s : window_sum(length, plan)) REQUIRE(std::abs(s - 1.0) <= 1e-12);
  }
  for (double s : window_sum(10, {6, 4})) CHECK(std::abs(s - 1.0) <= 1e-12);
}

TEST_CASE("window shape") {
  const ChunkPlan plan{40, 30};
  const auto first = piece_window(100, plan, 0);
  const auto mid = piece_window(100, plan, 1);
  const auto last = piece_window(100, plan, 2);
  CHECK(first[0] == 1.0);
  CHECK(first[29] == 1.0);
  CHECK(first[30] < 1.0);
  CHECK(first[39] > 0.0);
  CHECK(last[39] == 1.0);
  CHECK(mid[0] > 0.0);
  CHECK(mid[0] < 0.05);
  for (std::size_t n = 0; n + 1 < 10; ++n) {
    CHECK(mid[n] < mid[n + 1]);
    CHECK(first[30 + n] > first[31 + n]);
    CHECK(first[30 + n] == doctest::Approx(1.0 - mid[n]).epsilon(1e-15));
  }
}

TEST_CASE("one piece is returned verbatim") {
  const Signal f = synthetic_truth(64);
  CHECK(overlap_add({f}, {64, 10}, 64) == f);
  const ObservationSet obs = generate_observations(f, {1e-4, 0.1}, 3, 0.1, 1);
  const auto pieces = dissect(obs, {64, 10});
  REQUIRE(pieces.size() == 1);
  CHECK(pieces[0] == obs);
}

TEST_CASE("dissect then overlap_add reproduces the signal") {
  const Signal f = synthetic_truth(301);
  const ObservationSet obs = generate_observations(f, {1e-4, 0.1}, 4, 0.05, 5);
  for (const ChunkPlan plan : {ChunkPlan{50, 30}, ChunkPlan{64, 32}, ChunkPlan{100, 99}}) {
    const auto pieces = dissect(obs, plan);
    for (std::size_t k = 0; k < obs.count(); ++k) {
      std::vector<Signal> parts;
      for (const auto& p : pieces) parts.push_back(p.signal(k));
      const Signal back = overlap_add(parts, plan, obs.length());
      const Signal orig = obs.signal(k);
      CHECK(back.t0() == orig.t0());
      for (std::size_t i = 0; i < orig.size(); ++i) REQUIRE(back[i] == doctest::Approx(orig[i]).epsilon(1e-12));
    }
    CHECK(pieces[1].t0() == doctest::Approx(obs.t0() + static_cast<double>(plan.hop) * obs.dt()));
  }
}

TEST_CASE("all-ones pieces give all ones") {
  const ChunkPlan plan{32, 20};
  const auto starts = piece_starts(200, plan);
  std::vector<Signal> ones(starts.size(), Signal(std::vector<double>(32, 1.0), 0.1));
  const Signal sum = overlap_add(ones, plan, 200);
  for (double v : sum.samples()) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(overlap_add({ones[0]}, plan, 200), ArgumentError);
  ones[1] = Signal(std::vector<double>(31, 1.0), 0.1);
  CHECK_THROWS_AS(overlap_add(ones, plan, 200), ArgumentError);
}

TEST_CASE("crossfade between disagreeing ramps") {
  // Both pieces carry the ramp n; the second is offset by +1. The output in the
  // overlap is n + w_right(n), rising monotonically from the first to the second.
  const ChunkPlan plan{32, 20};
  const std::size_t length = 52;
  std::vector<double> a(32), b(32);
  for (std::size_t n = 0; n < 32; ++n) {
    a[n] = static_cast<double>(n);
    b[n] = static_cast<double>(n + 20) + 1.0;
  }
  const Signal out = overlap_add({Signal(a, 1.0), Signal(b, 1.0)}, plan, length);
  const auto w = piece_window(length, plan, 1);
  for (std::size_t n = 0; n < 20; ++n) CHECK(out[n] == a[n]);
  for (std::size_t n = 20; n < 32; ++n) {
    CHECK(out[n] == doctest::Approx(static_cast<double>(n) + w[n - 20]).epsilon(1e-14));
    CHECK(out[n] - static_cast<double>(n) > out[n - 1] - static_cast<double>(n - 1));
  }
  for (std::size_t n = 32; n < length; ++n) CHECK(out[n] == b[n - 20]);
}

TEST_CASE("estimation rejects pieces below the minimum length") {
  const ObservationSet obs = generate_observations(synthetic_truth(101), {1e-4, 0.1}, 20, 0.01, 3);
  CHECK_THROWS_AS(estimate_template_chunked(obs, {10, 6}, {5, 20, 2, 1}), ArgumentError);
  CHECK_THROWS_AS(estimate_template_chunked(obs, {1, 1}, {5, 20, 2, 1}), ArgumentError);
}

TEST_CASE("piece seeds") {
  CHECK(piece_seed(42, 0) == 42);
  CHECK(piece_seed(42, 1) != piece_seed(42, 2));
}

TEST_CASE("one-chunk plan matches estimate_template bitwise") {
  const Signal f = synthetic_truth(201);
  const ObservationSet obs = generate_observations(f, {1e-4, 0.1}, 60, 0.01, 21);
  const EstimateOptions opt{8, 150, 5, 77};
  const Signal chunked = estimate_template_chunked(obs, {201, 64}, opt);
  const TemplateEstimate plain = estimate_template(obs, opt);
  CHECK(chunked == plain.estimate);
}

TEST_CASE("piece failures carry the piece index") {
  // observations identical on the second half make the last piece degenerate
  std::vector<Signal> rows;
  std::mt19937_64 rng(4);
  std::normal_distribution<double> nd;
  for (int k = 0; k < 12; ++k) {
    std::vector<double> x(64, 0.0);
    for (std::size_t i = 0; i < 32; ++i) x[i] = nd(rng);
    rows.emplace_back(x, 0.01);
  }
  try {
    estimate_template_chunked(ObservationSet(rows), {32, 16}, {3, 20, 2, 1});
    FAIL("expected a construction error");
  } catch (const ConstructionError& e) {
    CHECK(e.kind() == ConstructionError::Kind::DuplicateObservations);
    CHECK(std::string(e.what()).rfind("piece 2: ", 0) == 0);
  }
}

TEST_CASE("chunking helps when singularities outnumber the observations") {
  // 24 jumps spread over a long record. Warps decorrelate between jumps, so no
  // single observation is well aligned everywhere.
  const std::size_t len = 2400;
  const double dt = 0.005;
  std::vector<double> x(len);
  for (std::size_t i = 0; i < len; ++i) {
    const std::size_t seg = i / 100;
    x[i] = (seg % 2 == 0 ? 0.0 : 1.0) + 0.2 * static_cast<double>(seg % 3);
  }
  const Signal f(x, dt);
  int wins = 0;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const ObservationSet obs = generate_observations(f, {4e-4, 0.1}, 40, 0.02, seed);
    const EstimateOptions opt{25, 200, 3, seed};
    const Signal whole = estimate_template(obs, opt).estimate;
    const Signal pieces = estimate_template_chunked(obs, {200, 120}, opt);
    if (l2(pieces, f) < l2(whole, f)) ++wins;
  }
  CHECK(wins == 3);
}
