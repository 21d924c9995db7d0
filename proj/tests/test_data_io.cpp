#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <sstream>

#include "ibcn/libsvm.hpp"
#include "ibcn/trace.hpp"
#include "support/builders.hpp"

using namespace ibcn;
namespace fs = std::filesystem;

namespace {
Dataset parse_str(const std::string& text) {
  std::istringstream in(text);
  return parse_libsvm(in, "<test>");
}

fs::path temp_file(const char* name) {
  return fs::temp_directory_path() / name;
}
}  // namespace

TEST_CASE("libsvm parsing basics") {
  const Dataset ds = parse_str("+1 2:0.5 10:-1\n");
  CHECK(ds.num_samples() == 1);
  CHECK(ds.labels[0] == 1.0);
  CHECK(ds.n_features == 10);
  REQUIRE(ds.rows[0].size() == 2);
  CHECK(ds.rows[0][0] == Feature{1, 0.5});
  CHECK(ds.rows[0][1] == Feature{9, -1.0});

  const Dataset empty_row = parse_str("-1\n");
  CHECK(empty_row.num_samples() == 1);
  CHECK(empty_row.labels[0] == -1.0);
  CHECK(empty_row.rows[0].empty());

  const Dataset commented = parse_str("# header\n+1 1:2 # trailing\n-1 1:1\n");
  CHECK(commented.num_samples() == 2);
}

TEST_CASE("libsvm parse errors carry line numbers") {
  CHECK_THROWS_WITH_AS(parse_str("1 a:b\n"), doctest::Contains("line 1"), ParseError);
  CHECK_THROWS_AS(parse_str("1 2:0.5 2:0.3\n"), ParseError);   // duplicate index
  CHECK_THROWS_AS(parse_str("1 5:0.5 3:0.3\n"), ParseError);   // decreasing index
  CHECK_THROWS_AS(parse_str("1 0:0.5\n"), ParseError);         // index below 1
  CHECK_THROWS_AS(parse_str(""), DataError);                   // empty file
  CHECK_THROWS_AS(parse_str("# only comments\n"), DataError);
  try {
    parse_str("+1 1:1\n-1 oops\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
}

TEST_CASE("binary label normalization") {
  const Dataset zero_one = parse_str("0 1:1\n1 1:2\n");
  CHECK(zero_one.labels == std::vector<double>{-1.0, 1.0});

  const Dataset one_two = parse_str("2 1:1\n1 1:2\n");
  CHECK(one_two.labels == std::vector<double>{1.0, -1.0});

  const Dataset pm = parse_str("-1 1:1\n+1 1:2\n");
  CHECK(pm.labels == std::vector<double>{-1.0, 1.0});

  // anything else is left for the consumer to validate
  const Dataset regression = parse_str("0.7 1:1\n2.5 1:2\n");
  CHECK(regression.labels == std::vector<double>{0.7, 2.5});
}

TEST_CASE("libsvm round trip is idempotent") {
  const std::string text = "1 2:0.5 7:-3.25\n-1 1:1e-3\n1\n";
  const Dataset ds = parse_str(text);
  std::ostringstream out;
  write_libsvm(ds, out);
  const Dataset again = parse_str(out.str());
  CHECK(again.rows == ds.rows);
  CHECK(again.labels == ds.labels);
  CHECK(again.n_features == ds.n_features);
}

TEST_CASE("scale_features maps column ranges onto [lo, hi]") {
  const Dataset ds = parse_str("1 1:0 2:3\n1 1:5 2:3\n-1 1:10 2:3\n");
  const Dataset scaled = scale_features(ds, -1.0, 1.0);
  // column 1: {0,5,10} -> {-1,0,1}; column 2 constant -> lo
  auto value_at = [&](Index row, Index col) {
    for (const Feature& f : scaled.rows[static_cast<std::size_t>(row)])
      if (f.index == col) return f.value;
    return 0.0;
  };
  CHECK(value_at(0, 0) == doctest::Approx(-1.0));
  CHECK(value_at(1, 0) == doctest::Approx(0.0));
  CHECK(value_at(2, 0) == doctest::Approx(1.0));
  CHECK(value_at(0, 1) == doctest::Approx(-1.0));
  CHECK(value_at(1, 1) == doctest::Approx(-1.0));
  CHECK(value_at(2, 1) == doctest::Approx(-1.0));
  CHECK(scaled.provenance.find("scaled") != std::string::npos);
}

TEST_CASE("scale_features counts implicit zeros and is idempotent") {
  // column 1 has an implicit zero in row 2, so its range is [0, 4]
  const Dataset ds = parse_str("1 1:4 2:1\n-1 2:2\n");
  const Dataset scaled = scale_features(ds, -1.0, 1.0);
  for (const auto& row : scaled.rows)
    for (const Feature& f : row) {
      CHECK(f.value >= -1.0 - 1e-12);
      CHECK(f.value <= 1.0 + 1e-12);
    }

  const Dataset twice = scale_features(scaled, -1.0, 1.0);
  CHECK(twice.rows == scaled.rows);
  CHECK(twice.labels == scaled.labels);

  CHECK_THROWS_AS(scale_features(ds, 1.0, -1.0), Error);
}

TEST_CASE("madelon-like data scales into [-1,1]") {
  std::istringstream in(testing_support::make_madelon_like_libsvm(50, 20, 3));
  const Dataset ds = parse_libsvm(in, "<synthetic>");
  const Dataset scaled = scale_features(ds, -1.0, 1.0);
  for (const auto& row : scaled.rows)
    for (const Feature& f : row) {
      CHECK(f.value >= -1.0 - 1e-12);
      CHECK(f.value <= 1.0 + 1e-12);
    }
}

TEST_CASE("trace write/read round trip") {
  Trace t;
  t.meta = RunMeta{"ibcn", 5, 42, "tiny", "abc123"};
  for (int k = 0; k < 4; ++k) {
    TraceRow r;
    r.iter = k;
    r.f = 10.0 / (k + 1) + 1e-17;
    r.gnorm = 1.0 / (3 * k + 1);
    r.block_gnorm = r.gnorm / 2;
    r.sigma = 1.0 + k;
    r.success = k % 2 == 0 ? 1.0 : 0.0;
    r.time_s = 0.25 * k;
    t.rows.push_back(r);
  }

  const fs::path p = temp_file("ibcn_trace_test.csv");
  write_trace(t, p);
  const Trace back = read_trace(p);
  REQUIRE(back.rows.size() == t.rows.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    CHECK(back.rows[i].iter == t.rows[i].iter);
    CHECK(back.rows[i].f == t.rows[i].f);  // 17 significant digits round-trip exactly
    CHECK(back.rows[i].gnorm == t.rows[i].gnorm);
    CHECK(back.rows[i].block_gnorm == t.rows[i].block_gnorm);
    CHECK(back.rows[i].sigma == t.rows[i].sigma);
    CHECK(back.rows[i].success == t.rows[i].success);
    CHECK(back.rows[i].time_s == t.rows[i].time_s);
  }
  CHECK(back.meta.solver == "ibcn");
  CHECK(back.meta.q == 5);
  CHECK(back.meta.seed == 42);
  CHECK(back.meta.problem == "tiny");
  CHECK(back.meta.config_sha == "abc123");

  fs::remove(p);
  fs::remove(p.string() + ".meta");
}

TEST_CASE("empty trace writes only the header") {
  Trace t;
  const fs::path p = temp_file("ibcn_trace_empty.csv");
  write_trace(t, p);
  std::ifstream in(p);
  std::string line;
  CHECK(std::getline(in, line));
  CHECK(line == kTraceHeader);
  CHECK_FALSE(std::getline(in, line));
  fs::remove(p);
  fs::remove(p.string() + ".meta");
}

TEST_CASE("traces violating monotonicity are refused") {
  Trace t;
  TraceRow a, b;
  a.iter = 0;
  a.f = 1.0;
  b.iter = 1;
  b.f = 1.5;  // objective went up: solver bug
  t.rows = {a, b};
  const fs::path p = temp_file("ibcn_trace_bad.csv");
  CHECK_THROWS_AS(write_trace(t, p), Error);

  b.f = 0.5;
  b.iter = 0;  // stale iteration index
  t.rows = {a, b};
  CHECK_THROWS_AS(write_trace(t, p), Error);
}
