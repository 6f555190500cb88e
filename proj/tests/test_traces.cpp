#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "prb/traces.hpp"

using namespace prb;

namespace {

std::filesystem::path temp_file(const std::string& name, const std::string& contents) {
  const auto path = std::filesystem::temp_directory_path() / ("prb_test_" + name);
  std::ofstream(path, std::ios::binary) << contents;
  return path;
}

TraceError::Kind parse_error_kind(const std::string& text) {
  try {
    parse_csv(text);
  } catch (const TraceError& e) {
    return e.kind();
  }
  FAIL("expected TraceError");
  return TraceError::Kind::Io;
}

}  // namespace

TEST_CASE("timestamps parse, format and map to calendar positions") {
  const Timestamp t = parse_timestamp("2023-01-02T05:00:00");
  CHECK(format_timestamp(t) == "2023-01-02T05:00:00");
  CHECK(parse_timestamp("2023-01-02T05:00Z") == t);
  CHECK(calendar_of(t) == CalendarPoint{5, 0});  // Monday
  CHECK(calendar_of(parse_timestamp("2023-01-08T23:00:00")) == CalendarPoint{23, 6});
  CHECK(CalendarPoint{23, 6}.advanced(1) == CalendarPoint{0, 0});
  CHECK(CalendarPoint{5, 0}.advanced(168) == CalendarPoint{5, 0});
  CHECK_THROWS(parse_timestamp("2023-02-30T00:00:00"));
  CHECK_THROWS(parse_timestamp("yesterday"));
}

TEST_CASE("generate_synthetic: length, range, determinism") {
  TraceConfig cfg;
  cfg.weeks = 10;
  const PrbSeries s = generate_synthetic(cfg, 160);
  CHECK(s.size() == 1680);
  for (double v : s.values()) {
    CHECK(v >= cfg.floor);
    CHECK(v <= 160.0);
  }
  CHECK(generate_synthetic(cfg, 160) == s);
  cfg.seed += 1;
  CHECK_FALSE(generate_synthetic(cfg, 160) == s);
}

TEST_CASE("generate_synthetic: degenerate config is constant") {
  TraceConfig cfg;
  cfg.weeks = 1;
  cfg.noise_std = 0.0;
  cfg.daily_amplitude = 0.0;
  cfg.base_load = 20.0;
  const PrbSeries s = generate_synthetic(cfg);
  for (double v : s.values()) CHECK(v == 20.0);
}

TEST_CASE("generate_synthetic: trough at midnight, peak at noon, weekend attenuated") {
  TraceConfig cfg;
  cfg.weeks = 1;
  cfg.noise_std = 0.0;
  const PrbSeries s = generate_synthetic(cfg);
  CHECK(s[0] == doctest::Approx(cfg.base_load - cfg.daily_amplitude));
  CHECK(s[12] == doctest::Approx(cfg.base_load + cfg.daily_amplitude));
  const std::size_t saturday_noon = 5 * 24 + 12;
  CHECK(s[saturday_noon] ==
        doctest::Approx(cfg.base_load + cfg.weekly_factor * cfg.daily_amplitude));
}

TEST_CASE("generate_synthetic rejects load above capacity") {
  TraceConfig cfg;
  cfg.base_load = 130.0;
  cfg.daily_amplitude = 40.0;
  CHECK_THROWS_AS(generate_synthetic(cfg, 160), TraceError);
  cfg.base_load = 60.0;
  cfg.floor = 0.0;
  CHECK_THROWS_AS(generate_synthetic(cfg, 160), TraceError);
}

TEST_CASE("load_csv: valid file and CSV round trip") {
  const auto path = temp_file("three.csv",
                              "timestamp,prb_used\n2023-01-02T00:00:00,10.5\n"
                              "2023-01-02T01:00:00,11\n2023-01-02T02:00:00,0\n");
  const PrbSeries s = load_csv(path);
  CHECK(s.size() == 3);
  CHECK(s[0] == 10.5);
  CHECK(s.max_prb() == 160);

  TraceConfig cfg;
  cfg.weeks = 2;
  const PrbSeries gen = generate_synthetic(cfg);
  const auto out = std::filesystem::temp_directory_path() / "prb_test_roundtrip.csv";
  write_csv(gen, out);
  CHECK(load_csv(out) == gen);
}

TEST_CASE("load_csv: each failure mode has its own diagnostic naming the line") {
  const std::string head = "timestamp,prb_used\n2023-01-02T00:00:00,10\n";
  try {
    parse_csv(head + "2023-01-02T01:00:00,161\n", 160);
    FAIL("expected capacity error");
  } catch (const TraceError& e) {
    CHECK(e.kind() == TraceError::Kind::Capacity);
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  CHECK(parse_error_kind(head + "2023-01-02T01:00:00;5\n") == TraceError::Kind::Malformed);
  CHECK(parse_error_kind(head + "2023-01-02T01:00:00,abc\n") == TraceError::Kind::Malformed);
  CHECK(parse_error_kind(head + "2023-01-02T00:00:00,5\n") == TraceError::Kind::NonMonotonic);
  CHECK(parse_error_kind(head + "2023-01-02T03:00:00,5\n") == TraceError::Kind::Irregular);
  CHECK(parse_error_kind(head + "2023-01-02T01:00:00,-1\n") == TraceError::Kind::Capacity);
  CHECK(parse_error_kind("time,value\n") == TraceError::Kind::Header);
  CHECK(parse_error_kind("timestamp,prb_used\n") == TraceError::Kind::Empty);
  CHECK_THROWS_AS(load_csv("/nonexistent/trace.csv"), TraceError);
}

TEST_CASE("split is chronological and partitions the input") {
  TraceConfig cfg;
  const PrbSeries s = generate_synthetic(cfg);
  const auto [train, test] = split(s, 0.8);
  CHECK(train.size() == 1344);
  CHECK(test.size() == 336);
  std::vector<double> joined = train.values();
  joined.insert(joined.end(), test.values().begin(), test.values().end());
  CHECK(joined == s.values());
  CHECK(test.start_time() == s.time_at(1344));

  const PrbSeries ten(parse_timestamp("2023-01-02T00:00"), std::vector<double>(10, 1.0));
  const auto [a, b] = split(ten, 0.5);
  CHECK(a.size() == 5);
  CHECK(b.size() == 5);
  CHECK_THROWS(split(ten, 0.0));
  CHECK_THROWS(split(ten, 1.0));
}

TEST_CASE("make_windows: count formula and slicing identity") {
  std::vector<double> v(72);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<double>(i);
  const PrbSeries s72(parse_timestamp("2023-01-02T00:00"), v);
  CHECK(make_windows(s72.slice(0, 48), 24, 24, 24).size() == 1);
  const auto w = make_windows(s72, 24, 24, 24);
  CHECK(w.size() == 2);
  for (std::size_t stride : {1, 3, 5}) {
    const auto ws = make_windows(s72, 10, 7, stride);
    CHECK(ws.size() == (72 - 10 - 7) / stride + 1);
    for (const auto& win : ws) {
      for (std::size_t h = 0; h < win.target.size(); ++h) CHECK(win.target[h] == s72[win.t0_index + h]);
      for (std::size_t c = 0; c < win.context.size(); ++c) {
        CHECK(win.context[c] == s72[win.t0_index - 10 + c]);
      }
    }
  }
  CHECK(w[1].context_start == s72.calendar_at(24));
  CHECK_THROWS(make_windows(s72, 60, 24, 1));
  CHECK_THROWS(make_windows(s72, 24, 24, 0));
}

TEST_CASE("PrbSeries enforces its invariants") {
  const Timestamp t0 = parse_timestamp("2023-01-02T00:00");
  CHECK_THROWS(PrbSeries(t0, {}));
  CHECK_THROWS(PrbSeries(t0, {1.0, -0.5}));
  CHECK_THROWS(PrbSeries(t0, {170.0}, 160));
  CHECK_NOTHROW(PrbSeries(t0, {0.0, 160.0}, 160));
}
