#include "prb/traces.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>

#include "prb/random.hpp"

namespace prb {

namespace {

using namespace std::chrono;

int parse_int(std::string_view text, std::size_t pos, std::size_t len, std::string_view whole) {
  int v = 0;
  if (pos + len > text.size()) {
    throw std::invalid_argument("bad timestamp '" + std::string(whole) + "'");
  }
  auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + pos + len, v);
  if (ec != std::errc() || ptr != text.data() + pos + len) {
    throw std::invalid_argument("bad timestamp '" + std::string(whole) + "'");
  }
  return v;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::string line_tag(std::size_t line) { return "line " + std::to_string(line) + ": "; }

}  // namespace

Timestamp parse_timestamp(std::string_view text) {
  std::string_view s = trim(text);
  if (!s.empty() && s.back() == 'Z') s.remove_suffix(1);
  // YYYY-MM-DDTHH:MM or YYYY-MM-DDTHH:MM:SS
  if ((s.size() != 16 && s.size() != 19) || s[4] != '-' || s[7] != '-' ||
      (s[10] != 'T' && s[10] != ' ') || s[13] != ':' || (s.size() == 19 && s[16] != ':')) {
    throw std::invalid_argument("bad timestamp '" + std::string(text) + "'");
  }
  const int y = parse_int(s, 0, 4, text);
  const int mo = parse_int(s, 5, 2, text);
  const int d = parse_int(s, 8, 2, text);
  const int h = parse_int(s, 11, 2, text);
  const int mi = parse_int(s, 14, 2, text);
  const int se = s.size() == 19 ? parse_int(s, 17, 2, text) : 0;
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || se > 59) {
    throw std::invalid_argument("bad timestamp '" + std::string(text) + "'");
  }
  return sys_days{ymd} + hours{h} + minutes{mi} + seconds{se};
}

std::string format_timestamp(Timestamp t) {
  const auto day_point = floor<days>(t);
  const year_month_day ymd{day_point};
  const hh_mm_ss hms{t - day_point};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02d", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                static_cast<int>(hms.seconds().count()));
  return buf;
}

CalendarPoint CalendarPoint::advanced(std::size_t hours) const {
  const std::size_t total = static_cast<std::size_t>(hour) + hours;
  return CalendarPoint{static_cast<int>(total % 24),
                       static_cast<int>((static_cast<std::size_t>(weekday) + total / 24) % 7)};
}

CalendarPoint calendar_of(Timestamp t) {
  const auto day_point = floor<days>(t);
  const weekday wd{day_point};
  return CalendarPoint{static_cast<int>(floor<hours>(t - day_point).count()),
                       static_cast<int>(wd.iso_encoding()) - 1};
}

PrbSeries::PrbSeries(Timestamp start_time, std::vector<double> values, int max_prb)
    : start_(start_time), values_(std::move(values)), max_prb_(max_prb) {
  if (max_prb_ <= 0) throw std::invalid_argument("PrbSeries: max_prb must be positive");
  if (values_.empty()) throw std::invalid_argument("PrbSeries: series must not be empty");
  for (std::size_t i = 0; i < values_.size(); ++i) {
    const double v = values_[i];
    if (!(v >= 0.0) || v > max_prb_) {
      throw std::invalid_argument("PrbSeries: value " + std::to_string(v) + " at index " +
                                  std::to_string(i) + " outside [0, " + std::to_string(max_prb_) +
                                  "]");
    }
  }
}

Timestamp PrbSeries::time_at(std::size_t index) const {
  return start_ + hours{static_cast<long>(index)};
}

CalendarPoint PrbSeries::calendar_at(std::size_t index) const {
  return calendar_of(start_).advanced(index);
}

double PrbSeries::mean() const {
  return std::accumulate(values_.begin(), values_.end(), 0.0) / static_cast<double>(size());
}

PrbSeries PrbSeries::slice(std::size_t begin, std::size_t count) const {
  if (begin + count > size()) throw std::out_of_range("PrbSeries::slice past end");
  return PrbSeries(time_at(begin),
                   std::vector<double>(values_.begin() + static_cast<long>(begin),
                                       values_.begin() + static_cast<long>(begin + count)),
                   max_prb_);
}

PrbSeries generate_synthetic(const TraceConfig& config, int max_prb) {
  if (config.weeks <= 0) throw TraceError(TraceError::Kind::Config, "weeks must be positive");
  if (max_prb <= 0) throw TraceError(TraceError::Kind::Config, "max_prb must be positive");
  if (config.base_load + config.daily_amplitude > max_prb) {
    throw TraceError(TraceError::Kind::Config,
                     "base_load + daily_amplitude (" +
                         std::to_string(config.base_load + config.daily_amplitude) +
                         ") exceeds max_prb " + std::to_string(max_prb));
  }
  if (!(config.floor > 0.0) || config.floor > max_prb) {
    throw TraceError(TraceError::Kind::Config, "floor must lie in (0, max_prb]");
  }
  if (config.weekly_factor < 0.0 || config.weekly_factor > 1.0) {
    throw TraceError(TraceError::Kind::Config, "weekly_factor must lie in [0, 1]");
  }
  if (config.noise_std < 0.0) throw TraceError(TraceError::Kind::Config, "noise_std must be >= 0");

  Rng rng(config.seed);
  const std::size_t n = static_cast<std::size_t>(config.weeks) * kHoursPerWeek;
  const CalendarPoint origin = calendar_of(config.start_time);
  std::vector<double> values(n);
  for (std::size_t i = 0; i < n; ++i) {
    const CalendarPoint cal = origin.advanced(i);
    const double weekly = cal.weekday >= 5 ? config.weekly_factor : 1.0;
    const double phase = 2.0 * std::numbers::pi * cal.hour / 24.0 - std::numbers::pi / 2.0;
    const double noise = config.noise_std > 0.0 ? config.noise_std * rng.normal() : 0.0;
    const double v = config.base_load + config.daily_amplitude * std::sin(phase) * weekly + noise;
    values[i] = std::clamp(v, config.floor, static_cast<double>(max_prb));
  }
  return PrbSeries(config.start_time, std::move(values), max_prb);
}

PrbSeries parse_csv(std::string_view text, int max_prb) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  bool header_seen = false;
  std::vector<double> values;
  Timestamp start{};
  Timestamp prev{};
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    std::string_view line = trim(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (line.empty()) {
      if (end == text.size()) break;
      continue;
    }
    if (!header_seen) {
      if (line != "timestamp,prb_used") {
        throw TraceError(TraceError::Kind::Header,
                         line_tag(line_no) + "expected header 'timestamp,prb_used'");
      }
      header_seen = true;
      continue;
    }
    const std::size_t comma = line.find(',');
    if (comma == std::string_view::npos || line.find(',', comma + 1) != std::string_view::npos) {
      throw TraceError(TraceError::Kind::Malformed,
                       line_tag(line_no) + "expected two fields 'timestamp,prb_used'");
    }
    Timestamp ts;
    try {
      ts = parse_timestamp(line.substr(0, comma));
    } catch (const std::invalid_argument& e) {
      throw TraceError(TraceError::Kind::Malformed, line_tag(line_no) + e.what());
    }
    const std::string_view field = trim(line.substr(comma + 1));
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (field.empty() || ec != std::errc() || ptr != field.data() + field.size() ||
        !std::isfinite(v)) {
      throw TraceError(TraceError::Kind::Malformed,
                       line_tag(line_no) + "cannot parse PRB value '" + std::string(field) + "'");
    }
    if (v < 0.0 || v > max_prb) {
      throw TraceError(TraceError::Kind::Capacity,
                       line_tag(line_no) + "PRB value " + std::string(field) + " outside [0, " +
                           std::to_string(max_prb) + "]");
    }
    if (values.empty()) {
      start = ts;
    } else if (ts <= prev) {
      throw TraceError(TraceError::Kind::NonMonotonic,
                       line_tag(line_no) + "timestamp " + format_timestamp(ts) +
                           " does not increase past " + format_timestamp(prev));
    } else if (ts - prev != hours{1}) {
      throw TraceError(TraceError::Kind::Irregular,
                       line_tag(line_no) + "timestamp " + format_timestamp(ts) +
                           " is not one hour after " + format_timestamp(prev));
    }
    prev = ts;
    values.push_back(v);
  }
  if (!header_seen) throw TraceError(TraceError::Kind::Header, "empty file: missing header");
  if (values.empty()) throw TraceError(TraceError::Kind::Empty, "trace has no data rows");
  return PrbSeries(start, std::move(values), max_prb);
}

PrbSeries load_csv(const std::filesystem::path& path, int max_prb) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw TraceError(TraceError::Kind::Io, "cannot open trace file " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  try {
    return parse_csv(ss.str(), max_prb);
  } catch (const TraceError& e) {
    throw TraceError(e.kind(), path.string() + ": " + e.what());
  }
}

std::string to_csv(const PrbSeries& series) {
  std::string out = "timestamp,prb_used\n";
  char buf[64];
  for (std::size_t i = 0; i < series.size(); ++i) {
    out += format_timestamp(series.time_at(i));
    out += ',';
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, series[i]);
    out.append(buf, ptr);
    out += '\n';
  }
  return out;
}

void write_csv(const PrbSeries& series, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw TraceError(TraceError::Kind::Io, "cannot write trace file " + path.string());
  os << to_csv(series);
  if (!os) throw TraceError(TraceError::Kind::Io, "write failed for " + path.string());
}

std::pair<PrbSeries, PrbSeries> split(const PrbSeries& series, double train_fraction) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw std::invalid_argument("split: train_fraction must lie in (0, 1), got " +
                                std::to_string(train_fraction));
  }
  const auto n_train =
      static_cast<std::size_t>(std::floor(static_cast<double>(series.size()) * train_fraction));
  if (n_train == 0 || n_train == series.size()) {
    throw std::invalid_argument("split: fraction leaves an empty partition for N=" +
                                std::to_string(series.size()));
  }
  return {series.slice(0, n_train), series.slice(n_train, series.size() - n_train)};
}

std::vector<WindowPair> make_windows(const PrbSeries& series, std::size_t context_len,
                                     std::size_t horizon, std::size_t stride) {
  if (context_len == 0 || horizon == 0 || stride == 0) {
    throw std::invalid_argument("make_windows: context_len, horizon and stride must be positive");
  }
  if (context_len + horizon > series.size()) {
    throw std::invalid_argument("make_windows: series of length " + std::to_string(series.size()) +
                                " too short for context " + std::to_string(context_len) +
                                " + horizon " + std::to_string(horizon));
  }
  const auto& v = series.values();
  const std::size_t count = (series.size() - context_len - horizon) / stride + 1;
  std::vector<WindowPair> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t begin = k * stride;
    const std::size_t t0 = begin + context_len;
    WindowPair w;
    w.context.assign(v.begin() + static_cast<long>(begin), v.begin() + static_cast<long>(t0));
    w.target.assign(v.begin() + static_cast<long>(t0), v.begin() + static_cast<long>(t0 + horizon));
    w.t0_index = t0;
    w.context_start = series.calendar_at(begin);
    out.push_back(std::move(w));
  }
  return out;
}

}  // namespace prb
