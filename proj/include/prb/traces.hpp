#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace prb {

using Timestamp = std::chrono::sys_seconds;

inline constexpr int kDefaultMaxPrb = 160;
inline constexpr std::size_t kHoursPerWeek = 168;

// Parses "YYYY-MM-DDTHH:MM[:SS][Z]"; throws std::invalid_argument otherwise.
Timestamp parse_timestamp(std::string_view text);
std::string format_timestamp(Timestamp t);

// Calendar position of one hourly sample. weekday: 0 = Monday ... 6 = Sunday.
struct CalendarPoint {
  int hour = 0;
  int weekday = 0;

  CalendarPoint advanced(std::size_t hours) const;
  bool operator==(const CalendarPoint&) const = default;
};

CalendarPoint calendar_of(Timestamp t);

// Hourly PRB-load series. Immutable after construction.
class PrbSeries {
 public:
  PrbSeries(Timestamp start_time, std::vector<double> values, int max_prb = kDefaultMaxPrb);

  Timestamp start_time() const { return start_; }
  const std::vector<double>& values() const { return values_; }
  int max_prb() const { return max_prb_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }

  Timestamp time_at(std::size_t index) const;
  CalendarPoint calendar_at(std::size_t index) const;
  double mean() const;

  // Sub-series [begin, begin + count).
  PrbSeries slice(std::size_t begin, std::size_t count) const;

  bool operator==(const PrbSeries&) const = default;

 private:
  Timestamp start_;
  std::vector<double> values_;
  int max_prb_;
};

struct TraceConfig {
  int weeks = 10;
  double base_load = 60.0;
  double daily_amplitude = 40.0;
  double weekly_factor = 0.6;  // amplitude multiplier on Saturday and Sunday
  double noise_std = 4.0;
  double floor = 1.0;
  std::uint64_t seed = 42;
  Timestamp start_time = parse_timestamp("2023-01-02T00:00:00");  // a Monday
};

class TraceError : public std::runtime_error {
 public:
  enum class Kind { Io, Header, Malformed, NonMonotonic, Irregular, Capacity, Empty, Config };
  TraceError(Kind kind, const std::string& message) : std::runtime_error(message), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

// Daily sinusoid (trough at midnight) with weekend attenuation and Gaussian noise,
// clamped to [floor, max_prb]. Deterministic per seed.
PrbSeries generate_synthetic(const TraceConfig& config, int max_prb = kDefaultMaxPrb);

// CSV with header "timestamp,prb_used", one ISO-8601 hourly timestamp per row.
PrbSeries load_csv(const std::filesystem::path& path, int max_prb = kDefaultMaxPrb);
PrbSeries parse_csv(std::string_view text, int max_prb = kDefaultMaxPrb);
void write_csv(const PrbSeries& series, const std::filesystem::path& path);
std::string to_csv(const PrbSeries& series);

// Chronological split; the first floor(N * train_fraction) samples go to train.
std::pair<PrbSeries, PrbSeries> split(const PrbSeries& series, double train_fraction = 0.8);

struct WindowPair {
  std::vector<double> context;
  std::vector<double> target;
  std::size_t t0_index = 0;
  CalendarPoint context_start;  // calendar position of context[0]
};

std::vector<WindowPair> make_windows(const PrbSeries& series, std::size_t context_len,
                                     std::size_t horizon, std::size_t stride);

}  // namespace prb
