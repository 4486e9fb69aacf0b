#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "regimecast/date.hpp"
#include "regimecast/error.hpp"

namespace regimecast {

/// A contiguous daily series. Value i belongs to start + i days.
struct DailySeries {
  Date start{};
  std::vector<double> values;

  std::size_t size() const noexcept { return values.size(); }
  bool empty() const noexcept { return values.empty(); }

  Date date_at(std::size_t i) const { return add_days(start, static_cast<long long>(i)); }
  Date end_date() const {
    if (values.empty()) fail(ErrorKind::empty, "series is empty");
    return date_at(values.size() - 1);
  }

  std::optional<std::size_t> index_of(Date date) const {
    const long long offset = days_between(start, date);
    if (offset < 0 || offset >= static_cast<long long>(values.size())) return std::nullopt;
    return static_cast<std::size_t>(offset);
  }

  std::span<const double> span() const noexcept { return values; }

  friend bool operator==(const DailySeries&, const DailySeries&) = default;
};

/// k boundaries split a series into k + 1 periods; a boundary date opens the later period.
struct PeriodSpec {
  std::vector<Date> boundaries;
  std::vector<std::string> labels;
};

/// Trailing moving average. The first window - 1 outputs average the shorter prefix that exists.
inline DailySeries moving_average(const DailySeries& s, int window) {
  if (window < 1) fail(ErrorKind::parameter, "moving_average: window must be >= 1");
  if (static_cast<std::size_t>(window) > s.size()) {
    fail(ErrorKind::parameter, "moving_average: window " + std::to_string(window) +
                                   " exceeds series length " + std::to_string(s.size()));
  }
  const auto w = static_cast<std::size_t>(window);
  DailySeries out{s.start, std::vector<double>(s.size())};
  for (std::size_t i = 0; i < s.size(); ++i) {
    const std::size_t lo = i + 1 >= w ? i + 1 - w : 0;
    // Incremental mean keeps constant inputs exact.
    double mean = s.values[lo];
    for (std::size_t j = lo + 1, k = 2; j <= i; ++j, ++k) {
      mean += (s.values[j] - mean) / static_cast<double>(k);
    }
    out.values[i] = mean;
  }
  return out;
}

inline std::vector<DailySeries> slice_periods(const DailySeries& s, const PeriodSpec& spec) {
  if (s.empty()) fail(ErrorKind::empty, "slice_periods: series is empty");
  std::vector<DailySeries> out;
  std::size_t lo = 0;
  for (std::size_t b = 0; b < spec.boundaries.size(); ++b) {
    const Date boundary = spec.boundaries[b];
    const auto idx = s.index_of(boundary);
    if (!idx || *idx <= lo || (b == 0 && *idx == 0)) {
      fail(ErrorKind::range, "slice_periods: boundary " + format_date(boundary) +
                                 " is outside the series span or leaves an empty period");
    }
    out.push_back(DailySeries{s.date_at(lo), {s.values.begin() + static_cast<std::ptrdiff_t>(lo),
                                              s.values.begin() + static_cast<std::ptrdiff_t>(*idx)}});
    lo = *idx;
  }
  out.push_back(DailySeries{s.date_at(lo),
                            {s.values.begin() + static_cast<std::ptrdiff_t>(lo), s.values.end()}});
  return out;
}

struct Summary {
  std::size_t n = 0;
  double mean = 0.0;
  std::optional<double> sd;  // sample SD, divisor n - 1; absent when n == 1
  double median = 0.0;
};

inline double mean_of(std::span<const double> xs) {
  if (xs.empty()) fail(ErrorKind::empty, "mean of empty sample");
  double sum = 0.0;
  for (double x : xs) sum += x;
  return sum / static_cast<double>(xs.size());
}

// Two-pass sample variance.
inline double sample_variance(std::span<const double> xs) {
  if (xs.size() < 2) fail(ErrorKind::length, "sample variance needs at least 2 values");
  const double m = mean_of(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return ss / static_cast<double>(xs.size() - 1);
}

inline double median_of(std::span<const double> xs) {
  if (xs.empty()) fail(ErrorKind::empty, "median of empty sample");
  std::vector<double> v(xs.begin(), xs.end());
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline Summary summarize(std::span<const double> xs) {
  if (xs.empty()) fail(ErrorKind::empty, "summarize: empty series");
  Summary s;
  s.n = xs.size();
  s.mean = mean_of(xs);
  if (xs.size() >= 2) s.sd = std::sqrt(sample_variance(xs));
  s.median = median_of(xs);
  return s;
}

inline Summary summarize(const DailySeries& s) { return summarize(s.span()); }

// ---- CSV ----------------------------------------------------------------

namespace detail {

inline std::string trim(std::string_view v) {
  const auto b = v.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = v.find_last_not_of(" \t\r\n");
  return std::string(v.substr(b, e - b + 1));
}

inline std::string lower(std::string v) {
  for (auto& c : v) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return v;
}

}  // namespace detail

inline void write_series_csv(std::ostream& os, const DailySeries& s,
                             const std::string& value_column = "value") {
  os << "date," << value_column << '\n';
  std::ostringstream num;
  num.precision(17);
  for (std::size_t i = 0; i < s.size(); ++i) {
    num.str({});
    num << s.values[i];
    os << format_date(s.date_at(i)) << ',' << num.str() << '\n';
  }
}

/// Reads a two-column `date,<value_column>` CSV into a contiguous series.
/// Dates must be strictly increasing with no gaps.
inline DailySeries read_series_csv(std::istream& is, const std::string& value_column = "value") {
  std::string line;
  if (!std::getline(is, line)) fail(ErrorKind::schema, "series CSV: missing header row");
  {
    const auto comma = line.find(',');
    const std::string h0 = detail::lower(detail::trim(line.substr(0, comma)));
    const std::string h1 =
        comma == std::string::npos ? "" : detail::lower(detail::trim(line.substr(comma + 1)));
    if (h0 != "date") fail(ErrorKind::schema, "series CSV: first column must be 'date'");
    if (h1 != value_column) {
      fail(ErrorKind::schema, "series CSV: second column must be '" + value_column + "'");
    }
  }
  DailySeries out;
  std::optional<Date> prev;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      fail(ErrorKind::schema, "series CSV line " + std::to_string(line_no) + ": expected 2 columns");
    }
    const Date date = parse_date(detail::trim(line.substr(0, comma)));
    const std::string raw = detail::trim(line.substr(comma + 1));
    double value = 0.0;
    try {
      std::size_t used = 0;
      value = std::stod(raw, &used);
      if (used != raw.size()) throw std::invalid_argument(raw);
    } catch (const std::exception&) {
      fail(ErrorKind::domain, "series CSV line " + std::to_string(line_no) + ": bad number '" + raw + "'");
    }
    if (prev) {
      const long long step = days_between(*prev, date);
      if (step <= 0) {
        fail(ErrorKind::domain, "series CSV: dates not strictly increasing at " + format_date(date));
      }
      if (step > 1) {
        fail(ErrorKind::gap, "series CSV: gap in dates at " + format_date(add_days(*prev, 1)));
      }
    } else {
      out.start = date;
    }
    out.values.push_back(value);
    prev = date;
  }
  return out;
}

}  // namespace regimecast
