#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <ctime>
#include <functional>
#include <iomanip>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "regimecast/date.hpp"
#include "regimecast/error.hpp"
#include "regimecast/series.hpp"

namespace regimecast::ingest {

/// Wall-clock time in the configured local zone, second resolution.
using Timestamp = std::chrono::sys_seconds;

struct IncidentRecord {
  std::string primary_key;
  std::string jurisdiction;
  std::string problem;
  std::optional<int> priority;
  std::optional<Timestamp> t_phone_pickup;
  std::optional<Timestamp> t_assigned;
  std::optional<Timestamp> t_enroute;
  std::optional<Timestamp> t_arrived;
  std::string disposition;
  std::optional<double> longitude;
  std::optional<double> latitude;

  friend bool operator==(const IncidentRecord&, const IncidentRecord&) = default;
};

enum class Stream { pandemic, non_pandemic };
enum class Status { admitted, defunct };

struct StreamLabel {
  Stream stream = Stream::non_pandemic;
  Status status = Status::admitted;
  friend bool operator==(const StreamLabel&, const StreamLabel&) = default;
};

inline const char* to_string(Stream s) { return s == Stream::pandemic ? "pandemic" : "non_pandemic"; }
inline const char* to_string(Status s) { return s == Status::admitted ? "admitted" : "defunct"; }

inline constexpr std::array<std::string_view, 11> kColumns = {
    "IncidentPrimaryKey",       "Jurisdiction",            "Problem",
    "Priority_Number",          "Time_PhonePickUp",        "Time_First_Unit_Assigned",
    "Time_First_Unit_Enroute",  "Time_First_Unit_Arrived", "Call_Disposition",
    "Longitude",                "Latitude"};

inline constexpr std::array<std::string_view, 7> kDefunctDispositions = {
    "call cancelled", "no patient",   "other", "refusal", "duplicate call", "false alarm call",
    "information call only"};

struct ParseReport {
  std::size_t rows_read = 0;
  std::size_t rows_rejected = 0;
  std::map<std::string, std::size_t> reasons;
  std::vector<std::string> flagged_keys;  // inverted timestamps
  std::size_t unparseable_timestamps = 0;
  std::size_t referred = 0;  // "Referred" dispositions, counted as admitted
};

struct IncidentTable {
  std::vector<IncidentRecord> records;
  ParseReport report;
};

struct ParseOptions {
  /// strftime-style pattern; empty accepts ISO-8601 ("T" separator, optional "Z") and
  /// "YYYY-MM-DD HH:MM:SS".
  std::string timestamp_pattern;
};

namespace detail {

using regimecast::detail::lower;
using regimecast::detail::trim;

/// RFC 4180 fields: quoted fields may contain commas, doubled quotes and newlines.
inline bool read_csv_row(std::istream& is, std::vector<std::string>& fields) {
  fields.clear();
  std::string field;
  bool in_quotes = false;
  bool any = false;
  char c = 0;
  while (is.get(c)) {
    any = true;
    if (in_quotes) {
      if (c == '"') {
        if (is.peek() == '"') {
          is.get(c);
          field += '"';
        } else {
          in_quotes = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      in_quotes = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c == '\n') {
      break;
    } else if (c != '\r') {
      field += c;
    }
  }
  if (!any) return false;
  fields.push_back(std::move(field));
  return true;
}

inline std::string csv_escape(const std::string& v) {
  if (v.find_first_of(",\"\n\r") == std::string::npos) return v;
  std::string out = "\"";
  for (char c : v) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

inline std::optional<Timestamp> parse_with(const std::string& text, const char* pattern) {
  std::tm tm{};
  std::istringstream is(text);
  is >> std::get_time(&tm, pattern);
  if (is.fail()) return std::nullopt;
  std::string rest;
  is >> rest;
  if (!rest.empty() && rest != "Z") return std::nullopt;
  const std::chrono::year_month_day ymd{std::chrono::year{tm.tm_year + 1900},
                                        std::chrono::month{static_cast<unsigned>(tm.tm_mon + 1)},
                                        std::chrono::day{static_cast<unsigned>(tm.tm_mday)}};
  if (!ymd.ok() || tm.tm_hour > 23 || tm.tm_min > 59 || tm.tm_sec > 60) return std::nullopt;
  return Timestamp{std::chrono::sys_days{ymd}} + std::chrono::hours{tm.tm_hour} +
         std::chrono::minutes{tm.tm_min} + std::chrono::seconds{tm.tm_sec};
}

inline std::optional<double> parse_real(const std::string& text) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size() || !std::isfinite(v)) return std::nullopt;
    return v;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

}  // namespace detail

inline std::optional<Timestamp> parse_timestamp(const std::string& raw, const std::string& pattern = {}) {
  const std::string text = detail::trim(raw);
  if (text.empty()) return std::nullopt;
  if (!pattern.empty()) return detail::parse_with(text, pattern.c_str());
  if (auto t = detail::parse_with(text, "%Y-%m-%dT%H:%M:%S")) return t;
  return detail::parse_with(text, "%Y-%m-%d %H:%M:%S");
}

inline std::string format_timestamp(Timestamp t) {
  const auto day = std::chrono::floor<std::chrono::days>(t);
  const std::chrono::hh_mm_ss hms{t - day};
  char buf[16];
  std::snprintf(buf, sizeof buf, " %02d:%02d:%02d", static_cast<int>(hms.hours().count()),
                static_cast<int>(hms.minutes().count()), static_cast<int>(hms.seconds().count()));
  return format_date(day) + buf;
}

inline Date local_date(Timestamp t) { return std::chrono::floor<std::chrono::days>(t); }

/// True when the present timestamps are out of order.
inline bool has_inverted_timestamps(const IncidentRecord& r) {
  std::optional<Timestamp> prev;
  for (const auto* t : {&r.t_phone_pickup, &r.t_assigned, &r.t_enroute, &r.t_arrived}) {
    if (!*t) continue;
    if (prev && **t < *prev) return true;
    prev = *t;
  }
  return false;
}

inline IncidentTable parse_incidents(std::istream& is, const ParseOptions& options = {}) {
  std::vector<std::string> header;
  if (!detail::read_csv_row(is, header)) fail(ErrorKind::schema, "incidents CSV: missing header row");
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < header.size(); ++i) index.emplace(detail::lower(detail::trim(header[i])), i);
  std::array<std::optional<std::size_t>, kColumns.size()> col;
  for (std::size_t c = 0; c < kColumns.size(); ++c) {
    const auto it = index.find(detail::lower(std::string(kColumns[c])));
    if (it != index.end()) col[c] = it->second;
  }
  for (std::size_t c : {std::size_t{0}, std::size_t{2}, std::size_t{8}}) {
    if (!col[c]) fail(ErrorKind::schema, "incidents CSV: missing column " + std::string(kColumns[c]));
  }

  IncidentTable table;
  auto& rep = table.report;
  auto reject = [&rep](const std::string& reason) {
    ++rep.rows_rejected;
    ++rep.reasons[reason];
  };
  std::map<std::string, std::size_t> seen;
  std::set<std::string> duplicates;
  std::vector<std::string> row;
  while (detail::read_csv_row(is, row)) {
    if (row.size() == 1 && detail::trim(row[0]).empty()) continue;
    ++rep.rows_read;
    if (row.size() != header.size()) {
      reject("column_count");
      continue;
    }
    auto field = [&](std::size_t c) -> std::string { return col[c] ? row[*col[c]] : std::string(); };
    IncidentRecord r;
    r.primary_key = detail::trim(field(0));
    r.jurisdiction = field(1);
    r.problem = field(2);
    r.disposition = field(8);
    if (r.primary_key.empty()) {
      reject("empty_primary_key");
      continue;
    }
    if (detail::trim(r.problem).empty()) {
      reject("empty_problem");
      continue;
    }
    if (detail::trim(r.disposition).empty()) {
      reject("empty_disposition");
      continue;
    }
    if (const std::string p = detail::trim(field(3)); !p.empty()) {
      int v = 0;
      if (!regimecast::detail::parse_int(p, v) || v < 1 || v > 15) {
        reject("priority_out_of_range");
        continue;
      }
      r.priority = v;
    }
    std::array<std::optional<Timestamp>*, 4> times = {&r.t_phone_pickup, &r.t_assigned, &r.t_enroute,
                                                      &r.t_arrived};
    for (std::size_t i = 0; i < 4; ++i) {
      const std::string text = detail::trim(field(4 + i));
      if (text.empty()) continue;
      *times[i] = parse_timestamp(text, options.timestamp_pattern);
      if (!*times[i]) ++rep.unparseable_timestamps;
    }
    if (const std::string v = detail::trim(field(9)); !v.empty()) r.longitude = detail::parse_real(v);
    if (const std::string v = detail::trim(field(10)); !v.empty()) r.latitude = detail::parse_real(v);

    if (++seen[r.primary_key] > 1) duplicates.insert(r.primary_key);
    if (has_inverted_timestamps(r)) rep.flagged_keys.push_back(r.primary_key);
    if (detail::lower(detail::trim(r.disposition)) == "referred") ++rep.referred;
    table.records.push_back(std::move(r));
  }
  if (!duplicates.empty()) {
    std::string msg = "incidents CSV: duplicate primary keys:";
    for (const auto& k : duplicates) msg += " " + k;
    fail(ErrorKind::duplicate, msg);
  }
  return table;
}

/// Writes the incident columns; parse_incidents reads the output back to the same records.
inline void write_incidents(std::ostream& os, const std::vector<IncidentRecord>& records) {
  for (std::size_t c = 0; c < kColumns.size(); ++c) os << (c ? "," : "") << kColumns[c];
  os << '\n';
  auto ts = [](const std::optional<Timestamp>& t) { return t ? format_timestamp(*t) : std::string(); };
  auto real = [](const std::optional<double>& v) {
    if (!v) return std::string();
    std::ostringstream s;
    s.precision(17);
    s << *v;
    return s.str();
  };
  for (const auto& r : records) {
    os << detail::csv_escape(r.primary_key) << ',' << detail::csv_escape(r.jurisdiction) << ','
       << detail::csv_escape(r.problem) << ',' << (r.priority ? std::to_string(*r.priority) : "") << ','
       << ts(r.t_phone_pickup) << ',' << ts(r.t_assigned) << ',' << ts(r.t_enroute) << ',' << ts(r.t_arrived)
       << ',' << detail::csv_escape(r.disposition) << ',' << real(r.longitude) << ',' << real(r.latitude)
       << '\n';
  }
}

inline bool is_defunct_disposition(std::string_view disposition) {
  const std::string d = detail::lower(detail::trim(disposition));
  return std::find(kDefunctDispositions.begin(), kDefunctDispositions.end(), d) != kDefunctDispositions.end();
}

inline StreamLabel classify_incident(const IncidentRecord& r) {
  StreamLabel label;
  label.status = is_defunct_disposition(r.disposition) ? Status::defunct : Status::admitted;
  label.stream =
      detail::lower(r.problem).find("pandem") != std::string::npos ? Stream::pandemic : Stream::non_pandemic;
  return label;
}

using LabelFilter = std::function<bool(const StreamLabel&)>;

inline LabelFilter only(Stream stream, Status status) {
  return [stream, status](const StreamLabel& l) { return l.stream == stream && l.status == status; };
}

inline LabelFilter any_label() {
  return [](const StreamLabel&) { return true; };
}

/// Daily count of matching records keyed by pickup date over [first, last]. Records without a
/// pickup time cannot be placed and are skipped.
inline DailySeries daily_counts(const std::vector<IncidentRecord>& records, const LabelFilter& filter, Date first,
                                Date last) {
  if (last < first) fail(ErrorKind::range, "daily_counts: calendar ends before it starts");
  DailySeries out{first, std::vector<double>(static_cast<std::size_t>(days_between(first, last) + 1), 0.0)};
  for (const auto& r : records) {
    if (!r.t_phone_pickup || !filter(classify_incident(r))) continue;
    const auto idx = out.index_of(local_date(*r.t_phone_pickup));
    if (!idx) {
      fail(ErrorKind::range, "daily_counts: record " + r.primary_key + " on " +
                                 format_date(local_date(*r.t_phone_pickup)) + " is outside the calendar");
    }
    out.values[*idx] += 1.0;
  }
  return out;
}

struct ResponseIntervals {
  std::optional<double> assignment_min;
  std::optional<double> dispatch_min;
  std::optional<double> arrival_min;
};

inline ResponseIntervals response_intervals(const IncidentRecord& r) {
  auto minutes = [&r](const std::optional<Timestamp>& a, const std::optional<Timestamp>& b,
                      const char* name) -> std::optional<double> {
    if (!a || !b) return std::nullopt;
    const double m = static_cast<double>((*b - *a).count()) / 60.0;
    if (m < 0.0) fail(ErrorKind::flagged, "record " + r.primary_key + ": negative " + name + " interval");
    return m;
  };
  ResponseIntervals out;
  out.assignment_min = minutes(r.t_phone_pickup, r.t_assigned, "assignment");
  out.dispatch_min = minutes(r.t_assigned, r.t_enroute, "dispatch");
  out.arrival_min = minutes(r.t_enroute, r.t_arrived, "arrival");
  return out;
}

/// `date,count` CSV; contiguous, non-negative.
inline DailySeries parse_hospitalization(std::istream& is) {
  DailySeries s = read_series_csv(is, "count");
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s.values[i] < 0.0) {
      fail(ErrorKind::domain, "hospitalization CSV: negative count on " + format_date(s.date_at(i)));
    }
  }
  return s;
}

}  // namespace regimecast::ingest
