#pragma once

#include <json.hpp>

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "regimecast/changepoint.hpp"
#include "regimecast/date.hpp"
#include "regimecast/error.hpp"
#include "regimecast/hypothesis.hpp"
#include "regimecast/ingest.hpp"
#include "regimecast/regression.hpp"
#include "regimecast/report.hpp"
#include "regimecast/series.hpp"
#include "regimecast/synth.hpp"

namespace regimecast::pipeline {

using report::ordered_json;

struct ChangepointSettings {
  std::string method = "binseg";
  changepoint::CostKind model = changepoint::CostKind::meanvar;
  std::string penalty = "bic";
  std::optional<double> penalty_value;
  int q_max = 2;
};

struct PipelineConfig {
  std::optional<std::string> incidents_path;
  std::optional<std::string> hosp_path;
  std::optional<std::string> calls_path;
  std::optional<std::string> series_path;
  std::optional<std::string> segmentation_path;
  std::optional<std::string> synth;  // "paper" or a spec JSON path
  std::optional<std::uint64_t> seed;
  int window = 7;
  ChangepointSettings ems{};
  ChangepointSettings hosp{"pelt", changepoint::CostKind::variance, "mbic", std::nullopt, 2};
  double train_fraction = 0.8;
  double alpha = 0.05;
  bool no_changepoints = false;
  bool detect_on_synth = false;
  bool welch = false;
  std::optional<Date> fit_start;
  std::optional<Date> fit_end;
  std::vector<Date> period_boundaries = {parse_date("2020-03-18"), parse_date("2020-05-13")};
  std::size_t min_problem_calls = 3000;
  std::string timestamp_pattern;
  std::string out = "out";
};

/// Files a command produces, keyed by name, in emission order.
using Artifacts = std::vector<std::pair<std::string, std::string>>;

inline std::string dump(const ordered_json& j) { return j.dump(2) + "\n"; }

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::io, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Non-deterministic seed for runs that did not fix one; the value is echoed in the outputs.
inline std::uint64_t fresh_seed() {
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

// ---- config ---------------------------------------------------------------

namespace detail {

inline void apply_settings(const ordered_json& j, ChangepointSettings& s, std::vector<std::string>& problems,
                           const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "method") s.method = value.get<std::string>();
      else if (key == "model") s.model = changepoint::parse_cost_kind(value.get<std::string>());
      else if (key == "penalty") s.penalty = value.get<std::string>();
      else if (key == "penalty_value") s.penalty_value = value.get<double>();
      else if (key == "qmax") s.q_max = value.get<int>();
      else problems.push_back(where + "." + key + ": unknown key");
    } catch (const std::exception& e) {
      problems.push_back(where + "." + key + ": " + e.what());
    }
  }
}

}  // namespace detail

/// Reads a JSON config. Keys mirror the command-line flags with underscores.
inline PipelineConfig load_config(const std::string& text, PipelineConfig cfg = {}) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const std::exception& e) {
    fail(ErrorKind::validation, std::string("config: ") + e.what());
  }
  if (!j.is_object()) fail(ErrorKind::validation, "config: top level must be an object");
  std::vector<std::string> problems;
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "incidents") cfg.incidents_path = value.get<std::string>();
      else if (key == "hosp") cfg.hosp_path = value.get<std::string>();
      else if (key == "calls") cfg.calls_path = value.get<std::string>();
      else if (key == "input") cfg.series_path = value.get<std::string>();
      else if (key == "segmentation") cfg.segmentation_path = value.get<std::string>();
      else if (key == "synth") cfg.synth = value.get<std::string>();
      else if (key == "seed") cfg.seed = value.get<std::uint64_t>();
      else if (key == "window") cfg.window = value.get<int>();
      else if (key == "train_frac") cfg.train_fraction = value.get<double>();
      else if (key == "alpha") cfg.alpha = value.get<double>();
      else if (key == "no_changepoints") cfg.no_changepoints = value.get<bool>();
      else if (key == "detect") cfg.detect_on_synth = value.get<bool>();
      else if (key == "welch") cfg.welch = value.get<bool>();
      else if (key == "fit_start") cfg.fit_start = parse_date(value.get<std::string>());
      else if (key == "fit_end") cfg.fit_end = parse_date(value.get<std::string>());
      else if (key == "min_problem_calls") cfg.min_problem_calls = value.get<std::size_t>();
      else if (key == "timestamp_pattern") cfg.timestamp_pattern = value.get<std::string>();
      else if (key == "out") cfg.out = value.get<std::string>();
      else if (key == "periods") {
        cfg.period_boundaries.clear();
        for (const auto& d : value) cfg.period_boundaries.push_back(parse_date(d.get<std::string>()));
      } else if (key == "ems") detail::apply_settings(value, cfg.ems, problems, "ems");
      else if (key == "hosp_changepoint") detail::apply_settings(value, cfg.hosp, problems, "hosp_changepoint");
      else problems.push_back(key + ": unknown key");
    } catch (const std::exception& e) {
      problems.push_back(key + ": " + e.what());
    }
  }
  if (!problems.empty()) {
    std::string msg = "config:";
    for (const auto& p : problems) msg += " " + p + ";";
    fail(ErrorKind::validation, msg);
  }
  return cfg;
}

// ---- changepoint ------------------------------------------------------------

inline changepoint::Segmentation run_changepoint(const DailySeries& s, const ChangepointSettings& settings) {
  const auto penalty = changepoint::parse_penalty(settings.penalty, settings.penalty_value);
  if (settings.method == "binseg") return changepoint::binseg(s.span(), settings.model, penalty, settings.q_max);
  if (settings.method == "pelt") return changepoint::pelt(s.span(), settings.model, penalty);
  if (settings.method == "oracle") return changepoint::exact_oracle(s.span(), settings.model, penalty, settings.q_max);
  fail(ErrorKind::parameter, "unknown changepoint method '" + settings.method + "'");
}

/// Regime start dates: the day after each changepoint.
inline std::vector<Date> regime_starts(const changepoint::Segmentation& seg, Date start) {
  std::vector<Date> out;
  for (std::size_t tau : seg.changepoints) out.push_back(add_days(start, static_cast<long long>(tau) + 1));
  return out;
}

namespace detail {

inline void require_single_source(const PipelineConfig& cfg, bool has_inputs, const char* who) {
  if (has_inputs == cfg.synth.has_value()) {
    fail(ErrorKind::parameter, std::string(who) + ": give either input files or --synth, not both or neither");
  }
}

inline ingest::IncidentTable load_incidents(const PipelineConfig& cfg) {
  std::istringstream in(read_file(*cfg.incidents_path));
  ingest::ParseOptions opt;
  opt.timestamp_pattern = cfg.timestamp_pattern;
  return ingest::parse_incidents(in, opt);
}

inline std::pair<Date, Date> pickup_span(const std::vector<ingest::IncidentRecord>& records) {
  std::optional<Date> lo, hi;
  for (const auto& r : records) {
    if (!r.t_phone_pickup) continue;
    const Date d = ingest::local_date(*r.t_phone_pickup);
    if (!lo || d < *lo) lo = d;
    if (!hi || d > *hi) hi = d;
  }
  if (!lo) fail(ErrorKind::empty, "no incident has a pickup time");
  return {*lo, *hi};
}

inline DailySeries stream_counts(const std::vector<ingest::IncidentRecord>& records, ingest::Stream stream) {
  const auto [lo, hi] = pickup_span(records);
  return ingest::daily_counts(records, ingest::only(stream, ingest::Status::admitted), lo, hi);
}

inline DailySeries read_series_file(const std::string& path) {
  std::istringstream in(read_file(path));
  std::string header;
  std::getline(in, header);
  const auto comma = header.find(',');
  const std::string column =
      comma == std::string::npos ? "value" : regimecast::detail::lower(regimecast::detail::trim(header.substr(comma + 1)));
  in.clear();
  in.seekg(0);
  return read_series_csv(in, column);
}

inline DailySeries window_of(const DailySeries& s, Date first, Date last) {
  const auto i = s.index_of(first);
  const auto j = s.index_of(last);
  if (!i || !j || *j < *i) {
    fail(ErrorKind::range, "window " + format_date(first) + ".." + format_date(last) + " is outside the series");
  }
  return DailySeries{first, {s.values.begin() + static_cast<std::ptrdiff_t>(*i),
                             s.values.begin() + static_cast<std::ptrdiff_t>(*j) + 1}};
}

inline std::string number_text(double v) {
  std::ostringstream s;
  s.precision(17);
  s << v;
  return s.str();
}

}  // namespace detail

struct ChangepointRun {
  DailySeries series;
  changepoint::Segmentation segmentation;
  ordered_json json;
  Artifacts files;
};

/// stage "ems" uses the EMS settings (binseg/meanvar/BIC/2), "hosp" the hospitalization ones
/// (pelt/variance/MBIC).
inline ChangepointRun cmd_changepoint(const PipelineConfig& cfg, const std::string& stage = "ems") {
  if (stage != "ems" && stage != "hosp") fail(ErrorKind::parameter, "stage must be 'ems' or 'hosp'");
  const bool hosp_stage = stage == "hosp";
  const auto& settings = hosp_stage ? cfg.hosp : cfg.ems;
  ChangepointRun run;
  std::optional<std::uint64_t> seed;
  detail::require_single_source(cfg, cfg.series_path || cfg.incidents_path || (hosp_stage && cfg.hosp_path),
                                "changepoint");
  if (cfg.synth) {
    if (*cfg.synth != "paper") fail(ErrorKind::parameter, "changepoint: --synth accepts only 'paper'");
    seed = cfg.seed ? *cfg.seed : fresh_seed();
    run.series = hosp_stage ? synth::gen_hosp_like(*seed) : synth::gen_piecewise_normal(synth::paper_ems_regimes(*seed));
  } else if (cfg.series_path) {
    run.series = detail::read_series_file(*cfg.series_path);
  } else if (hosp_stage && cfg.hosp_path) {
    std::istringstream in(read_file(*cfg.hosp_path));
    run.series = ingest::parse_hospitalization(in);
  } else {
    run.series = detail::stream_counts(detail::load_incidents(cfg).records, ingest::Stream::non_pandemic);
  }
  run.segmentation = run_changepoint(run.series, settings);
  run.json = report::segmentation_json(run.segmentation, run.series.start);
  run.json["stage"] = stage;
  if (seed) run.json["seed"] = *seed;
  std::ostringstream csv;
  csv << "date,value,segment\n";
  std::size_t seg = 0;
  for (std::size_t i = 0; i < run.series.size(); ++i) {
    while (seg < run.segmentation.changepoints.size() && i > run.segmentation.changepoints[seg]) ++seg;
    csv << format_date(run.series.date_at(i)) << ',' << detail::number_text(run.series.values[i]) << ',' << seg + 1
        << '\n';
  }
  run.files = {{"segmentation.json", dump(run.json)}, {"segments.csv", csv.str()}};
  return run;
}

// ---- forecast ---------------------------------------------------------------

struct ForecastRun {
  regression::RegimeModelFit fit;
  regression::FitMetrics metrics;
  std::vector<Date> regime_starts;
  std::string changepoint_source;
  ordered_json json;
  Artifacts files;
};

/// detect -> smooth -> design -> split -> select -> evaluate.
inline ForecastRun cmd_forecast(const PipelineConfig& cfg) {
  if (cfg.window < 1) fail(ErrorKind::parameter, "forecast: window must be >= 1");
  detail::require_single_source(cfg, cfg.hosp_path.has_value(), "forecast");
  DailySeries hosp;
  DailySeries calls;
  std::optional<std::vector<Date>> scenario_starts;
  std::optional<std::uint64_t> seed;
  if (cfg.synth) {
    if (*cfg.synth != "paper") fail(ErrorKind::parameter, "forecast: --synth accepts only 'paper'");
    seed = cfg.seed ? *cfg.seed : fresh_seed();
    synth::DgpSpec spec;
    spec.seed = *seed;
    spec.window = cfg.window;
    auto sample = synth::gen_regression_dgp(spec);
    hosp = std::move(sample.hosp_raw);
    calls = std::move(sample.calls);
    scenario_starts = std::move(sample.regime_starts);
  } else {
    std::istringstream in(read_file(*cfg.hosp_path));
    hosp = ingest::parse_hospitalization(in);
    if (cfg.calls_path) {
      calls = detail::read_series_file(*cfg.calls_path);
    } else if (cfg.incidents_path) {
      calls = detail::stream_counts(detail::load_incidents(cfg).records, ingest::Stream::pandemic);
    } else {
      fail(ErrorKind::parameter, "forecast: pandemic calls input required (--calls or --incidents)");
    }
  }
  Date first = std::max(hosp.start, calls.start);
  Date last = std::min(hosp.end_date(), calls.end_date());
  if (cfg.fit_start) first = std::max(first, *cfg.fit_start);
  if (cfg.fit_end) last = std::min(last, *cfg.fit_end);
  if (last < first) fail(ErrorKind::range, "forecast: hospitalization and calls series do not overlap");
  hosp = detail::window_of(hosp, first, last);
  calls = detail::window_of(calls, first, last);

  ForecastRun run;
  if (cfg.no_changepoints) {
    run.changepoint_source = "none";
  } else if (cfg.segmentation_path) {
    run.regime_starts = report::regime_starts_from_json(ordered_json::parse(read_file(*cfg.segmentation_path)));
    run.changepoint_source = "file";
  } else if (scenario_starts && !cfg.detect_on_synth) {
    run.regime_starts = *scenario_starts;
    run.changepoint_source = "scenario";
  } else {
    run.regime_starts = regime_starts(run_changepoint(hosp, cfg.hosp), hosp.start);
    run.changepoint_source = "detected";
  }

  const DailySeries hosp_s = moving_average(hosp, cfg.window);
  const DailySeries calls_s = moving_average(calls, cfg.window);
  const auto X = regression::build_design(hosp_s, run.regime_starts);
  // The model is fitted to raw calls; smoothed calls only score r^2.
  auto [train, test] = regression::split_chronological(calls.values, X, cfg.train_fraction);
  const std::size_t n_train = train.y.size();
  const std::span<const double> smooth_all(calls_s.values);
  const auto selection = regression::stepwise_search(train.X, train.y);
  run.fit = selection.best;
  run.metrics = regression::evaluate(run.fit, test.X, test.y, smooth_all.subspan(n_train), smooth_all.first(n_train),
                                     train.X);

  const report::ModelWindow window{first, add_days(first, static_cast<long long>(n_train) - 1), last};
  run.json = report::model_json(run.fit, window, run.metrics);
  run.json["changepoint_source"] = run.changepoint_source;
  ordered_json starts = ordered_json::array();
  for (const Date d : run.regime_starts) starts.push_back(format_date(d));
  run.json["regime_starts"] = std::move(starts);
  run.json["smoothing_window"] = cfg.window;
  run.json["train_fraction"] = cfg.train_fraction;
  run.json["selection"] = report::grid_json(selection.grid);
  if (seed) run.json["seed"] = *seed;

  const auto fitted = regression::predict(run.fit, X);
  std::ostringstream csv;
  csv << "date,raw,smoothed,fitted,set\n";
  for (std::size_t i = 0; i < calls.size(); ++i) {
    csv << format_date(calls.date_at(i)) << ',' << detail::number_text(calls.values[i]) << ','
        << detail::number_text(calls_s.values[i]) << ',' << detail::number_text(fitted[i]) << ','
        << (i < n_train ? "train" : "test") << '\n';
  }
  run.files = {{"model.json", dump(run.json)},
               {"metrics.json", dump(report::metrics_json(run.metrics))},
               {"predictions.csv", csv.str()}};
  return run;
}

// ---- compare ----------------------------------------------------------------

struct CompareRun {
  ordered_json json;
  Artifacts files;
  std::optional<Error> error;  // period comparison failed; the rest of the report still ran
};

namespace detail {

inline ordered_json interval_summary(const std::vector<double>& xs) {
  if (xs.empty()) return {{"n", 0}, {"mean", nullptr}, {"median", nullptr}};
  const auto s = summarize(xs);
  return {{"n", s.n}, {"mean", report::number(s.mean)}, {"median", report::number(s.median)}};
}

struct IntervalSamples {
  std::vector<double> assignment, dispatch, arrival;

  void add(const ingest::ResponseIntervals& r) {
    if (r.assignment_min) assignment.push_back(*r.assignment_min);
    if (r.dispatch_min) dispatch.push_back(*r.dispatch_min);
    if (r.arrival_min) arrival.push_back(*r.arrival_min);
  }

  ordered_json json() const {
    return {{"assignment", interval_summary(assignment)},
            {"dispatch", interval_summary(dispatch)},
            {"arrival", interval_summary(arrival)}};
  }
};

}  // namespace detail

/// Per-problem one-sided t tests (first period greater than last) on admitted daily counts,
/// Bonferroni over problems with at least min_problem_calls incidents; one-way ANOVA of
/// response intervals across "Transported to ..." dispositions; response-time tables.
inline CompareRun cmd_compare(const PipelineConfig& cfg) {
  detail::require_single_source(cfg, cfg.incidents_path.has_value(), "compare");
  std::vector<ingest::IncidentRecord> records;
  CompareRun run;
  if (cfg.synth) {
    if (*cfg.synth != "paper") fail(ErrorKind::parameter, "compare: --synth accepts only 'paper'");
    synth::IncidentSynthSpec spec;
    spec.seed = cfg.seed ? *cfg.seed : fresh_seed();
    run.json["seed"] = spec.seed;
    records = synth::gen_incidents(spec);
  } else {
    records = detail::load_incidents(cfg).records;
  }
  const auto [lo, hi] = detail::pickup_span(records);
  run.json["calendar"] = {{"start", format_date(lo)}, {"end", format_date(hi)}};
  run.json["alpha"] = cfg.alpha;

  std::map<std::string, std::size_t> totals;
  for (const auto& r : records) ++totals[regimecast::detail::trim(r.problem)];
  std::vector<std::string> family;
  for (const auto& [problem, count] : totals) {
    if (count >= cfg.min_problem_calls) family.push_back(problem);
  }
  run.json["min_problem_calls"] = cfg.min_problem_calls;
  run.json["family_size"] = family.size();

  PeriodSpec periods{cfg.period_boundaries, {}};
  try {
    if (family.empty()) fail(ErrorKind::empty, "compare: no problem reaches " + std::to_string(cfg.min_problem_calls) + " calls");
    std::map<std::string, hypothesis::SamplePair> samples;
    std::map<std::string, std::vector<ingest::IncidentRecord>> by_problem;
    for (const auto& r : records) {
      const std::string p = regimecast::detail::trim(r.problem);
      if (std::binary_search(family.begin(), family.end(), p)) by_problem[p].push_back(r);
    }
    for (const auto& [problem, rs] : by_problem) {
      const auto daily = ingest::daily_counts(
          rs, [](const ingest::StreamLabel& l) { return l.status == ingest::Status::admitted; }, lo, hi);
      const auto parts = slice_periods(daily, periods);
      if (parts.size() < 2) fail(ErrorKind::range, "compare: period comparison needs at least two periods");
      samples[problem] = {parts.front().values, parts.back().values};
    }
    const auto rows = hypothesis::multi_compare(samples, cfg.alpha, cfg.welch);
    run.json["alpha_used"] = hypothesis::bonferroni(cfg.alpha, static_cast<int>(samples.size()));
    run.json["t_tests"] = report::comparison_json(rows);
    std::ostringstream csv;
    csv << "problem,n1,n2,mean1,mean2,t,df,p,alpha_used,reject\n";
    for (const auto& r : rows) {
      csv << ingest::detail::csv_escape(r.problem) << ',' << r.n1 << ',' << r.n2 << ','
          << detail::number_text(r.mean1) << ',' << detail::number_text(r.mean2);
      if (r.result) {
        csv << ',' << detail::number_text(r.result->statistic) << ',' << detail::number_text(r.result->df) << ','
            << detail::number_text(r.result->p_value) << ',' << detail::number_text(r.result->alpha_used) << ','
            << (r.result->reject ? "true" : "false");
      } else {
        csv << ",,,,,";
      }
      csv << '\n';
    }
    run.files.emplace_back("t_tests.csv", csv.str());
  } catch (const Error& e) {
    run.error = e;
    run.json["t_tests"] = report::error_json(e);
  }

  // Response intervals; records with inverted timestamps are left out.
  std::map<std::string, detail::IntervalSamples> by_group;
  std::vector<detail::IntervalSamples> by_period(cfg.period_boundaries.size() + 1);
  detail::IntervalSamples overall;
  for (const auto& r : records) {
    if (ingest::has_inverted_timestamps(r)) continue;
    const auto iv = ingest::response_intervals(r);
    overall.add(iv);
    if (r.t_phone_pickup) {
      const Date d = ingest::local_date(*r.t_phone_pickup);
      std::size_t k = 0;
      while (k < cfg.period_boundaries.size() && d >= cfg.period_boundaries[k]) ++k;
      by_period[k].add(iv);
    }
    const std::string disp = regimecast::detail::trim(r.disposition);
    if (regimecast::detail::lower(disp).rfind("transported to ", 0) == 0) by_group[disp].add(iv);
  }
  ordered_json tables;
  tables["overall"] = overall.json();
  ordered_json periods_json = ordered_json::array();
  for (std::size_t k = 0; k < by_period.size(); ++k) {
    ordered_json p = by_period[k].json();
    p["period"] = k + 1;
    periods_json.push_back(std::move(p));
  }
  tables["by_period"] = std::move(periods_json);
  ordered_json groups_json = ordered_json::object();
  for (const auto& [name, s] : by_group) groups_json[name] = s.json();
  tables["by_group"] = std::move(groups_json);
  run.json["response_times"] = std::move(tables);

  ordered_json anova = ordered_json::object();
  using Member = std::vector<double> detail::IntervalSamples::*;
  const std::vector<std::pair<const char*, Member>> measures = {{"assignment", &detail::IntervalSamples::assignment},
                                                                {"dispatch", &detail::IntervalSamples::dispatch},
                                                                {"arrival", &detail::IntervalSamples::arrival}};
  for (const auto& [name, member] : measures) {
    std::vector<std::string> names;
    std::vector<std::vector<double>> groups;
    for (const auto& [g, s] : by_group) {
      if ((s.*member).size() >= 2) {
        names.push_back(g);
        groups.push_back(s.*member);
      }
    }
    try {
      anova[name] = report::anova_json(names, hypothesis::anova_oneway(groups, cfg.alpha));
    } catch (const Error& e) {
      anova[name] = report::error_json(e);
    }
  }
  run.json["anova"] = std::move(anova);
  run.files.insert(run.files.begin(), {"compare.json", dump(run.json)});
  return run;
}

// ---- synth --------------------------------------------------------------------

struct SynthRun {
  ordered_json echo;
  Artifacts files;
};

namespace detail {

inline std::string series_csv(const DailySeries& s, const std::string& column = "value") {
  std::ostringstream os;
  write_series_csv(os, s, column);
  return os.str();
}

class SpecReader {
 public:
  explicit SpecReader(const ordered_json& j) : j_(j) {
    for (const auto& [key, value] : j.items()) unused_.insert(key);
  }

  template <class T>
  void get(const char* key, T& out) {
    unused_.erase(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const std::exception& e) {
      problems_.push_back(std::string(key) + ": " + e.what());
    }
  }

  void get_date(const char* key, Date& out) {
    std::string text;
    const bool present = j_.contains(key);
    get(key, text);
    if (!present) return;
    if (!try_parse_date(text, out)) problems_.push_back(std::string(key) + ": expected YYYY-MM-DD");
  }

  void problem(std::string p) { problems_.push_back(std::move(p)); }

  void finish() {
    for (const auto& k : unused_) problems_.push_back(k + ": unknown key");
    if (!problems_.empty()) {
      std::string msg = "synth spec:";
      for (const auto& p : problems_) msg += " " + p + ";";
      fail(ErrorKind::validation, msg);
    }
  }

 private:
  const ordered_json& j_;
  std::set<std::string> unused_;
  std::vector<std::string> problems_;
};

}  // namespace detail

/// Spec JSON: {"kind": "regimes" | "hosp" | "dgp" | "inar" | "incidents", ...fields, "seed"?}.
/// A command-line seed wins over the spec's; with neither, a fresh seed is drawn and echoed.
inline SynthRun cmd_synth_spec(const ordered_json& spec, std::optional<std::uint64_t> seed_override) {
  if (!spec.is_object()) fail(ErrorKind::validation, "synth spec: top level must be an object");
  detail::SpecReader rd(spec);
  std::string kind;
  rd.get("kind", kind);
  std::optional<std::uint64_t> spec_seed;
  if (spec.contains("seed")) {
    std::uint64_t s = 0;
    rd.get("seed", s);
    spec_seed = s;
  }
  SynthRun run;
  const bool generated = !seed_override && !spec_seed;
  const std::uint64_t seed = seed_override ? *seed_override : (spec_seed ? *spec_seed : fresh_seed());

  if (kind == "regimes") {
    synth::RegimeSpec rs;
    rd.get_date("start", rs.start);
    rd.get("lengths", rs.lengths);
    rd.get("means", rs.means);
    rd.get("sds", rs.sds);
    rd.get("round_to_int", rs.round_to_int);
    rd.finish();
    rs.seed = seed;
    run.files.emplace_back("series.csv", detail::series_csv(synth::gen_piecewise_normal(rs)));
    run.echo = {{"kind", kind},      {"start", format_date(rs.start)}, {"lengths", rs.lengths},
                {"means", rs.means}, {"sds", rs.sds},                  {"round_to_int", rs.round_to_int}};
  } else if (kind == "hosp") {
    synth::HospLikeSpec hs;
    rd.get_date("start", hs.start);
    rd.get("length", hs.length);
    rd.get("offsets", hs.offsets);
    rd.get("levels", hs.levels);
    rd.get("sds", hs.sds);
    rd.finish();
    hs.seed = seed;
    run.files.emplace_back("hosp.csv", detail::series_csv(synth::gen_hosp_like(hs), "count"));
    run.echo = {{"kind", kind},          {"start", format_date(hs.start)}, {"length", hs.length},
                {"offsets", hs.offsets}, {"levels", hs.levels},            {"sds", hs.sds}};
  } else if (kind == "dgp") {
    synth::DgpSpec ds;
    rd.get("coefficients", ds.coefficients);
    rd.get("offsets", ds.offsets);
    rd.get("noise_sd", ds.noise_sd);
    rd.get("window", ds.window);
    rd.get_date("start", ds.exogenous.start);
    rd.get("length", ds.exogenous.length);
    rd.finish();
    ds.seed = seed;
    const auto sample = synth::gen_regression_dgp(ds);
    run.files.emplace_back("hosp.csv", detail::series_csv(sample.hosp_raw, "count"));
    run.files.emplace_back("calls.csv", detail::series_csv(sample.calls));
    ordered_json starts = ordered_json::array();
    for (const Date d : sample.regime_starts) starts.push_back(format_date(d));
    run.echo = {{"kind", kind},
                {"coefficients", ds.coefficients},
                {"offsets", ds.offsets},
                {"noise_sd", ds.noise_sd},
                {"window", ds.window},
                {"start", format_date(ds.exogenous.start)},
                {"length", ds.exogenous.length},
                {"regime_starts", std::move(starts)}};
  } else if (kind == "inar") {
    double alpha = 0.5, lambda = 5.0;
    std::size_t n = 1000;
    Date start = parse_date("2020-01-01");
    rd.get("alpha", alpha);
    rd.get("lambda", lambda);
    rd.get("n", n);
    rd.get_date("start", start);
    rd.finish();
    run.files.emplace_back("series.csv", detail::series_csv(synth::simulate_inar1(alpha, lambda, n, seed, start)));
    run.echo = {{"kind", kind}, {"alpha", alpha}, {"lambda", lambda}, {"n", n}, {"start", format_date(start)}};
  } else if (kind == "incidents") {
    synth::IncidentSynthSpec is;
    rd.get_date("start", is.start);
    rd.get("days", is.days);
    rd.get("pandemic_mean", is.pandemic_mean);
    rd.get("defunct_share", is.defunct_share);
    rd.finish();
    is.seed = seed;
    std::ostringstream os;
    ingest::write_incidents(os, synth::gen_incidents(is));
    run.files.emplace_back("incidents.csv", os.str());
    run.echo = {{"kind", kind},
                {"start", format_date(is.start)},
                {"days", is.days},
                {"pandemic_mean", is.pandemic_mean},
                {"defunct_share", is.defunct_share}};
  } else {
    rd.problem("kind: expected one of regimes, hosp, dgp, inar, incidents");
    rd.finish();
  }
  run.echo["seed"] = seed;
  run.echo["seed_generated"] = generated;
  run.files.emplace_back("spec_echo.json", dump(run.echo));
  return run;
}

/// "paper" emits the EMS regime series, the hospitalization-stage series and the regression DGP.
inline SynthRun cmd_synth(const PipelineConfig& cfg) {
  if (!cfg.synth) fail(ErrorKind::parameter, "synth: --synth paper or --spec PATH required");
  if (*cfg.synth != "paper") {
    ordered_json spec;
    try {
      spec = ordered_json::parse(read_file(*cfg.synth));
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorKind::validation, std::string("synth spec: ") + e.what());
    }
    return cmd_synth_spec(spec, cfg.seed);
  }
  SynthRun run;
  const bool generated = !cfg.seed;
  const std::uint64_t seed = cfg.seed ? *cfg.seed : fresh_seed();
  synth::DgpSpec ds;
  ds.seed = seed;
  ds.window = cfg.window;
  const auto sample = synth::gen_regression_dgp(ds);
  run.files.emplace_back("ems.csv", detail::series_csv(synth::gen_piecewise_normal(synth::paper_ems_regimes(seed))));
  run.files.emplace_back("hosp_stages.csv", detail::series_csv(synth::gen_hosp_like(seed), "count"));
  run.files.emplace_back("hosp.csv", detail::series_csv(sample.hosp_raw, "count"));
  run.files.emplace_back("calls.csv", detail::series_csv(sample.calls));
  ordered_json starts = ordered_json::array();
  for (const Date d : sample.regime_starts) starts.push_back(format_date(d));
  run.echo = {{"kind", "paper"}, {"regime_starts", std::move(starts)}, {"seed", seed}, {"seed_generated", generated}};
  run.files.emplace_back("spec_echo.json", dump(run.echo));
  return run;
}

// ---- ingest-check -----------------------------------------------------------

inline SynthRun cmd_ingest_check(const PipelineConfig& cfg) {
  if (!cfg.incidents_path && !cfg.hosp_path) fail(ErrorKind::parameter, "ingest-check: --incidents or --hosp required");
  SynthRun run;
  if (cfg.incidents_path) {
    const auto table = detail::load_incidents(cfg);
    ordered_json j = report::parse_report_json(table.report);
    std::map<std::string, std::size_t> counts;
    for (const auto& r : table.records) {
      const auto l = ingest::classify_incident(r);
      ++counts[std::string(ingest::to_string(l.stream)) + "_" + ingest::to_string(l.status)];
    }
    ordered_json streams = ordered_json::object();
    for (const auto& [k, v] : counts) streams[k] = v;
    j["streams"] = std::move(streams);
    run.echo["incidents"] = std::move(j);
  }
  if (cfg.hosp_path) {
    std::istringstream in(read_file(*cfg.hosp_path));
    const auto s = ingest::parse_hospitalization(in);
    run.echo["hospitalization"] = {{"start_date", format_date(s.start)},
                                   {"end_date", format_date(s.end_date())},
                                   {"length", s.size()}};
  }
  run.files.emplace_back("ingest_report.json", dump(run.echo));
  return run;
}

}  // namespace regimecast::pipeline
