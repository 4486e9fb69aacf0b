#pragma once

#include <json.hpp>

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "regimecast/changepoint.hpp"
#include "regimecast/error.hpp"
#include "regimecast/hypothesis.hpp"
#include "regimecast/ingest.hpp"
#include "regimecast/regression.hpp"
#include "regimecast/series.hpp"

namespace regimecast::report {

using nlohmann::ordered_json;

/// Non-finite numbers become strings so they survive a JSON round trip.
inline ordered_json number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

inline ordered_json number(const std::optional<double>& v) { return v ? number(*v) : ordered_json(nullptr); }

inline ordered_json series_json(const DailySeries& s) {
  ordered_json values = ordered_json::array();
  for (double v : s.values) values.push_back(number(v));
  return {{"start_date", format_date(s.start)}, {"values", std::move(values)}};
}

inline DailySeries series_from_json(const ordered_json& j) {
  DailySeries s{parse_date(j.at("start_date").get<std::string>()), {}};
  for (const auto& v : j.at("values")) s.values.push_back(v.get<double>());
  return s;
}

inline ordered_json segmentation_json(const changepoint::Segmentation& seg, Date start) {
  ordered_json j;
  j["method"] = seg.method;
  j["model"] = changepoint::to_string(seg.model);
  j["penalty"] = {{"kind", changepoint::to_string(seg.penalty.kind)}, {"value", number(seg.penalty_value)}};
  ordered_json idx = ordered_json::array();
  ordered_json dates = ordered_json::array();
  for (std::size_t tau : seg.changepoints) {
    idx.push_back(tau);
    dates.push_back(format_date(add_days(start, static_cast<long long>(tau))));
  }
  j["changepoint_indices"] = std::move(idx);
  j["changepoint_dates"] = std::move(dates);
  ordered_json segs = ordered_json::array();
  for (const auto& s : seg.segments) {
    segs.push_back({{"start_date", format_date(add_days(start, static_cast<long long>(s.start)))},
                    {"n", s.n},
                    {"mean", number(s.mean)},
                    {"variance", number(s.variance)}});
  }
  j["segments"] = std::move(segs);
  j["objective"] = number(seg.objective);
  j["degenerate"] = seg.degenerate;
  return j;
}

/// Regime start dates (day after each changepoint) from a segmentation JSON document.
inline std::vector<Date> regime_starts_from_json(const ordered_json& j) {
  std::vector<Date> out;
  for (const auto& d : j.at("changepoint_dates")) out.push_back(add_days(parse_date(d.get<std::string>()), 1));
  return out;
}

struct ModelWindow {
  Date train_start;
  Date train_end;
  Date test_end;
};

inline ordered_json metrics_json(const regression::FitMetrics& m) {
  return {{"r2_train", number(m.r_squared_train)},
          {"r2_test", number(m.r_squared_test)},
          {"mse_test", number(m.mse_test)},
          {"pred_residual_se", number(m.pred_residual_se)}};
}

inline ordered_json model_json(const regression::RegimeModelFit& fit, const ModelWindow& window,
                               const std::optional<regression::FitMetrics>& metrics) {
  ordered_json j;
  j["orders"] = {fit.order.p, fit.order.d, fit.order.q};
  ordered_json coefs = ordered_json::object();
  for (std::size_t i = 0; i < fit.labels.size(); ++i) {
    coefs[fit.labels[i]] = {{"estimate", number(fit.coefficients[i])}, {"se", number(fit.std_errors[i])}};
  }
  j["coefficients"] = std::move(coefs);
  ordered_json phi = ordered_json::array();
  ordered_json theta = ordered_json::array();
  for (double v : fit.phi) phi.push_back(number(v));
  for (double v : fit.theta) theta.push_back(number(v));
  j["arma"] = {{"phi", std::move(phi)}, {"theta", std::move(theta)}};
  j["residual_se"] = number(fit.residual_standard_error);
  j["df"] = number(fit.df);
  j["aicc"] = number(fit.aicc);
  j["window"] = {{"train_start", format_date(window.train_start)},
                 {"train_end", format_date(window.train_end)},
                 {"test_end", format_date(window.test_end)}};
  j["metrics"] = metrics ? metrics_json(*metrics) : ordered_json(nullptr);
  return j;
}

inline ordered_json grid_json(const std::vector<regression::GridCell>& grid) {
  ordered_json out = ordered_json::array();
  for (const auto& c : grid) {
    ordered_json row = {{"orders", {c.order.p, c.order.d, c.order.q}}};
    if (c.fit) row["aicc"] = number(c.fit->aicc);
    else row["error"] = c.error;
    out.push_back(std::move(row));
  }
  return out;
}

inline ordered_json comparison_json(const std::vector<hypothesis::ComparisonRow>& rows) {
  ordered_json out = ordered_json::array();
  for (const auto& r : rows) {
    ordered_json row = {{"problem", r.problem}, {"n1", r.n1},  {"n2", r.n2},
                        {"mean1", number(r.mean1)}, {"mean2", number(r.mean2)}};
    if (r.result) {
      row["t"] = number(r.result->statistic);
      row["df"] = number(r.result->df);
      row["p"] = number(r.result->p_value);
      row["alpha_used"] = number(r.result->alpha_used);
      row["reject"] = r.result->reject;
    } else {
      row["error"] = r.error;
    }
    out.push_back(std::move(row));
  }
  return out;
}

inline ordered_json anova_json(const std::vector<std::string>& groups, const hypothesis::TestResult& r) {
  return {{"groups", groups},
          {"F", number(r.statistic)},
          {"df1", number(r.df)},
          {"df2", number(r.df2)},
          {"p", number(r.p_value)},
          {"alpha_used", number(r.alpha_used)},
          {"reject", r.reject}};
}

inline ordered_json parse_report_json(const ingest::ParseReport& rep) {
  ordered_json reasons = ordered_json::object();
  for (const auto& [k, v] : rep.reasons) reasons[k] = v;
  return {{"rows_read", rep.rows_read},
          {"rows_rejected", rep.rows_rejected},
          {"reasons", std::move(reasons)},
          {"flagged_keys", rep.flagged_keys},
          {"unparseable_timestamps", rep.unparseable_timestamps},
          {"referred", rep.referred}};
}

inline ordered_json error_json(const std::string& kind, const std::string& message) {
  return {{"error", {{"kind", kind}, {"message", message}}}};
}

inline ordered_json error_json(const Error& e) { return error_json(to_string(e.kind()), e.what()); }

}  // namespace regimecast::report
