#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "regimecast/error.hpp"
#include "regimecast/series.hpp"
#include "regimecast/special.hpp"

namespace regimecast::hypothesis {

enum class TestKind { t_one_sided_greater, anova_f };

inline const char* to_string(TestKind kind) {
  return kind == TestKind::t_one_sided_greater ? "t_one_sided_greater" : "anova_f";
}

struct TestResult {
  TestKind kind = TestKind::t_one_sided_greater;
  double statistic = 0.0;
  double df = 0.0;
  std::optional<double> df2;  // denominator df for F tests
  double p_value = 1.0;
  double alpha_used = 0.05;
  bool reject = false;
};

inline double bonferroni(double alpha, int m) {
  if (!(alpha > 0.0 && alpha < 1.0)) fail(ErrorKind::parameter, "bonferroni: alpha must lie in (0, 1)");
  if (m < 1) fail(ErrorKind::parameter, "bonferroni: family size must be >= 1");
  return alpha / static_cast<double>(m);
}

namespace detail {

inline void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) fail(ErrorKind::parameter, "alpha must lie in (0, 1)");
}

inline TestResult decide(TestResult r, double alpha) {
  r.alpha_used = alpha;
  r.p_value = std::clamp(r.p_value, 0.0, 1.0);
  r.reject = r.p_value < alpha;
  return r;
}

}  // namespace detail

struct TwoSampleT {
  double t = 0.0;
  double df = 0.0;
  bool degenerate = false;  // zero standard error
};

/// Two-sample t statistic for mean(a) - mean(b); pooled variance unless welch is set.
inline TwoSampleT two_sample_t(std::span<const double> a, std::span<const double> b, bool welch = false) {
  if (a.size() < 2 || b.size() < 2) fail(ErrorKind::length, "t test: each sample needs >= 2 values");
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double ma = mean_of(a);
  const double mb = mean_of(b);
  const double va = sample_variance(a);
  const double vb = sample_variance(b);
  TwoSampleT out;
  double se = 0.0;
  if (welch) {
    const double ua = va / na;
    const double ub = vb / nb;
    se = std::sqrt(ua + ub);
    out.df = (ua + ub) * (ua + ub) / (ua * ua / (na - 1.0) + ub * ub / (nb - 1.0));
    if (!std::isfinite(out.df)) out.df = na + nb - 2.0;
  } else {
    const double pooled = ((na - 1.0) * va + (nb - 1.0) * vb) / (na + nb - 2.0);
    se = std::sqrt(pooled * (1.0 / na + 1.0 / nb));
    out.df = na + nb - 2.0;
  }
  const double diff = ma - mb;
  if (se == 0.0) {
    out.degenerate = true;
    out.t = diff == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), diff);
  } else {
    out.t = diff / se;
  }
  return out;
}

/// One-sided Student test of H1: mean(a) > mean(b).
inline TestResult t_test_greater(std::span<const double> a, std::span<const double> b, double alpha = 0.05,
                                 bool welch = false) {
  detail::check_alpha(alpha);
  const auto ts = two_sample_t(a, b, welch);
  TestResult r;
  r.kind = TestKind::t_one_sided_greater;
  r.statistic = ts.t;
  r.df = ts.df;
  if (ts.degenerate && ts.t == 0.0) {
    r.p_value = 0.5;
  } else {
    r.p_value = special::student_t_upper(ts.t, ts.df);
  }
  return detail::decide(r, alpha);
}

/// One-way ANOVA F test across groups.
inline TestResult anova_oneway(const std::vector<std::vector<double>>& groups, double alpha = 0.05) {
  detail::check_alpha(alpha);
  if (groups.size() < 2) fail(ErrorKind::length, "anova: need at least 2 groups");
  double total = 0.0;
  std::size_t count = 0;
  for (const auto& g : groups) {
    if (g.size() < 2) fail(ErrorKind::length, "anova: every group needs >= 2 observations");
    for (double v : g) total += v;
    count += g.size();
  }
  const double grand = total / static_cast<double>(count);
  double ss_between = 0.0;
  double ss_within = 0.0;
  for (const auto& g : groups) {
    const double m = mean_of(g);
    ss_between += static_cast<double>(g.size()) * (m - grand) * (m - grand);
    for (double v : g) ss_within += (v - m) * (v - m);
  }
  const double k = static_cast<double>(groups.size());
  const double df1 = k - 1.0;
  const double df2 = static_cast<double>(count) - k;
  TestResult r;
  r.kind = TestKind::anova_f;
  r.df = df1;
  r.df2 = df2;
  if (ss_within == 0.0) {
    if (ss_between == 0.0) fail(ErrorKind::undefined, "anova: F undefined (no variation at all)");
    r.statistic = std::numeric_limits<double>::infinity();
    r.p_value = 0.0;
  } else {
    r.statistic = (ss_between / df1) / (ss_within / df2);
    r.p_value = special::f_upper(r.statistic, df1, df2);
  }
  return detail::decide(r, alpha);
}

struct ComparisonRow {
  std::string problem;
  std::size_t n1 = 0;
  std::size_t n2 = 0;
  double mean1 = 0.0;
  double mean2 = 0.0;
  std::optional<TestResult> result;
  std::string error;  // set when the per-problem test could not run
};

using SamplePair = std::pair<std::vector<double>, std::vector<double>>;

/// Bonferroni-corrected family of one-sided tests, first sample greater than second.
/// Rows come back ordered by p-value; rows that failed sort last.
inline std::vector<ComparisonRow> multi_compare(const std::map<std::string, SamplePair>& by_problem,
                                                double alpha = 0.05, bool welch = false) {
  if (by_problem.empty()) fail(ErrorKind::parameter, "multi_compare: no problems given");
  const double alpha_used = bonferroni(alpha, static_cast<int>(by_problem.size()));
  std::vector<ComparisonRow> rows;
  rows.reserve(by_problem.size());
  for (const auto& [problem, samples] : by_problem) {
    ComparisonRow row;
    row.problem = problem;
    row.n1 = samples.first.size();
    row.n2 = samples.second.size();
    if (!samples.first.empty()) row.mean1 = mean_of(samples.first);
    if (!samples.second.empty()) row.mean2 = mean_of(samples.second);
    try {
      row.result = t_test_greater(samples.first, samples.second, alpha_used, welch);
    } catch (const Error& e) {
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  }
  std::stable_sort(rows.begin(), rows.end(), [](const ComparisonRow& x, const ComparisonRow& y) {
    if (x.result.has_value() != y.result.has_value()) return x.result.has_value();
    if (!x.result) return false;
    return x.result->p_value < y.result->p_value;
  });
  return rows;
}

}  // namespace regimecast::hypothesis
