#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "regimecast/error.hpp"
#include "regimecast/series.hpp"

namespace regimecast::changepoint {

/// Which normal parameter is allowed to change between segments.
enum class CostKind { mean, variance, meanvar };

/// Number of parameters that change at each changepoint.
constexpr int diffparam(CostKind kind) { return kind == CostKind::meanvar ? 2 : 1; }

/// Variance-bearing costs need two points to avoid log(0).
constexpr std::size_t min_segment_length(CostKind kind) { return kind == CostKind::mean ? 1 : 2; }

inline const char* to_string(CostKind kind) {
  switch (kind) {
    case CostKind::mean: return "mean";
    case CostKind::variance: return "variance";
    case CostKind::meanvar: return "meanvar";
  }
  return "?";
}

inline CostKind parse_cost_kind(const std::string& name) {
  if (name == "mean") return CostKind::mean;
  if (name == "variance") return CostKind::variance;
  if (name == "meanvar") return CostKind::meanvar;
  fail(ErrorKind::parameter, "unknown cost model '" + name + "'");
}

enum class PenaltyKind { aic, bic, sic, mbic, manual };

inline const char* to_string(PenaltyKind kind) {
  switch (kind) {
    case PenaltyKind::aic: return "aic";
    case PenaltyKind::bic: return "bic";
    case PenaltyKind::sic: return "sic";
    case PenaltyKind::mbic: return "mbic";
    case PenaltyKind::manual: return "manual";
  }
  return "?";
}

struct PenaltySpec {
  PenaltyKind kind = PenaltyKind::bic;
  std::optional<double> manual_value;

  static PenaltySpec of(PenaltyKind kind) { return {kind, std::nullopt}; }
  static PenaltySpec manual(double value) { return {PenaltyKind::manual, value}; }

  bool augments_cost() const noexcept { return kind == PenaltyKind::mbic; }
};

inline PenaltySpec parse_penalty(const std::string& name, std::optional<double> value = std::nullopt) {
  PenaltySpec spec;
  if (name == "aic") spec.kind = PenaltyKind::aic;
  else if (name == "bic") spec.kind = PenaltyKind::bic;
  else if (name == "sic") spec.kind = PenaltyKind::sic;
  else if (name == "mbic") spec.kind = PenaltyKind::mbic;
  else if (name == "manual") spec.kind = PenaltyKind::manual;
  else fail(ErrorKind::parameter, "unknown penalty '" + name + "'");
  if (spec.kind == PenaltyKind::manual) {
    if (!value) fail(ErrorKind::parameter, "manual penalty requires a value");
    spec.manual_value = value;
  } else if (value) {
    fail(ErrorKind::parameter, "penalty value is only valid with the manual penalty");
  }
  return spec;
}

/// Per-changepoint penalty. With p = diffparam(model): AIC 2(p+1), BIC/SIC (p+1) log n,
/// MBIC (p+2) log n (and MBIC also adds log(segment length) to every segment cost).
inline double penalty_value(const PenaltySpec& spec, std::size_t n, CostKind model) {
  if (n < 2) fail(ErrorKind::length, "penalty_value: series length must be >= 2");
  const double p = diffparam(model);
  const double log_n = std::log(static_cast<double>(n));
  switch (spec.kind) {
    case PenaltyKind::aic: return 2.0 * (p + 1.0);
    case PenaltyKind::bic:
    case PenaltyKind::sic: return (p + 1.0) * log_n;
    case PenaltyKind::mbic: return (p + 2.0) * log_n;
    case PenaltyKind::manual:
      if (!spec.manual_value) fail(ErrorKind::parameter, "manual penalty without a value");
      if (!(*spec.manual_value >= 0.0)) fail(ErrorKind::parameter, "manual penalty must be >= 0");
      return *spec.manual_value;
  }
  return 0.0;
}

inline constexpr double kVarianceFloor = 1e-8;

struct CostOptions {
  // Variance-only model: measure deviations about each segment's own mean instead of
  // the full-series mean.
  bool variance_about_segment_mean = false;
};

namespace detail {

inline double normal_cost(double n, double var, bool& floored) {
  if (var < kVarianceFloor) {
    var = kVarianceFloor;
    floored = true;
  }
  return n * (std::log(2.0 * std::numbers::pi) + std::log(var) + 1.0);
}

}  // namespace detail

/// Twice the negative maximised log-likelihood of x[lo..hi] (inclusive), computed directly.
/// Throws a length error for segments shorter than the model's minimum.
inline double segment_cost(std::span<const double> x, std::size_t lo, std::size_t hi, CostKind model,
                           double global_mean, bool* floored = nullptr) {
  if (hi < lo || hi >= x.size()) fail(ErrorKind::range, "segment_cost: bad segment bounds");
  const std::size_t n = hi - lo + 1;
  if (n < min_segment_length(model)) {
    fail(ErrorKind::length, "segment_cost: segment of length " + std::to_string(n) +
                                " is shorter than the minimum for model " + to_string(model));
  }
  const auto seg = x.subspan(lo, n);
  const double nd = static_cast<double>(n);
  double centre = global_mean;
  if (model != CostKind::variance) {
    centre = 0.0;
    for (double v : seg) centre += v;
    centre /= nd;
  }
  double ss = 0.0;
  for (double v : seg) ss += (v - centre) * (v - centre);
  if (model == CostKind::mean) return ss;
  bool flag = false;
  const double cost = detail::normal_cost(nd, ss / nd, flag);
  if (floored && flag) *floored = true;
  return cost;
}

/// O(1) segment costs from prefix sums. The series is centred on its mean first so the
/// sum-of-squares difference does not lose precision on large levels.
class CostFunction {
 public:
  CostFunction(std::span<const double> x, CostKind model, bool augment_log_length,
               const CostOptions& options = {})
      : model_(model), augment_(augment_log_length), options_(options) {
    const std::size_t n = x.size();
    if (n == 0) fail(ErrorKind::empty, "changepoint: empty series");
    double mu = 0.0;
    for (double v : x) mu += v;
    mu /= static_cast<double>(n);
    global_mean_ = mu;
    s1_.assign(n + 1, 0.0);
    s2_.assign(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double d = x[i] - mu;
      s1_[i + 1] = s1_[i] + d;
      s2_[i + 1] = s2_[i] + d * d;
    }
  }

  std::size_t size() const noexcept { return s1_.size() - 1; }
  CostKind model() const noexcept { return model_; }
  double global_mean() const noexcept { return global_mean_; }
  std::size_t min_length() const noexcept { return min_segment_length(model_); }

  /// Cost of the half-open range [begin, end).
  double operator()(std::size_t begin, std::size_t end) const {
    const double n = static_cast<double>(end - begin);
    const double sum = s1_[end] - s1_[begin];
    const double sq = s2_[end] - s2_[begin];
    double cost = 0.0;
    if (model_ == CostKind::mean) {
      cost = std::max(sq - sum * sum / n, 0.0);
    } else {
      double var = 0.0;
      if (model_ == CostKind::variance && !options_.variance_about_segment_mean) {
        var = sq / n;  // centred on the global mean already
      } else {
        var = std::max(sq / n - (sum / n) * (sum / n), 0.0);
      }
      cost = detail::normal_cost(n, var, floored_);
    }
    if (augment_) cost += std::log(n);
    return cost;
  }

  bool floored() const noexcept { return floored_; }
  bool augmented() const noexcept { return augment_; }

 private:
  CostKind model_;
  bool augment_;
  CostOptions options_;
  double global_mean_ = 0.0;
  std::vector<double> s1_;
  std::vector<double> s2_;
  mutable bool floored_ = false;
};

struct SegmentStats {
  std::size_t start = 0;
  std::size_t n = 0;
  double mean = 0.0;
  double variance = 0.0;  // mean squared deviation about the segment mean
};

/// Result of a changepoint search. Changepoint tau is the last index of its segment.
struct Segmentation {
  std::string method;
  CostKind model = CostKind::meanvar;
  PenaltySpec penalty;
  double penalty_value = 0.0;
  std::vector<std::size_t> changepoints;
  std::vector<SegmentStats> segments;
  double objective = 0.0;
  bool degenerate = false;  // some segment variance hit the floor

  std::size_t count() const noexcept { return changepoints.size(); }
};

inline std::vector<SegmentStats> segment_stats(std::span<const double> x,
                                               const std::vector<std::size_t>& changepoints) {
  std::vector<SegmentStats> out;
  std::size_t begin = 0;
  auto emit = [&](std::size_t end) {
    SegmentStats s;
    s.start = begin;
    s.n = end - begin;
    double m = 0.0;
    for (std::size_t i = begin; i < end; ++i) m += x[i];
    m /= static_cast<double>(s.n);
    double ss = 0.0;
    for (std::size_t i = begin; i < end; ++i) ss += (x[i] - m) * (x[i] - m);
    s.mean = m;
    s.variance = ss / static_cast<double>(s.n);
    out.push_back(s);
    begin = end;
  };
  for (std::size_t tau : changepoints) emit(tau + 1);
  emit(x.size());
  return out;
}

namespace detail {

inline void check_length(std::size_t n, CostKind model, const char* who) {
  if (n < 2 * min_segment_length(model)) {
    fail(ErrorKind::length, std::string(who) + ": series of length " + std::to_string(n) +
                                " is too short for model " + to_string(model));
  }
}

inline Segmentation finish(std::string method, std::span<const double> x, CostKind model,
                           const PenaltySpec& penalty, double beta, std::vector<std::size_t> cps,
                           double objective, bool degenerate) {
  Segmentation seg;
  seg.method = std::move(method);
  seg.model = model;
  seg.penalty = penalty;
  seg.penalty_value = beta;
  std::sort(cps.begin(), cps.end());
  seg.segments = segment_stats(x, cps);
  seg.changepoints = std::move(cps);
  seg.objective = objective;
  seg.degenerate = degenerate;
  return seg;
}

struct PeltRun {
  std::vector<std::size_t> changepoints;
  double objective = 0.0;
};

// Pruned optimal-partitioning recursion F(t) = min_s F(s) + C[s, t) + beta with F(0) = -beta.
// A candidate s is dropped once F(s) + C[s, t) + slack > F(t); the drop takes effect m steps
// later because t is not yet a legal last changepoint for the next m - 1 endpoints.
inline PeltRun pelt_pass(const CostFunction& cost, double beta, bool prune) {
  const std::size_t n = cost.size();
  const std::size_t m = cost.min_length();
  const double inf = std::numeric_limits<double>::infinity();
  constexpr std::size_t never = std::numeric_limits<std::size_t>::max();
  const double slack = cost.augmented() ? -std::log(static_cast<double>(n)) : 0.0;

  std::vector<double> F(n + 1, inf);
  std::vector<std::size_t> last(n + 1, 0);
  F[0] = -beta;

  struct Candidate {
    std::size_t s;
    std::size_t expires;
  };
  std::vector<Candidate> candidates{{0, never}};
  std::vector<double> values;
  for (std::size_t t = m; t <= n; ++t) {
    std::erase_if(candidates, [t](const Candidate& c) { return t >= c.expires; });
    double best = inf;
    std::size_t arg = 0;
    values.assign(candidates.size(), inf);
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      const std::size_t s = candidates[c].s;
      if (t - s < m) continue;
      const double v = F[s] + cost(s, t) + beta;
      values[c] = v;
      if (v < best) {
        best = v;
        arg = s;
      }
    }
    F[t] = best;
    last[t] = arg;
    if (prune) {
      for (std::size_t c = 0; c < candidates.size(); ++c) {
        if (values[c] < inf && values[c] - beta + slack > F[t]) {
          candidates[c].expires = std::min(candidates[c].expires, t + m);
        }
      }
    }
    if (t + m <= n) candidates.push_back({t, never});
  }

  PeltRun run;
  run.objective = F[n];
  for (std::size_t t = n; t > 0;) {
    const std::size_t s = last[t];
    if (s > 0) run.changepoints.push_back(s - 1);
    t = s;
  }
  std::reverse(run.changepoints.begin(), run.changepoints.end());
  return run;
}

}  // namespace detail

/// Exact penalised segmentation by pruned dynamic programming. If any segment variance hits
/// the floor the pruning bound no longer holds, so the search reruns unpruned.
inline Segmentation pelt(std::span<const double> x, CostKind model, const PenaltySpec& penalty,
                         const CostOptions& options = {}) {
  detail::check_length(x.size(), model, "pelt");
  const double beta = penalty_value(penalty, x.size(), model);
  const CostFunction cost(x, model, penalty.augments_cost(), options);
  if (std::isinf(beta)) {
    return detail::finish("pelt", x, model, penalty, beta, {}, cost(0, x.size()), cost.floored());
  }
  auto run = detail::pelt_pass(cost, beta, true);
  if (cost.floored()) run = detail::pelt_pass(cost, beta, false);
  return detail::finish("pelt", x, model, penalty, beta, std::move(run.changepoints), run.objective,
                        cost.floored());
}

/// Greedy binary segmentation: split wherever the cost reduction is largest, accept while the
/// reduction exceeds the penalty, stop after q_max changepoints. Ties go to the smallest index.
inline Segmentation binseg(std::span<const double> x, CostKind model, const PenaltySpec& penalty,
                           int q_max, const CostOptions& options = {}) {
  if (q_max < 1) fail(ErrorKind::parameter, "binseg: q_max must be >= 1");
  detail::check_length(x.size(), model, "binseg");
  const double beta = penalty_value(penalty, x.size(), model);
  const CostFunction cost(x, model, penalty.augments_cost(), options);
  const std::size_t m = cost.min_length();

  struct Range {
    std::size_t begin, end;
    double cost;
  };
  std::vector<Range> ranges{{0, x.size(), cost(0, x.size())}};
  std::vector<std::size_t> cps;
  while (static_cast<int>(cps.size()) < q_max) {
    double best_gain = -std::numeric_limits<double>::infinity();
    std::size_t best_split = 0;
    std::size_t best_range = 0;
    for (std::size_t r = 0; r < ranges.size(); ++r) {
      const auto& rg = ranges[r];
      if (rg.end - rg.begin < 2 * m) continue;
      for (std::size_t split = rg.begin + m; split + m <= rg.end; ++split) {
        const double gain = rg.cost - cost(rg.begin, split) - cost(split, rg.end);
        if (gain > best_gain || (gain == best_gain && split < best_split)) {
          best_gain = gain;
          best_split = split;
          best_range = r;
        }
      }
    }
    if (!(best_gain > beta)) break;
    const Range parent = ranges[best_range];
    ranges[best_range] = {parent.begin, best_split, cost(parent.begin, best_split)};
    ranges.push_back({best_split, parent.end, cost(best_split, parent.end)});
    cps.push_back(best_split - 1);
  }
  std::sort(ranges.begin(), ranges.end(), [](const Range& a, const Range& b) { return a.begin < b.begin; });
  double objective = -beta;
  for (const auto& rg : ranges) objective = objective + rg.cost + beta;
  return detail::finish("binseg", x, model, penalty, beta, std::move(cps), objective, cost.floored());
}

inline constexpr std::size_t kOracleMaxLength = 40;

/// Brute-force global optimum over every segmentation with at most max_k changepoints.
/// Same cost function and accumulation order as pelt. Test oracle; n <= 40.
inline Segmentation exact_oracle(std::span<const double> x, CostKind model, const PenaltySpec& penalty,
                                 int max_k, const CostOptions& options = {}) {
  if (x.size() > kOracleMaxLength) {
    fail(ErrorKind::size, "exact_oracle: series length " + std::to_string(x.size()) + " exceeds " +
                              std::to_string(kOracleMaxLength));
  }
  if (max_k < 0) fail(ErrorKind::parameter, "exact_oracle: max_k must be >= 0");
  detail::check_length(x.size(), model, "exact_oracle");
  const double beta = penalty_value(penalty, x.size(), model);
  const CostFunction cost(x, model, penalty.augments_cost(), options);
  const std::size_t n = x.size();
  const std::size_t m = cost.min_length();
  if (std::isinf(beta)) {
    return detail::finish("oracle", x, model, penalty, beta, {}, cost(0, n), cost.floored());
  }
  // Mean-model costs (with or without the log-length term) are non-negative, so a partial objective that already reaches the
  // incumbent cannot improve on it.
  const bool bound = model == CostKind::mean;

  double best = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> best_cps;
  std::vector<std::size_t> path;

  auto search = [&](auto&& self, std::size_t begin, double partial) -> void {
    if (bound && partial >= best) return;
    // Close the final segment.
    if (n - begin >= m) {
      const double total = partial + cost(begin, n) + beta;
      if (total < best) {
        best = total;
        best_cps = path;
      }
    }
    if (static_cast<int>(path.size()) >= max_k) return;
    for (std::size_t end = begin + m; end + m <= n; ++end) {
      path.push_back(end - 1);
      self(self, end, partial + cost(begin, end) + beta);
      path.pop_back();
    }
  };
  search(search, 0, -beta);
  return detail::finish("oracle", x, model, penalty, beta, std::move(best_cps), best, cost.floored());
}

inline Segmentation pelt(const DailySeries& s, CostKind model, const PenaltySpec& penalty,
                         const CostOptions& options = {}) {
  return pelt(s.span(), model, penalty, options);
}

inline Segmentation binseg(const DailySeries& s, CostKind model, const PenaltySpec& penalty, int q_max,
                           const CostOptions& options = {}) {
  return binseg(s.span(), model, penalty, q_max, options);
}

}  // namespace regimecast::changepoint
