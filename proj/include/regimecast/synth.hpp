#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <cstdio>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "regimecast/date.hpp"
#include "regimecast/error.hpp"
#include "regimecast/ingest.hpp"
#include "regimecast/random.hpp"
#include "regimecast/series.hpp"

namespace regimecast::synth {

/// Piecewise-normal regimes: segment i has lengths[i] days of N(means[i], sds[i]^2).
struct RegimeSpec {
  Date start = parse_date("2019-01-01");
  std::vector<std::size_t> lengths;
  std::vector<double> means;
  std::vector<double> sds;
  std::uint64_t seed = 0;
  bool round_to_int = false;
};

namespace detail {

inline void validate(const RegimeSpec& spec) {
  std::vector<std::string> problems;
  if (spec.lengths.empty()) problems.push_back("lengths: at least one segment required");
  if (spec.means.size() != spec.lengths.size()) problems.push_back("means: size differs from lengths");
  if (spec.sds.size() != spec.lengths.size()) problems.push_back("sds: size differs from lengths");
  for (std::size_t i = 0; i < spec.lengths.size(); ++i) {
    if (spec.lengths[i] < 2) problems.push_back("lengths[" + std::to_string(i) + "]: must be >= 2");
  }
  for (std::size_t i = 0; i < spec.sds.size(); ++i) {
    if (!(spec.sds[i] > 0.0)) problems.push_back("sds[" + std::to_string(i) + "]: must be > 0");
  }
  if (!problems.empty()) {
    std::string msg = "invalid regime spec:";
    for (const auto& p : problems) msg += " " + p + ";";
    fail(ErrorKind::validation, msg);
  }
}

}  // namespace detail

/// Segment i draws from its own stream derive_seed(seed, i), so segments can be generated
/// independently and in any order.
inline DailySeries gen_piecewise_normal(const RegimeSpec& spec) {
  detail::validate(spec);
  DailySeries out{spec.start, {}};
  for (std::size_t seg = 0; seg < spec.lengths.size(); ++seg) {
    Rng rng(derive_seed(spec.seed, seg));
    for (std::size_t i = 0; i < spec.lengths[seg]; ++i) {
      double v = rng.normal(spec.means[seg], spec.sds[seg]);
      if (spec.round_to_int) v = std::round(v);
      out.values.push_back(v);
    }
  }
  return out;
}

/// Non-pandemic admitted calls per day: 442 / 56 / 233 days starting 2019-01-01.
inline RegimeSpec paper_ems_regimes(std::uint64_t seed) {
  RegimeSpec spec;
  spec.start = parse_date("2019-01-01");
  spec.lengths = {442, 56, 233};
  spec.means = {225.69, 155.84, 169.53};
  spec.sds = {19.43, 20.23, 14.76};
  spec.seed = seed;
  return spec;
}

/// Four hospitalization regimes over 2020-04-09..2020-12-31. The defaults hold the level fixed
/// and alternate the SD by a factor of 8, which the variance cost (deviations about the
/// full-series mean) can localise.
struct HospLikeSpec {
  Date start = parse_date("2020-04-09");
  std::size_t length = 267;
  std::vector<std::size_t> offsets = {60, 131, 210};  // 2020-06-08, 2020-08-18, 2020-11-05
  std::vector<double> levels = {30.0, 30.0, 30.0, 30.0};
  std::vector<double> sds = {2.0, 16.0, 2.0, 16.0};
  std::uint64_t seed = 0;
};

inline DailySeries gen_hosp_like(const HospLikeSpec& spec) {
  if (spec.levels.size() != spec.offsets.size() + 1 || spec.sds.size() != spec.offsets.size() + 1) {
    fail(ErrorKind::validation, "hosp spec: need one level and one sd per regime");
  }
  std::vector<std::size_t> lengths;
  std::size_t prev = 0;
  for (std::size_t off : spec.offsets) {
    if (off <= prev || off >= spec.length) fail(ErrorKind::validation, "hosp spec: offsets must increase inside the window");
    lengths.push_back(off - prev);
    prev = off;
  }
  lengths.push_back(spec.length - prev);
  RegimeSpec regimes;
  regimes.start = spec.start;
  regimes.lengths = std::move(lengths);
  regimes.means = spec.levels;
  regimes.sds = spec.sds;
  regimes.seed = spec.seed;
  return gen_piecewise_normal(regimes);
}

inline DailySeries gen_hosp_like(std::uint64_t seed) {
  HospLikeSpec spec;
  spec.seed = seed;
  return gen_hosp_like(spec);
}

/// A Gaussian-shaped epidemic wave added to the baseline.
struct Wave {
  double center = 0.0;  // day offset of the peak
  double amplitude = 0.0;
  double width = 1.0;  // standard deviation in days
};

/// Smooth multi-wave admissions curve with count-like noise (SD = noise_scale * sqrt(level)),
/// truncated at zero.
struct WaveSpec {
  Date start = parse_date("2020-04-09");
  std::size_t length = 267;
  double baseline = 15.0;
  std::vector<Wave> waves = {{90.0, 60.0, 20.0}, {215.0, 60.0, 22.0}};
  double noise_scale = 1.0;
  std::uint64_t seed = 0;
};

inline DailySeries gen_waves(const WaveSpec& spec) {
  if (spec.length == 0) fail(ErrorKind::validation, "wave spec: length must be positive");
  if (!(spec.noise_scale >= 0.0)) fail(ErrorKind::validation, "wave spec: noise_scale must be >= 0");
  Rng rng(spec.seed);
  DailySeries out{spec.start, std::vector<double>(spec.length)};
  for (std::size_t t = 0; t < spec.length; ++t) {
    double level = spec.baseline;
    for (const auto& w : spec.waves) {
      const double z = (static_cast<double>(t) - w.center) / w.width;
      level += w.amplitude * std::exp(-0.5 * z * z);
    }
    const double noise = rng.normal() * spec.noise_scale * std::sqrt(std::max(level, 0.0));
    out.values[t] = std::max(level + noise, 0.0);
  }
  return out;
}

/// Regime-dummy regression data: calls = b0 + bh * smoothed_hosp + sum_j g_j * 1[t >= offset_j]
/// + N(0, noise_sd^2). The defaults carry the published fit; offsets put four balanced regimes
/// inside an 80% training window.
struct DgpSpec {
  std::vector<double> coefficients = {15.09774, 0.40327, 13.87507, 7.90718, 6.72668};
  std::vector<std::size_t> offsets = {30, 100, 165};
  double noise_sd = 6.619;
  int window = 7;
  std::uint64_t seed = 0;
  WaveSpec exogenous{};
};

struct DgpSample {
  DailySeries hosp_raw;
  DailySeries hosp_smoothed;
  DailySeries calls;
  std::vector<Date> regime_starts;  // first day of each post-change regime
};

inline DgpSample gen_regression_dgp(const DgpSpec& spec) {
  if (spec.coefficients.size() != spec.offsets.size() + 2) {
    fail(ErrorKind::validation, "dgp spec: need intercept, slope and one offset coefficient per changepoint");
  }
  if (!(spec.noise_sd >= 0.0)) fail(ErrorKind::validation, "dgp spec: noise_sd must be >= 0");
  for (std::size_t j = 0; j < spec.offsets.size(); ++j) {
    if (spec.offsets[j] == 0 || spec.offsets[j] >= spec.exogenous.length ||
        (j > 0 && spec.offsets[j] <= spec.offsets[j - 1])) {
      fail(ErrorKind::validation, "dgp spec: offsets must increase strictly inside the window");
    }
  }
  WaveSpec exog = spec.exogenous;
  exog.seed = derive_seed(spec.seed, 0);
  DgpSample out;
  out.hosp_raw = gen_waves(exog);
  out.hosp_smoothed = moving_average(out.hosp_raw, spec.window);
  Rng noise(derive_seed(spec.seed, 1));
  out.calls = DailySeries{exog.start, std::vector<double>(exog.length)};
  for (std::size_t t = 0; t < exog.length; ++t) {
    double mean = spec.coefficients[0] + spec.coefficients[1] * out.hosp_smoothed.values[t];
    for (std::size_t j = 0; j < spec.offsets.size(); ++j) {
      if (t >= spec.offsets[j]) mean += spec.coefficients[j + 2];
    }
    out.calls.values[t] = mean + noise.normal() * spec.noise_sd;
  }
  for (std::size_t off : spec.offsets) out.regime_starts.push_back(out.calls.date_at(off));
  return out;
}

/// INAR(1): X_t = alpha o X_{t-1} + e_t, with binomial thinning alpha o X ~ Bin(X, alpha) and
/// Poisson(lambda) innovations. X_0 ~ Poisson(lambda / (1 - alpha)) when alpha < 1.
inline DailySeries simulate_inar1(double alpha, double lambda, std::size_t n, std::uint64_t seed,
                                  Date start = parse_date("2020-01-01")) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) fail(ErrorKind::domain, "simulate_inar1: alpha must lie in [0, 1]");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) fail(ErrorKind::domain, "simulate_inar1: lambda must be >= 0");
  DailySeries out{start, std::vector<double>(n)};
  if (n == 0) return out;
  Rng rng(seed);
  std::int64_t x = alpha < 1.0 ? rng.poisson(lambda / (1.0 - alpha)) : rng.poisson(lambda);
  out.values[0] = static_cast<double>(x);
  for (std::size_t t = 1; t < n; ++t) {
    x = rng.binomial(x, alpha) + rng.poisson(lambda);
    out.values[t] = static_cast<double>(x);
  }
  return out;
}

struct ProblemRate {
  std::string name;
  double period1_mean = 0.0;  // admitted calls per day
  double period3_mean = 0.0;
};

/// Median and mean of a lognormal response interval, in minutes.
struct IntervalShape {
  double mean = 1.0;
  double median = 1.0;
};

struct HospitalProfile {
  std::string name;
  IntervalShape assignment;
  IntervalShape dispatch;
  IntervalShape arrival;
};

/// Incident table over 2019-01-01..2020-12-31 with the published per-problem daily means
/// (Period 2 sits halfway between Periods 1 and 3) and per-hospital response times.
struct IncidentSynthSpec {
  Date start = parse_date("2019-01-01");
  std::size_t days = 731;
  Date period2_start = parse_date("2020-03-18");
  Date period3_start = parse_date("2020-05-13");
  std::vector<ProblemRate> problems = {
      {"Cardiac Arrest", 4.03, 4.54},       {"Psychiatric", 16.52, 17.49},
      {"Stroke", 6.51, 6.55},               {"Abdominal Pain", 7.65, 7.51},
      {"Alarm Activation", 8.52, 8.23},     {"Assault", 17.86, 18.45},
      {"Injury", 10.67, 10.24},             {"Overdose", 12.16, 11.42},
      {"Diabetic", 4.91, 4.45},             {"Altered Mentation", 20.90, 14.15},
      {"Attended Patient", 10.43, 6.63},    {"Chest Pain", 19.17, 11.10},
      {"Community Health Assist", 11.56, 8.06}, {"Fall", 30.47, 27.27},
      {"Hemorrhage", 8.51, 6.48},           {"Respiratory", 24.83, 16.19},
      {"Seizure", 15.18, 12.91},            {"Sick", 31.78, 14.79},
      {"Syncopal Episode", 8.66, 6.62},     {"Traffic Injury", 27.39, 21.37},
      {"Unconscious", 9.46, 7.68}};
  double pandemic_mean = 20.0;  // admitted pandemic calls per day from period2_start
  double defunct_share = 0.32;
  std::vector<HospitalProfile> hospitals = {
      {"Dell Seton Med Ctr", {1.16, 1.03}, {0.98, 1.00}, {6.34, 5.57}},
      {"North Austin Hospital", {1.22, 1.08}, {1.07, 1.08}, {6.97, 6.20}},
      {"Saint Davids Med Ctr", {1.22, 1.08}, {1.01, 1.03}, {6.61, 5.88}},
      {"Seton Med Ctr", {1.23, 1.08}, {1.04, 1.07}, {7.02, 6.27}},
      {"Seton Northwest", {1.26, 1.12}, {1.11, 1.13}, {6.79, 6.07}},
      {"South Austin Hospital", {1.17, 1.05}, {1.04, 1.07}, {7.17, 6.30}}};
  double hospital_share = 0.7;  // of admitted calls; the rest are referred or treated on scene
  std::uint64_t seed = 0;
};

namespace detail {

inline double draw_interval(Rng& rng, const IntervalShape& shape) {
  const double ratio = shape.mean / shape.median;
  const double sigma = std::sqrt(std::max(2.0 * std::log(std::max(ratio, 1.0)), 0.0025));
  return shape.median * std::exp(sigma * rng.normal());
}

}  // namespace detail

/// Day d, problem j uses stream derive_seed(seed, d * (problems + 1) + j); the pandemic
/// stream takes j = problems.
inline std::vector<ingest::IncidentRecord> gen_incidents(const IncidentSynthSpec& spec) {
  if (spec.hospitals.empty()) fail(ErrorKind::validation, "incident spec: at least one hospital required");
  if (!(spec.defunct_share >= 0.0 && spec.defunct_share < 1.0)) {
    fail(ErrorKind::validation, "incident spec: defunct_share must lie in [0, 1)");
  }
  static constexpr std::array<const char*, 7> defunct = {"Call Cancelled",   "No Patient", "Other",
                                                         "Refusal",          "Duplicate Call",
                                                         "False Alarm Call", "Information Call Only"};
  std::vector<ingest::IncidentRecord> out;
  const std::size_t streams = spec.problems.size() + 1;
  std::size_t serial = 0;
  for (std::size_t d = 0; d < spec.days; ++d) {
    const Date day = add_days(spec.start, static_cast<long long>(d));
    const int period = day < spec.period2_start ? 1 : (day < spec.period3_start ? 2 : 3);
    for (std::size_t j = 0; j < streams; ++j) {
      Rng rng(derive_seed(spec.seed, d * streams + j));
      double admitted_mean = 0.0;
      std::string problem;
      if (j < spec.problems.size()) {
        const auto& pr = spec.problems[j];
        problem = pr.name;
        admitted_mean = period == 1   ? pr.period1_mean
                        : period == 3 ? pr.period3_mean
                                      : 0.5 * (pr.period1_mean + pr.period3_mean);
      } else {
        problem = "Pandemic";
        admitted_mean = period == 1 ? 0.0 : spec.pandemic_mean;
      }
      const auto count = rng.poisson(admitted_mean / (1.0 - spec.defunct_share));
      for (std::int64_t c = 0; c < count; ++c) {
        ingest::IncidentRecord r;
        char key[32];
        std::snprintf(key, sizeof key, "S%08zu", serial++);
        r.primary_key = key;
        r.jurisdiction = "Austin";
        r.problem = problem;
        r.priority = 1 + static_cast<int>(rng.next() % 15);
        const auto pickup = ingest::Timestamp{std::chrono::sys_days{day}} +
                            std::chrono::seconds{static_cast<long long>(rng.next() % 86400)};
        const auto& hosp = spec.hospitals[rng.next() % spec.hospitals.size()];
        auto secs = [](double minutes) { return std::chrono::seconds{std::llround(minutes * 60.0)}; };
        r.t_phone_pickup = pickup;
        r.t_assigned = *r.t_phone_pickup + secs(detail::draw_interval(rng, hosp.assignment));
        r.t_enroute = *r.t_assigned + secs(detail::draw_interval(rng, hosp.dispatch));
        r.t_arrived = *r.t_enroute + secs(detail::draw_interval(rng, hosp.arrival));
        if (rng.uniform() < spec.defunct_share) {
          r.disposition = defunct[rng.next() % defunct.size()];
        } else if (rng.uniform() < spec.hospital_share) {
          r.disposition = "Transported to " + hosp.name;
        } else {
          r.disposition = rng.uniform() < 0.5 ? "Referred" : "Treated and Released";
        }
        r.longitude = -97.74 + 0.1 * rng.normal();
        r.latitude = 30.27 + 0.1 * rng.normal();
        out.push_back(std::move(r));
      }
    }
  }
  return out;
}

}  // namespace regimecast::synth
