#include <gtest/gtest.h>

#include <cmath>

#include "regimecast/random.hpp"
#include "regimecast/regression.hpp"
#include "regimecast/synth.hpp"

using namespace regimecast;
using namespace regimecast::regression;

namespace {

const std::vector<double> kTableCoefs{15.09774, 0.40327, 13.87507, 7.90718, 6.72668};

DailySeries series(std::vector<double> v, const char* start = "2020-04-09") { return {parse_date(start), std::move(v)}; }

DesignMatrix random_design(Rng& rng, std::size_t n, std::size_t k) {
  DesignMatrix X;
  X.start = parse_date("2020-01-01");
  X.values.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k));
  for (std::size_t j = 0; j < k; ++j) X.labels.push_back("x" + std::to_string(j));
  for (std::size_t i = 0; i < n; ++i) {
    X.values(static_cast<Eigen::Index>(i), 0) = 1.0;
    for (std::size_t j = 1; j < k; ++j) X.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rng.normal(0, 1 + j);
  }
  return X;
}

// Normal equations by Gauss-Jordan elimination with partial pivoting, no Eigen.
std::vector<double> normal_equations(const DesignMatrix& X, const std::vector<double>& y) {
  const std::size_t n = X.rows(), k = X.cols();
  std::vector<std::vector<double>> a(k, std::vector<double>(k + 1, 0.0));
  for (std::size_t r = 0; r < k; ++r) {
    for (std::size_t c = 0; c < k; ++c) {
      for (std::size_t i = 0; i < n; ++i) a[r][c] += X.values(i, r) * X.values(i, c);
    }
    for (std::size_t i = 0; i < n; ++i) a[r][k] += X.values(i, r) * y[i];
  }
  for (std::size_t c = 0; c < k; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < k; ++r) {
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    }
    std::swap(a[c], a[piv]);
    for (std::size_t r = 0; r < k; ++r) {
      if (r == c) continue;
      const double f = a[r][c] / a[c][c];
      for (std::size_t j = c; j <= k; ++j) a[r][j] -= f * a[c][j];
    }
  }
  std::vector<double> beta(k);
  for (std::size_t r = 0; r < k; ++r) beta[r] = a[r][k] / a[r][r];
  return beta;
}

// y = 2 + 0.5 x + eta with ARMA(1,1)-style errors.
std::pair<DesignMatrix, std::vector<double>> arma_data(std::uint64_t seed, std::size_t n, double phi, double theta) {
  Rng rng(seed);
  std::vector<double> x(n), y(n);
  double eta = 0, prev_e = 0;
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = 10.0 + 5.0 * std::sin(static_cast<double>(i) / 15.0) + rng.normal();
    const double e = rng.normal();
    eta = phi * eta + e + theta * prev_e;
    prev_e = e;
    y[i] = 2.0 + 0.5 * x[i] + eta;
  }
  return {build_design(series(x), {}), y};
}

}  // namespace

TEST(BuildDesign, StepDummyAfterDayThree) {
  const auto s = series({1, 2, 3, 4, 5, 7});
  const auto X = build_design(s, {add_days(s.start, 3)});
  ASSERT_EQ(X.cols(), 3u);
  EXPECT_EQ(X.labels, (std::vector<std::string>{"intercept", "hosp", "cp1"}));
  for (int i = 0; i < 6; ++i) {
    EXPECT_EQ(X.values(i, 0), 1.0);
    EXPECT_EQ(X.values(i, 2), i >= 3 ? 1.0 : 0.0);
  }
}

TEST(BuildDesign, BaselineAndPaperShapes) {
  std::vector<double> h(60);
  for (std::size_t i = 0; i < h.size(); ++i) h[i] = static_cast<double>(i * i % 17);
  const auto s = series(h);
  EXPECT_EQ(build_design(s, {}).cols(), 2u);
  const auto X = build_design(s, {add_days(s.start, 10), add_days(s.start, 30), add_days(s.start, 50)});
  EXPECT_EQ(X.cols(), 5u);
  EXPECT_EQ(X.labels.back(), "cp3");
}

TEST(BuildDesign, DayZeroOrOutsideOrUnorderedIsDesignError) {
  const auto s = series({1, 2, 3, 4, 5, 7});
  for (const auto& starts : std::vector<std::vector<Date>>{{s.start},
                                                            {add_days(s.start, 9)},
                                                            {add_days(s.start, 4), add_days(s.start, 2)}}) {
    try {
      build_design(s, starts);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::design);
    }
  }
  // Exogenous column identical to a dummy column.
  try {
    build_design(series({0, 0, 0, 1, 1, 1}), {add_days(s.start, 3)});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::design);
  }
}

TEST(Split, PaperSizes) {
  Rng rng(1);
  const auto X = random_design(rng, 267, 5);
  const std::vector<double> y(267, 1.0);
  const auto [train, test] = split_chronological(y, X, 0.8);
  EXPECT_EQ(train.y.size(), 214u);
  EXPECT_EQ(test.y.size(), 53u);
  EXPECT_EQ(train.X.rows(), 214u);
  EXPECT_EQ(test.X.start, add_days(X.start, 214));
}

TEST(Split, HalfAndBadFractions) {
  Rng rng(1);
  const auto X = random_design(rng, 10, 2);
  const std::vector<double> y(10, 1.0);
  const auto [train, test] = split_chronological(y, X, 0.5);
  EXPECT_EQ(train.y.size(), 5u);
  EXPECT_EQ(test.y.size(), 5u);
  for (double f : {0.0, 1.0, -0.1, 1.5}) {
    try {
      split_chronological(y, X, f);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::parameter);
    }
  }
  try {
    split_chronological(y, X, 0.3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::size);
  }
}

TEST(FitOls, MatchesNormalEquationsOnRandomDesigns) {
  Rng rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t k = 2 + static_cast<std::size_t>(trial % 5);
    const std::size_t n = 20 + static_cast<std::size_t>(trial);
    const auto X = random_design(rng, n, k);
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = rng.normal(0, 2);
      for (std::size_t j = 0; j < k; ++j) y[i] += static_cast<double>(j + 1) * X.values(i, j);
    }
    const auto fit = fit_ols(X, y);
    const auto ref = normal_equations(X, y);
    for (std::size_t j = 0; j < k; ++j) {
      EXPECT_NEAR(fit.coefficients[j], ref[j], 1e-8 * std::max(1.0, std::abs(ref[j]))) << trial;
    }
  }
}

TEST(FitOls, RecoversTableCoefficientsWithoutNoise) {
  std::vector<double> h(120);
  for (std::size_t i = 0; i < h.size(); ++i) h[i] = 40.0 + 30.0 * std::sin(static_cast<double>(i) / 9.0);
  const auto s = series(h);
  const auto X = build_design(s, {add_days(s.start, 30), add_days(s.start, 60), add_days(s.start, 90)});
  std::vector<double> y(h.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    for (std::size_t j = 0; j < 5; ++j) y[i] += kTableCoefs[j] * X.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  const auto fit = fit_ols(X, y);
  for (std::size_t j = 0; j < 5; ++j) EXPECT_NEAR(fit.coefficients[j], kTableCoefs[j], 1e-8);
  EXPECT_NEAR(fit.residual_standard_error, 0.0, 1e-8);
}

TEST(FitOls, TwoPointsAndConstant) {
  const auto fit = fit_ols(build_design(series({0, 1}), {}), std::vector<double>{1, 3});
  EXPECT_NEAR(fit.coefficients[0], 1.0, 1e-12);
  EXPECT_NEAR(fit.coefficients[1], 2.0, 1e-12);
  EXPECT_EQ(fit.df, 0.0);
  EXPECT_TRUE(std::isnan(fit.residual_standard_error));

  DesignMatrix X;
  X.values = Eigen::MatrixXd::Ones(5, 1);
  X.labels = {"intercept"};
  const auto c = fit_ols(X, std::vector<double>(5, 4.25));
  EXPECT_NEAR(c.coefficients[0], 4.25, 1e-12);
  EXPECT_NEAR(c.residual_standard_error, 0.0, 1e-12);
}

TEST(FitOls, DegreesOfFreedomMatchTable) {
  synth::DgpSpec spec;
  spec.seed = 3;
  const auto dgp = synth::gen_regression_dgp(spec);
  const auto X = build_design(dgp.hosp_smoothed, dgp.regime_starts);
  const auto [train, test] = split_chronological(dgp.calls.values, X, 0.8);
  const auto fit = fit_ols(train.X, train.y);
  EXPECT_EQ(train.y.size(), 214u);
  EXPECT_EQ(fit.df, 209.0);
  EXPECT_EQ(fit.order, (ArmaOrder{0, 0, 0}));
}

TEST(FitOls, DummyShiftIdentity) {
  Rng rng(4);
  std::vector<double> h(80), y(80);
  for (std::size_t i = 0; i < h.size(); ++i) h[i] = rng.normal(30, 8);
  const auto s = series(h);
  const auto X = build_design(s, {add_days(s.start, 25), add_days(s.start, 55)});
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = 5 + 0.3 * h[i] + rng.normal(0, 2);
  const auto before = fit_ols(X, y);
  auto shifted = y;
  for (std::size_t i = 55; i < shifted.size(); ++i) shifted[i] += 7.5;
  const auto after = fit_ols(X, shifted);
  for (std::size_t j = 0; j < 4; ++j) {
    EXPECT_NEAR(after.coefficients[j] - before.coefficients[j], j == 3 ? 7.5 : 0.0, 1e-8) << j;
  }
}

TEST(FitArma, ZeroOrderEqualsOls) {
  auto [X, y] = arma_data(5, 100, 0.0, 0.0);
  const auto a = fit_arma_errors(X, y, {0, 0, 0});
  const auto b = fit_ols(X, y);
  EXPECT_EQ(a.coefficients, b.coefficients);
  EXPECT_EQ(a.aicc, b.aicc);
}

TEST(FitArma, RecoversAr1) {
  auto [X, y] = arma_data(11, 500, 0.6, 0.0);
  const auto fit = fit_arma_errors(X, y, {1, 0, 0});
  ASSERT_EQ(fit.phi.size(), 1u);
  EXPECT_GE(fit.phi[0], 0.5);
  EXPECT_LE(fit.phi[0], 0.7);
  EXPECT_NEAR(fit.coefficients[1], 0.5, 0.1);
}

TEST(FitArma, RecoversMa1) {
  auto [X, y] = arma_data(12, 500, 0.0, 0.5);
  const auto fit = fit_arma_errors(X, y, {0, 0, 1});
  ASSERT_EQ(fit.theta.size(), 1u);
  EXPECT_GE(fit.theta[0], 0.38);
  EXPECT_LE(fit.theta[0], 0.62);
}

TEST(FitArma, DifferencedFitRestoresLevel) {
  auto [X, y] = arma_data(13, 200, 0.5, 0.0);
  const auto fit = fit_arma_errors(X, y, {1, 1, 0});
  EXPECT_FALSE(fit.std_errors[0].has_value());
  const auto yhat = predict(fit, X);
  double mean_resid = 0;
  for (std::size_t i = 0; i < y.size(); ++i) mean_resid += y[i] - yhat[i];
  EXPECT_NEAR(mean_resid / static_cast<double>(y.size()), 0.0, 1e-9);
}

TEST(FitArma, RejectsBadOrders) {
  auto [X, y] = arma_data(5, 50, 0.0, 0.0);
  EXPECT_THROW(fit_arma_errors(X, y, {3, 0, 0}), Error);
  EXPECT_THROW(fit_arma_errors(X, y, {0, 2, 0}), Error);
}

TEST(Stepwise, StrongAr1SelectsAutoregression) {
  int hits = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto [X, y] = arma_data(200 + seed, 214, 0.8, 0.0);
    const auto fit = stepwise_select(X, y);
    hits += fit.order.p >= 1 || fit.order.d == 1;
  }
  EXPECT_EQ(hits, 10);
}

TEST(Stepwise, SelectedIsGridMinimum) {
  auto [X, y] = arma_data(21, 150, 0.4, 0.3);
  const auto sel = stepwise_search(X, y);
  EXPECT_EQ(sel.grid.size(), 18u);
  for (const auto& cell : sel.grid) {
    if (cell.fit) {
      EXPECT_LE(sel.best.aicc, cell.fit->aicc) << to_string(cell.order);
    }
  }
}

TEST(Stepwise, NearUnitRootFitsAreDiscarded) {
  int white = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto [X, y] = arma_data(300 + seed, 214, 0.0, 0.0);
    const auto sel = stepwise_search(X, y);
    for (const auto& cell : sel.grid) {
      if (!cell.fit) continue;
      EXPECT_TRUE(regression::detail::ar_stationary(cell.fit->phi, 1.01)) << to_string(cell.order);
      EXPECT_TRUE(regression::detail::ma_invertible(cell.fit->theta, 1.01)) << to_string(cell.order);
    }
    white += sel.best.order == ArmaOrder{0, 0, 0};
  }
  EXPECT_GE(white, 10);
}

TEST(Stepwise, FeasibilityFallbackOnTinySample) {
  std::vector<double> h{3, 1, 4, 1, 5, 9, 2, 6, 5};
  const auto s = series(h);
  const auto X = build_design(s, {add_days(s.start, 3), add_days(s.start, 5), add_days(s.start, 7)});
  std::vector<double> y{2, 3, 1, 8, 9, 14, 12, 20, 18};
  const auto sel = stepwise_search(X, y);
  bool some_failed = false;
  for (const auto& c : sel.grid) some_failed |= !c.fit.has_value();
  EXPECT_TRUE(some_failed);
  EXPECT_EQ(sel.best.coefficients.size(), 5u);
}

TEST(Predict, TableCoefficientsRow) {
  RegimeModelFit fit;
  fit.labels = {"intercept", "hosp", "cp1", "cp2", "cp3"};
  fit.coefficients = kTableCoefs;
  DesignMatrix X;
  X.labels = fit.labels;
  X.values.resize(3, 5);
  X.values.row(0) << 1, 50, 1, 1, 1;
  X.values.row(1) << 1, 0, 0, 0, 0;
  X.values.row(2) << 1, 51, 1, 1, 1;
  const auto yhat = predict(fit, X);
  EXPECT_NEAR(yhat[0], 15.09774 + 0.40327 * 50 + 13.87507 + 7.90718 + 6.72668, 1e-12);
  EXPECT_NEAR(yhat[0], 63.77, 5e-3);
  EXPECT_DOUBLE_EQ(yhat[1], 15.09774);
  EXPECT_NEAR(yhat[2] - yhat[0], 0.40327, 1e-12);
  EXPECT_NEAR(1.0 / 0.40327, 2.48, 5e-3);

  X.labels[2] = "other";
  try {
    predict(fit, X);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::design);
  }
}

TEST(Evaluate, PerfectPredictions) {
  auto [X, y] = arma_data(1, 40, 0.0, 0.0);
  const auto fit = fit_ols(X, y);
  const auto yhat = predict(fit, X);
  const auto Xa = X.middle_rows(0, 30), Xb = X.middle_rows(30, 10);
  const std::vector<double> ta(yhat.begin(), yhat.begin() + 30), tb(yhat.begin() + 30, yhat.end());
  const auto m = evaluate(fit, Xb, tb, tb, ta, Xa);
  EXPECT_NEAR(m.r_squared_train, 1.0, 1e-12);
  EXPECT_NEAR(m.r_squared_test, 1.0, 1e-12);
  EXPECT_NEAR(m.mse_test, 0.0, 1e-20);
}

TEST(Evaluate, RawAndSmoothedBases) {
  auto [X, y] = arma_data(2, 60, 0.0, 0.0);
  const auto [train, test] = split_chronological(y, X, 0.8);
  const auto fit = fit_ols(train.X, train.y);
  std::vector<double> raw = test.y;
  raw[0] += 10.0;
  const auto m = evaluate(fit, test.X, raw, test.y, train.y, train.X);
  const auto yhat = predict(fit, test.X);
  double sq = 0, mean = 0;
  std::vector<double> e(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    e[i] = raw[i] - yhat[i];
    sq += e[i] * e[i];
    mean += e[i];
  }
  mean /= static_cast<double>(e.size());
  double ss = 0;
  for (double v : e) ss += (v - mean) * (v - mean);
  EXPECT_NEAR(m.mse_test, sq / static_cast<double>(e.size()), 1e-12);
  EXPECT_NEAR(*m.pred_residual_se, std::sqrt(ss / static_cast<double>(e.size() - 1)), 1e-12);
  EXPECT_NEAR(m.r_squared_test, r_squared(test.y, yhat), 1e-15);
  EXPECT_GE(m.r_squared_train, 0.0);
  EXPECT_LE(m.r_squared_train, 1.0);
}

TEST(Evaluate, ZeroVarianceTargetIsUndefined) {
  try {
    r_squared(std::vector<double>{2, 2, 2}, std::vector<double>{1, 2, 3});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::undefined);
  }
}
