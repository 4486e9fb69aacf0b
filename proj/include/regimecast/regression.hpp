#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "regimecast/date.hpp"
#include "regimecast/error.hpp"
#include "regimecast/optimize.hpp"
#include "regimecast/series.hpp"

namespace regimecast::regression {

/// Columns: intercept, smoothed exogenous series, then one step dummy per regime start.
struct DesignMatrix {
  Date start{};
  Eigen::MatrixXd values;
  std::vector<std::string> labels;

  std::size_t rows() const noexcept { return static_cast<std::size_t>(values.rows()); }
  std::size_t cols() const noexcept { return static_cast<std::size_t>(values.cols()); }

  DesignMatrix middle_rows(std::size_t begin, std::size_t count) const {
    return DesignMatrix{add_days(start, static_cast<long long>(begin)),
                        values.middleRows(static_cast<Eigen::Index>(begin), static_cast<Eigen::Index>(count)),
                        labels};
  }
};

/// Step dummy j is 1 from regime_starts[j] onwards. A regime start must be later than the first
/// day and no later than the last, otherwise the dummy is constant and the design loses rank.
inline DesignMatrix build_design(const DailySeries& exogenous, const std::vector<Date>& regime_starts) {
  if (exogenous.empty()) fail(ErrorKind::empty, "build_design: empty exogenous series");
  const std::size_t n = exogenous.size();
  const std::size_t k = regime_starts.size();
  DesignMatrix d;
  d.start = exogenous.start;
  d.values.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(2 + k));
  d.labels = {"intercept", "hosp"};
  for (std::size_t i = 0; i < n; ++i) {
    d.values(static_cast<Eigen::Index>(i), 0) = 1.0;
    d.values(static_cast<Eigen::Index>(i), 1) = exogenous.values[i];
  }
  for (std::size_t j = 0; j < k; ++j) {
    const Date date = regime_starts[j];
    if (j > 0 && date <= regime_starts[j - 1]) {
      fail(ErrorKind::design, "build_design: changepoint dates must be strictly increasing");
    }
    const auto idx = exogenous.index_of(date);
    if (!idx || *idx == 0) {
      fail(ErrorKind::design, "build_design: changepoint " + format_date(date) +
                                  " gives a constant dummy column (rank deficient)");
    }
    for (std::size_t i = 0; i < n; ++i) {
      d.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(2 + j)) = i >= *idx ? 1.0 : 0.0;
    }
    d.labels.push_back("cp" + std::to_string(j + 1));
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(d.values);
  if (static_cast<std::size_t>(qr.rank()) < d.cols()) {
    fail(ErrorKind::design, "build_design: design matrix is rank deficient (rank " +
                                std::to_string(qr.rank()) + " < " + std::to_string(d.cols()) + ")");
  }
  return d;
}

struct DataPart {
  DesignMatrix X;
  std::vector<double> y;
};

/// First round(fraction * n) rows train, the rest test. No shuffling.
inline std::pair<DataPart, DataPart> split_chronological(std::span<const double> y, const DesignMatrix& X,
                                                         double train_fraction) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    fail(ErrorKind::parameter, "split_chronological: train fraction must lie in (0, 1)");
  }
  if (X.rows() != y.size()) fail(ErrorKind::parameter, "split_chronological: X rows differ from y length");
  const std::size_t n = y.size();
  const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
  if (n_train < X.cols() + 2) {
    fail(ErrorKind::size, "split_chronological: " + std::to_string(n_train) + " training rows for " +
                              std::to_string(X.cols()) + " coefficients");
  }
  if (n_train >= n) fail(ErrorKind::size, "split_chronological: split leaves no test rows");
  DataPart train{X.middle_rows(0, n_train), {y.begin(), y.begin() + static_cast<std::ptrdiff_t>(n_train)}};
  DataPart test{X.middle_rows(n_train, n - n_train), {y.begin() + static_cast<std::ptrdiff_t>(n_train), y.end()}};
  return {std::move(train), std::move(test)};
}

struct ArmaOrder {
  int p = 0;
  int d = 0;
  int q = 0;

  int arma_params() const noexcept { return p + q; }
  friend bool operator==(const ArmaOrder&, const ArmaOrder&) = default;
};

inline std::string to_string(const ArmaOrder& o) {
  return "(" + std::to_string(o.p) + "," + std::to_string(o.d) + "," + std::to_string(o.q) + ")";
}

/// Regression with ARIMA(p, d, q) errors. Coefficients follow the design's labels.
struct RegimeModelFit {
  std::vector<std::string> labels;
  std::vector<double> coefficients;
  std::vector<std::optional<double>> std_errors;  // absent for the level of a differenced fit
  ArmaOrder order;
  std::vector<double> phi;
  std::vector<double> theta;
  double css = 0.0;                      // conditional sum of squared innovations
  std::size_t n_used = 0;                // innovations in the CSS
  double df = 0.0;                       // n_used minus estimated parameters
  double residual_standard_error = 0.0;  // sqrt(css / df)
  double aicc = 0.0;
  int estimated_parameters = 0;  // regression + ARMA, excluding the innovation variance
  int evaluations = 0;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, RegimeModelFit best)
      : Error(ErrorKind::convergence, what), best_(std::move(best)) {}
  const RegimeModelFit& best() const noexcept { return best_; }

 private:
  RegimeModelFit best_;
};

namespace detail {

/// Gaussian AICc from a conditional sum of squares over n innovations with K parameters
/// (including the variance).
inline double aicc_from_css(double css, std::size_t n, int K) {
  const double nd = static_cast<double>(n);
  const double sigma2 = css / nd;
  const double minus2ll = nd * (std::log(2.0 * std::numbers::pi * std::max(sigma2, 1e-300)) + 1.0);
  const double denom = nd - K - 1.0;
  if (denom <= 0.0) return std::numeric_limits<double>::infinity();
  return minus2ll + 2.0 * K + 2.0 * K * (K + 1.0) / denom;
}

struct LeastSquares {
  Eigen::VectorXd beta;
  Eigen::MatrixXd cov_unscaled;  // (X'X)^-1
  double rss = 0.0;
};

inline LeastSquares least_squares(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  const Eigen::Index k = X.cols();
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  if (qr.rank() < k) fail(ErrorKind::design, "least squares: singular X'X (rank deficient design)");
  LeastSquares ls;
  ls.beta = qr.solve(y);
  const Eigen::MatrixXd R = qr.matrixR().topLeftCorner(k, k).template triangularView<Eigen::Upper>();
  const Eigen::MatrixXd Rinv =
      R.template triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(k, k));
  const Eigen::MatrixXd inner = Rinv * Rinv.transpose();
  ls.cov_unscaled = qr.colsPermutation() * inner * qr.colsPermutation().transpose();
  ls.rss = (y - X * ls.beta).squaredNorm();
  return ls;
}

// Roots of 1 - phi_1 z - phi_2 z^2 lie outside |z| = r iff the unit-circle test passes on
// (phi_1 r, phi_2 r^2).
inline bool ar_stationary(std::span<const double> phi, double r = 1.0) {
  if (phi.empty()) return true;
  if (phi.size() == 1) return std::fabs(phi[0] * r) < 1.0;
  const double a = phi[0] * r, b = phi[1] * r * r;
  return a + b < 1.0 && b - a < 1.0 && std::fabs(b) < 1.0;
}

inline bool ma_invertible(std::span<const double> theta, double r = 1.0) {
  std::vector<double> neg(theta.begin(), theta.end());
  for (auto& v : neg) v = -v;
  return ar_stationary(neg, r);
}

/// Innovations of an ARMA(p, q) filter with zero pre-sample values:
/// w_t = z_t - sum phi_i z_{t-i} - sum theta_j w_{t-j}. Linear in z.
inline void arma_innovations(const double* z, double* w, std::size_t n, std::span<const double> phi,
                             std::span<const double> theta, std::size_t stride_z, std::size_t stride_w) {
  for (std::size_t t = 0; t < n; ++t) {
    double v = z[t * stride_z];
    for (std::size_t i = 0; i < phi.size(); ++i) {
      if (t > i) v -= phi[i] * z[(t - i - 1) * stride_z];
    }
    for (std::size_t j = 0; j < theta.size(); ++j) {
      if (t > j) v -= theta[j] * w[(t - j - 1) * stride_w];
    }
    w[t * stride_w] = v;
  }
}

inline Eigen::VectorXd filter_vector(const Eigen::VectorXd& z, std::span<const double> phi,
                                     std::span<const double> theta) {
  Eigen::VectorXd w(z.size());
  arma_innovations(z.data(), w.data(), static_cast<std::size_t>(z.size()), phi, theta, 1, 1);
  return w;
}

inline Eigen::MatrixXd filter_columns(const Eigen::MatrixXd& Z, std::span<const double> phi,
                                      std::span<const double> theta) {
  Eigen::MatrixXd W(Z.rows(), Z.cols());
  for (Eigen::Index c = 0; c < Z.cols(); ++c) {
    const Eigen::VectorXd col = Z.col(c);
    W.col(c) = filter_vector(col, phi, theta);
  }
  return W;
}

}  // namespace detail

/// Ordinary least squares; the (0, 0, 0) member of the ARIMA-error family.
inline RegimeModelFit fit_ols(const DesignMatrix& X, std::span<const double> y) {
  const std::size_t n = X.rows();
  const std::size_t k = X.cols();
  if (y.size() != n) fail(ErrorKind::parameter, "fit_ols: X rows differ from y length");
  if (n < k) fail(ErrorKind::size, "fit_ols: fewer rows than coefficients");
  const Eigen::VectorXd yv = Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(n));
  const auto ls = detail::least_squares(X.values, yv);
  RegimeModelFit fit;
  fit.labels = X.labels;
  fit.coefficients.assign(ls.beta.data(), ls.beta.data() + ls.beta.size());
  fit.css = ls.rss;
  fit.n_used = n;
  fit.df = static_cast<double>(n - k);
  // An exactly determined fit has no residual degrees of freedom, so no variance estimate.
  const double sigma2 = n > k ? ls.rss / fit.df : std::numeric_limits<double>::quiet_NaN();
  fit.residual_standard_error = std::sqrt(sigma2);
  for (std::size_t j = 0; j < k; ++j) {
    fit.std_errors.emplace_back(std::sqrt(sigma2 * ls.cov_unscaled(static_cast<Eigen::Index>(j),
                                                                   static_cast<Eigen::Index>(j))));
  }
  fit.estimated_parameters = static_cast<int>(k);
  fit.aicc = detail::aicc_from_css(ls.rss, n, static_cast<int>(k) + 1);
  return fit;
}

struct ArmaFitOptions {
  int max_evaluations = 500;
};

/// y_t = X_t b + eta_t with (1 - B)^d eta_t ~ ARMA(p, q), fitted by conditional sum of squares.
/// For fixed ARMA parameters the CSS is quadratic in b, so b is profiled out by least squares
/// on the filtered data and Nelder-Mead searches the ARMA parameters from zero. Points outside
/// the stationary/invertible region score +inf. When d = 1 the columns that difference to zero
/// (the intercept) are dropped and their level is restored afterwards as the mean training
/// residual.
inline RegimeModelFit fit_arma_errors(const DesignMatrix& X, std::span<const double> y, ArmaOrder order,
                                      const ArmaFitOptions& options = {}) {
  if (order.p < 0 || order.p > 2 || order.q < 0 || order.q > 2 || order.d < 0 || order.d > 1) {
    fail(ErrorKind::parameter, "fit_arma_errors: orders must satisfy p, q in 0..2 and d in 0..1");
  }
  if (y.size() != X.rows()) fail(ErrorKind::parameter, "fit_arma_errors: X rows differ from y length");
  if (order.p == 0 && order.q == 0 && order.d == 0) return fit_ols(X, y);

  const auto n = static_cast<Eigen::Index>(X.rows());
  Eigen::VectorXd yv = Eigen::Map<const Eigen::VectorXd>(y.data(), n);
  Eigen::MatrixXd Z = X.values;
  if (order.d == 1) {
    yv = (yv.tail(n - 1) - yv.head(n - 1)).eval();
    Z = (Z.bottomRows(n - 1) - Z.topRows(n - 1)).eval();
  }
  std::vector<Eigen::Index> kept;
  std::vector<Eigen::Index> dropped;
  for (Eigen::Index c = 0; c < Z.cols(); ++c) {
    if (Z.col(c).cwiseAbs().maxCoeff() == 0.0) dropped.push_back(c);
    else kept.push_back(c);
  }
  for (Eigen::Index c : dropped) {
    if (X.labels[static_cast<std::size_t>(c)] != "intercept") {
      fail(ErrorKind::design, "fit_arma_errors: column '" + X.labels[static_cast<std::size_t>(c)] +
                                  "' vanishes after differencing");
    }
  }
  Eigen::MatrixXd Zk(Z.rows(), static_cast<Eigen::Index>(kept.size()));
  for (std::size_t i = 0; i < kept.size(); ++i) Zk.col(static_cast<Eigen::Index>(i)) = Z.col(kept[i]);

  const auto n_used = static_cast<std::size_t>(yv.size());
  const int k = static_cast<int>(kept.size());
  const int K = k + order.p + order.q + 1;
  if (static_cast<double>(n_used) - K - 1.0 <= 0.0) {
    fail(ErrorKind::size, "fit_arma_errors: too few rows for order " + to_string(order));
  }

  const auto p = static_cast<std::size_t>(order.p);
  auto split_params = [p](const std::vector<double>& params) {
    return std::pair<std::vector<double>, std::vector<double>>{
        {params.begin(), params.begin() + static_cast<std::ptrdiff_t>(p)},
        {params.begin() + static_cast<std::ptrdiff_t>(p), params.end()}};
  };
  auto profile = [&](const std::vector<double>& params) -> double {
    const auto [phi, theta] = split_params(params);
    if (!detail::ar_stationary(phi) || !detail::ma_invertible(theta)) {
      return std::numeric_limits<double>::infinity();
    }
    const Eigen::VectorXd yf = detail::filter_vector(yv, phi, theta);
    const Eigen::MatrixXd Xf = detail::filter_columns(Zk, phi, theta);
    const Eigen::VectorXd beta = Xf.colPivHouseholderQr().solve(yf);
    return (yf - Xf * beta).squaredNorm();
  };

  optimize::NelderMeadOptions nm;
  nm.max_evaluations = options.max_evaluations;
  const auto res = optimize::nelder_mead(profile, std::vector<double>(p + static_cast<std::size_t>(order.q), 0.0), nm);

  const auto [phi, theta] = split_params(res.x);
  const Eigen::VectorXd yf = detail::filter_vector(yv, phi, theta);
  const Eigen::MatrixXd Xf = detail::filter_columns(Zk, phi, theta);
  const auto ls = detail::least_squares(Xf, yf);

  RegimeModelFit fit;
  fit.labels = X.labels;
  fit.order = order;
  fit.phi = phi;
  fit.theta = theta;
  fit.css = ls.rss;
  fit.n_used = n_used;
  fit.df = static_cast<double>(n_used) - k - order.p - order.q;
  fit.residual_standard_error = std::sqrt(ls.rss / fit.df);
  fit.estimated_parameters = k + order.p + order.q;
  fit.evaluations = res.evaluations;
  fit.aicc = detail::aicc_from_css(ls.rss, n_used, K);
  fit.coefficients.assign(X.cols(), 0.0);
  fit.std_errors.assign(X.cols(), std::nullopt);
  const double sigma2 = ls.rss / fit.df;
  for (std::size_t i = 0; i < kept.size(); ++i) {
    const auto c = static_cast<std::size_t>(kept[i]);
    const auto ii = static_cast<Eigen::Index>(i);
    fit.coefficients[c] = ls.beta(ii);
    fit.std_errors[c] = std::sqrt(sigma2 * ls.cov_unscaled(ii, ii));
  }
  if (!dropped.empty()) {
    // Restore the level lost to differencing.
    const Eigen::VectorXd yfull = Eigen::Map<const Eigen::VectorXd>(y.data(), n);
    Eigen::VectorXd beta_full = Eigen::Map<const Eigen::VectorXd>(fit.coefficients.data(),
                                                                  static_cast<Eigen::Index>(X.cols()));
    const double level = (yfull - X.values * beta_full).mean();
    fit.coefficients[static_cast<std::size_t>(dropped.front())] = level;
  }
  if (!res.converged) {
    throw ConvergenceError("fit_arma_errors: no convergence for order " + to_string(order) + " within " +
                               std::to_string(options.max_evaluations) + " evaluations",
                           std::move(fit));
  }
  return fit;
}

struct GridCell {
  ArmaOrder order;
  std::optional<RegimeModelFit> fit;
  std::string error;
};

struct Selection {
  RegimeModelFit best;
  std::vector<GridCell> grid;
};

inline constexpr double kRootMargin = 1.01;

/// Fits every order with p in 0..2, d in 0..1, q in 0..2 and keeps the lowest AICc. Ties go to
/// fewer parameters, then lower p. Orders the sample cannot support are skipped, as are fits
/// with an AR or MA root inside |z| = kRootMargin.
inline Selection stepwise_search(const DesignMatrix& X, std::span<const double> y,
                                 const ArmaFitOptions& options = {}) {
  Selection sel;
  std::optional<std::size_t> best;
  auto better = [](const RegimeModelFit& a, const RegimeModelFit& b) {
    if (a.aicc != b.aicc) return a.aicc < b.aicc;
    const int pa = a.order.p + a.order.d + a.order.q;
    const int pb = b.order.p + b.order.d + b.order.q;
    if (pa != pb) return pa < pb;
    return a.order.p < b.order.p;
  };
  for (int d = 0; d <= 1; ++d) {
    for (int p = 0; p <= 2; ++p) {
      for (int q = 0; q <= 2; ++q) {
        GridCell cell;
        cell.order = {p, d, q};
        try {
          cell.fit = fit_arma_errors(X, y, cell.order, options);
          if (!detail::ar_stationary(cell.fit->phi, kRootMargin) || !detail::ma_invertible(cell.fit->theta, kRootMargin)) {
            cell.fit.reset();
            cell.error = "roots within 1% of the unit circle";
          }
        } catch (const Error& e) {
          cell.error = e.what();
        }
        if (cell.fit && std::isfinite(cell.fit->aicc) &&
            (!best || better(*cell.fit, *sel.grid[*best].fit))) {
          best = sel.grid.size();
        }
        sel.grid.push_back(std::move(cell));
      }
    }
  }
  if (!best) {
    std::string msg = "stepwise_select: every order failed:";
    for (const auto& c : sel.grid) msg += " " + to_string(c.order) + " " + c.error + ";";
    fail(ErrorKind::convergence, msg);
  }
  sel.best = *sel.grid[*best].fit;
  return sel;
}

inline RegimeModelFit stepwise_select(const DesignMatrix& X, std::span<const double> y,
                                      const ArmaFitOptions& options = {}) {
  return stepwise_search(X, y, options).best;
}

/// Regression forecast. ARMA error forecasts start from zero history, so they contribute nothing.
inline std::vector<double> predict(const RegimeModelFit& fit, const DesignMatrix& X_new) {
  if (X_new.labels != fit.labels) fail(ErrorKind::design, "predict: design columns do not match the fit");
  const Eigen::VectorXd beta = Eigen::Map<const Eigen::VectorXd>(fit.coefficients.data(),
                                                                 static_cast<Eigen::Index>(fit.coefficients.size()));
  const Eigen::VectorXd yhat = X_new.values * beta;
  return {yhat.data(), yhat.data() + yhat.size()};
}

struct FitMetrics {
  double r_squared_train = 0.0;
  double r_squared_test = 0.0;
  double mse_test = 0.0;
  std::optional<double> pred_residual_se;  // needs >= 2 test rows
};

inline double r_squared(std::span<const double> target, std::span<const double> fitted) {
  if (target.size() != fitted.size() || target.empty()) fail(ErrorKind::parameter, "r_squared: size mismatch");
  const double m = mean_of(target);
  double ss_res = 0.0;
  double ss_tot = 0.0;
  for (std::size_t i = 0; i < target.size(); ++i) {
    ss_res += (target[i] - fitted[i]) * (target[i] - fitted[i]);
    ss_tot += (target[i] - m) * (target[i] - m);
  }
  if (ss_tot == 0.0) fail(ErrorKind::undefined, "r_squared: target has zero variance");
  return 1.0 - ss_res / ss_tot;
}

/// r^2 against the smoothed target; MSE and prediction-residual SD against the raw target.
inline FitMetrics evaluate(const RegimeModelFit& fit, const DesignMatrix& X_test, std::span<const double> y_raw_test,
                           std::span<const double> y_smoothed_test, std::span<const double> y_smoothed_train,
                           const DesignMatrix& X_train) {
  if (X_test.rows() != y_raw_test.size() || X_test.rows() != y_smoothed_test.size() ||
      X_train.rows() != y_smoothed_train.size()) {
    fail(ErrorKind::parameter, "evaluate: inconsistent row counts");
  }
  const auto fitted_train = predict(fit, X_train);
  const auto fitted_test = predict(fit, X_test);
  FitMetrics m;
  m.r_squared_train = r_squared(y_smoothed_train, fitted_train);
  m.r_squared_test = r_squared(y_smoothed_test, fitted_test);
  std::vector<double> resid(y_raw_test.size());
  double sq = 0.0;
  for (std::size_t i = 0; i < resid.size(); ++i) {
    resid[i] = y_raw_test[i] - fitted_test[i];
    sq += resid[i] * resid[i];
  }
  if (resid.empty()) fail(ErrorKind::size, "evaluate: empty test set");
  m.mse_test = sq / static_cast<double>(resid.size());
  if (resid.size() >= 2) m.pred_residual_se = std::sqrt(sample_variance(resid));
  return m;
}

}  // namespace regimecast::regression
