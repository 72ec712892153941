#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>
#include <vector>

#include "ragnar/errors.hpp"
#include "ragnar/least_squares.hpp"

namespace ragnar {

/// Random walk of order n: mean of the last n values, flat across horizons.
inline double rw_forecast(const Eigen::VectorXd& series, int n) {
  if (n < 1) throw DomainError("RW order must be at least 1");
  if (series.size() < n)
    throw RangeError("RW(" + std::to_string(n) + ") needs " + std::to_string(n) + " observations, got " +
                     std::to_string(series.size()));
  return series.tail(n).mean();
}

struct ArFit {
  int order = 0;
  Eigen::VectorXd coef;  // phi_1..phi_p on the demeaned scale
  double mean = 0.0;
  double residual_variance = 0.0;
  bool ridge = false;
};

namespace detail {

// Rows t = first..len-1 of y regressed on lags 1..p.
inline void ar_design(const Eigen::VectorXd& y, int p, int first, Eigen::MatrixXd& x, Eigen::VectorXd& target) {
  const Eigen::Index rows = y.size() - first;
  x.resize(rows, p);
  for (int j = 1; j <= p; ++j) x.col(j - 1) = y.segment(first - j, rows);
  target = y.tail(rows);
}

}  // namespace detail

/// OLS AR(p) without intercept on the demeaned series; the mean is stored.
/// With demean = false the series is taken as already centred (mean 0).
inline ArFit ar_fit(const Eigen::VectorXd& series, int p, bool demean = true) {
  if (p < 1) throw DomainError("AR order must be at least 1");
  if (series.size() <= p)
    throw RangeError("AR(" + std::to_string(p) + ") needs more than " + std::to_string(p) + " observations");
  ArFit fit;
  fit.order = p;
  fit.mean = demean ? series.mean() : 0.0;
  const Eigen::VectorXd y = series.array() - fit.mean;
  Eigen::MatrixXd x;
  Eigen::VectorXd target;
  detail::ar_design(y, p, p, x, target);
  if (x.rows() < p)
    throw UnderdeterminedError("AR(" + std::to_string(p) + ") has " + std::to_string(x.rows()) + " rows");
  const auto sol = solve_least_squares(x, target);
  fit.coef = sol.coef;
  fit.ridge = sol.ridge;
  const double rss = (target - x * fit.coef).squaredNorm();
  const Eigen::Index dof = x.rows() - p;
  fit.residual_variance = rss / static_cast<double>(dof > 0 ? dof : x.rows());
  return fit;
}

/// Iterated forecasts for horizons 1..H from the end of `history`.
inline Eigen::VectorXd ar_forecast(const ArFit& fit, const Eigen::VectorXd& history, int horizon) {
  if (horizon < 1) throw DomainError("forecast horizon must be at least 1");
  const int p = fit.order;
  if (history.size() < p) throw RangeError("history shorter than AR order");
  std::vector<double> buf(p);
  for (int k = 0; k < p; ++k) buf[k] = history(history.size() - p + k) - fit.mean;
  Eigen::VectorXd out(horizon);
  for (int h = 0; h < horizon; ++h) {
    double pred = 0.0;
    for (int j = 1; j <= p; ++j) pred += fit.coef(j - 1) * buf[p - j];
    out(h) = pred + fit.mean;
    if (p > 0) {
      std::rotate(buf.begin(), buf.begin() + 1, buf.end());
      buf[p - 1] = out(h) - fit.mean;
    }
  }
  return out;
}

/// BIC order in [1, max_order]: T log(RSS/T) + p log T over the common
/// sample usable at max_order; ties go to the smaller order.
inline int ar_bic_select(const Eigen::VectorXd& series, int max_order) {
  if (max_order < 1) throw DomainError("max_order must be at least 1");
  if (max_order + 1 >= series.size())
    throw RangeError("max_order " + std::to_string(max_order) + " needs a window longer than " +
                     std::to_string(max_order + 1) + ", got " + std::to_string(series.size()));
  const Eigen::VectorXd y = series.array() - series.mean();
  const double t = static_cast<double>(y.size() - max_order);
  int best = 1;
  double best_bic = std::numeric_limits<double>::infinity();
  for (int p = 1; p <= max_order; ++p) {
    Eigen::MatrixXd x;
    Eigen::VectorXd target;
    detail::ar_design(y, p, max_order, x, target);
    const auto sol = solve_least_squares(x, target);
    const double rss = (target - x * sol.coef).squaredNorm();
    const double bic = t * std::log(rss / t) + p * std::log(t);
    if (bic < best_bic) {
      best_bic = bic;
      best = p;
    }
  }
  return best;
}

/// Equal-weight mean of AR(p) forecasts over the order set.
inline Eigen::VectorXd avar_forecast(const Eigen::VectorXd& series, const std::vector<int>& orders, int horizon) {
  if (orders.empty()) throw DomainError("AvAR order set is empty");
  const std::set<int> unique(orders.begin(), orders.end());
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(horizon);
  for (int p : unique) sum += ar_forecast(ar_fit(series, p), series, horizon);
  return sum / static_cast<double>(unique.size());
}

}  // namespace ragnar
