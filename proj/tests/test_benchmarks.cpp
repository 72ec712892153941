#include <gtest/gtest.h>

#include <cmath>

#include "ragnar/benchmarks.hpp"
#include "ragnar/gnar.hpp"
#include "ragnar/rng.hpp"
#include "support.hpp"

namespace ragnar {
namespace {

Eigen::VectorXd ar_series(const std::vector<double>& phi, int length, std::uint64_t seed, double mean = 0.0) {
  Rng rng(seed);
  const int p = static_cast<int>(phi.size()), burn = 200;
  Eigen::VectorXd y = Eigen::VectorXd::Zero(length + burn);
  for (int t = p; t < y.size(); ++t) {
    double v = rng.normal();
    for (int j = 1; j <= p; ++j) v += phi[j - 1] * y(t - j);
    y(t) = v;
  }
  return y.tail(length).array() + mean;
}

TEST(RandomWalk, Examples) {
  Eigen::VectorXd s(5);
  s << 9, 1, 2, 3, 3.2;
  EXPECT_EQ(rw_forecast(s, 1), 3.2);
  Eigen::VectorXd t(5);
  t << 7, 1, 2, 3, 4;
  EXPECT_EQ(rw_forecast(t, 4), 2.5);
  EXPECT_THROW(rw_forecast(Eigen::Vector3d(1, 2, 3), 4), RangeError);
  EXPECT_THROW(rw_forecast(t, 0), DomainError);
}

TEST(ArFit, NoiselessRecovery) {
  Eigen::VectorXd y(30);
  y(0) = 8.0;
  for (int t = 1; t < 30; ++t) y(t) = 0.5 * y(t - 1);
  const ArFit f = ar_fit(y, 1, false);
  EXPECT_NEAR(f.coef(0), 0.5, 1e-10);
  EXPECT_EQ(f.mean, 0.0);
}

TEST(ArFit, WhiteNoiseCoefficientIsSmall) {
  const Eigen::VectorXd y = ar_series({}, 400, 5, 2.0);
  const ArFit f = ar_fit(y, 1);
  EXPECT_LT(std::abs(f.coef(0)), 3.0 / std::sqrt(400.0));
  EXPECT_NEAR(ar_forecast(f, y, 1)(0), y.mean(), 0.5);
  EXPECT_GE(f.residual_variance, 0.0);
}

TEST(ArFit, Errors) {
  EXPECT_THROW(ar_fit(Eigen::VectorXd::Ones(10), 0), DomainError);
  EXPECT_THROW(ar_fit(Eigen::VectorXd::Ones(3), 3), RangeError);
  EXPECT_THROW(ar_fit(Eigen::VectorXd::Ones(5), 3), UnderdeterminedError);
}

TEST(ArForecast, GeometricDecay) {
  ArFit f;
  f.order = 1;
  f.coef = Eigen::VectorXd::Constant(1, 0.5);
  f.mean = 2.0;
  const Eigen::VectorXd path = ar_forecast(f, Eigen::Vector2d(0.0, 3.0), 6);
  for (int h = 1; h <= 6; ++h) EXPECT_DOUBLE_EQ(path(h - 1), 2.0 + std::pow(0.5, h));
  f.coef.setZero();
  EXPECT_EQ(ar_forecast(f, Eigen::Vector2d(0.0, 3.0), 4), Eigen::Vector4d::Constant(2.0));
  EXPECT_THROW(ar_forecast(f, Eigen::Vector2d(0.0, 3.0), 0), DomainError);
}

TEST(ArForecast, MatchesGnarWithoutNeighbours) {
  for (int p : {1, 2, 5}) {
    const Eigen::VectorXd y = ar_series({0.4, 0.2, -0.1}, 120, 40 + p, 3.0);
    const auto panel = testing::make_panel(y);
    const auto w = window(panel, panel.dates.back(), 120, true);
    const Graph g(1, {});
    const auto gf = fit_window(w, g, GnarSpec::constant(ParamClass::local_alpha_beta, p, 0));
    const ArFit af = ar_fit(y, p);
    EXPECT_LT((gf.alpha.row(0).transpose() - af.coef).cwiseAbs().maxCoeff(), 1e-8);
    const Eigen::VectorXd a = ar_forecast(af, y, 12), b = forecast(gf, g, w, 12).values.col(0);
    EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(ArBic, SelectsTwoOnStrongArTwo) {
  int hits = 0;
  for (int k = 0; k < 100; ++k)
    if (ar_bic_select(ar_series({0.2, 0.6}, 150, 1000 + k), 8) == 2) ++hits;
  EXPECT_GT(hits, 50);
}

TEST(ArBic, SelectsOneOnWhiteNoise) {
  int hits = 0;
  for (int k = 0; k < 100; ++k)
    if (ar_bic_select(ar_series({}, 150, 5000 + k), 8) == 1) ++hits;
  EXPECT_GT(hits, 50);
}

TEST(ArBic, InvariantToLevelShift) {
  for (int k = 0; k < 20; ++k) {
    const Eigen::VectorXd y = ar_series({0.5, -0.2, 0.1}, 150, 300 + k);
    const Eigen::VectorXd z = y.array() + 12.5;
    EXPECT_EQ(ar_bic_select(y, 10), ar_bic_select(z, 10));
  }
}

TEST(ArBic, Errors) {
  EXPECT_THROW(ar_bic_select(Eigen::VectorXd::Ones(10), 10), RangeError);
  EXPECT_THROW(ar_bic_select(Eigen::VectorXd::Ones(10), 9), RangeError);
  EXPECT_THROW(ar_bic_select(Eigen::VectorXd::Ones(10), 0), DomainError);
}

TEST(AvAr, SingletonEqualsAr) {
  const Eigen::VectorXd y = ar_series({0.6}, 100, 9, 1.0);
  EXPECT_EQ(avar_forecast(y, {3}, 12), ar_forecast(ar_fit(y, 3), y, 12));
}

TEST(AvAr, EqualWeightMeanOfMembers) {
  const Eigen::VectorXd y = ar_series({0.6, 0.1}, 100, 10, 1.0);
  const Eigen::VectorXd expected =
      (ar_forecast(ar_fit(y, 1), y, 6) + ar_forecast(ar_fit(y, 4), y, 6) + ar_forecast(ar_fit(y, 9), y, 6)) / 3.0;
  EXPECT_LT((avar_forecast(y, {1, 4, 9}, 6) - expected).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(AvAr, PermutationInvariantAndErrors) {
  const Eigen::VectorXd y = ar_series({0.6, 0.1}, 100, 11);
  EXPECT_EQ(avar_forecast(y, {2, 13, 25}, 12), avar_forecast(y, {25, 2, 13}, 12));
  EXPECT_THROW(avar_forecast(y, {}, 12), DomainError);
}

}  // namespace
}  // namespace ragnar
