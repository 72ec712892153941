#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "ragnar/evaluation.hpp"
#include "support.hpp"

namespace ragnar {
namespace {

using testing::make_panel;

// Target series 0..n-1 (value t at month t) from 2010-01.
Panel ramp_actuals(int n) {
  Eigen::MatrixXd v(n, 1);
  for (int t = 0; t < n; ++t) v(t, 0) = t;
  return make_panel(v, {2010, 1});
}

// Forecast for origin o at horizon h is actual(o + h) + err(o, h).
BacktestResult offset_result(const Panel& actuals, const std::vector<YearMonth>& origins, int horizon,
                             const std::map<std::string, double>& scale) {
  BacktestResult r;
  r.horizon = horizon;
  for (const auto& [label, k] : scale)
    for (auto o : origins) {
      Eigen::VectorXd v(horizon);
      for (int h = 1; h <= horizon; ++h) {
        const int row = actuals.row_of(o + h);
        const double a = row < 0 ? 0.0 : actuals.values(row, 0);
        v(h - 1) = a + k * (1.0 + 0.1 * h + 0.01 * (o - origins.front()));
      }
      r.add(label, o, v);
    }
  for (auto o : origins) r.origins.push_back(o);
  return r;
}

TEST(Metrics, RmseExamples) {
  EXPECT_DOUBLE_EQ(rmse({{2, 2}}), 0.0);
  EXPECT_DOUBLE_EQ(rmse({{0, 1}, {0, -1}}), 1.0);
  EXPECT_NEAR(rmse({{1, 2}, {3, 1}}), 1.5811, 5e-5);
  EXPECT_THROW(rmse({}), DomainError);
}

TEST(Metrics, MapeExamples) {
  EXPECT_NEAR(mape({{2, 3}}), 33.33, 5e-3);
  EXPECT_DOUBLE_EQ(mape({{0, 0.5}}), 50.0);
  EXPECT_DOUBLE_EQ(mape({{1.5, 1.5}, {-2, -2}}), 0.0);
  EXPECT_THROW(mape({}), DomainError);
}

TEST(Metrics, PermutationInvariant) {
  std::mt19937_64 gen(4);
  std::normal_distribution<double> nd;
  std::vector<ForecastPair> p;
  for (int k = 0; k < 50; ++k) p.emplace_back(nd(gen), nd(gen));
  const double r = rmse(p), m = mape(p);
  for (int rep = 0; rep < 5; ++rep) {
    std::shuffle(p.begin(), p.end(), gen);
    EXPECT_NEAR(rmse(p), r, 1e-14);
    EXPECT_NEAR(mape(p), m, 1e-12);
  }
}

TEST(HorizonTable, BenchmarkAgainstItselfIsOne) {
  const Panel a = ramp_actuals(40);
  std::vector<YearMonth> origins;
  for (int k = 5; k < 30; ++k) origins.push_back(a.dates[k]);
  const auto r = offset_result(a, origins, 4, {{"bench", 1.0}});
  const auto rep = horizon_table(r, a, "bench");
  ASSERT_EQ(rep.cells.size(), 4u);
  for (const auto& c : rep.cells) {
    EXPECT_EQ(c.rel_rmse, 1.0);
    EXPECT_EQ(c.rel_mape, 1.0);
    EXPECT_EQ(c.n, 25);
  }
}

TEST(HorizonTable, HalfErrorsGiveHalfRelativeRmse) {
  const Panel a = ramp_actuals(40);
  std::vector<YearMonth> origins;
  for (int k = 5; k < 30; ++k) origins.push_back(a.dates[k]);
  const auto r = offset_result(a, origins, 4, {{"bench", 2.0}, {"model", 1.0}});
  const auto rep = horizon_table(r, a, "bench");
  for (int h = 1; h <= 4; ++h) EXPECT_NEAR(rep.at("model", h).rel_rmse, 0.5, 1e-12);
  EXPECT_THROW(horizon_table(r, a, "missing"), DomainError);
}

TEST(HorizonTable, UnmatchedHorizonIsAbsent) {
  const Panel a = ramp_actuals(20);
  // Last origin one month before the end: only h=1 is realised.
  const auto r = offset_result(a, {a.dates[18]}, 3, {{"m", 1.0}});
  const auto rep = horizon_table(r, a, "m");
  EXPECT_EQ(rep.at("m", 1).n, 1);
  EXPECT_FALSE(rep.at("m", 2).present());
  EXPECT_TRUE(std::isnan(rep.at("m", 2).rmse));
  EXPECT_TRUE(std::isnan(rep.at("m", 3).rel_rmse));
  std::ostringstream os;
  write_report_csv(os, rep);
  EXPECT_NE(os.str().find("m,2,0,,,,,,\n"), std::string::npos);
  EXPECT_TRUE(report_json(rep)["cells"][1]["rmse"].is_null());
}

TEST(HorizonTable, SingleOriginMatchesDirectMetrics) {
  const Panel a = ramp_actuals(30);
  const YearMonth o = a.dates[10];
  const auto r = offset_result(a, {o}, 5, {{"m", 0.7}});
  const auto rep = horizon_table(r, a, "m");
  for (int h = 1; h <= 5; ++h) {
    const double actual = a.values(a.row_of(o + h), 0);
    const std::vector<ForecastPair> p{{actual, r.forecasts.at("m").at(o)(h - 1)}};
    EXPECT_EQ(rep.at("m", h).rmse, rmse(p));
    EXPECT_EQ(rep.at("m", h).mape, mape(p));
  }
}

TEST(HorizonTable, RelativeUsesCommonPairs) {
  const Panel a = ramp_actuals(40);
  std::vector<YearMonth> origins;
  for (int k = 5; k < 30; ++k) origins.push_back(a.dates[k]);
  auto r = offset_result(a, origins, 2, {{"bench", 2.0}, {"model", 1.0}});
  // The model misses an origin and has a NaN elsewhere; the benchmark pairs
  // are restricted to the same cells.
  r.forecasts["model"].erase(origins[3]);
  r.forecasts["model"][origins[7]](0) = std::nan("");
  const auto rep = horizon_table(r, a, "bench");
  EXPECT_EQ(rep.at("model", 1).n, 23);
  EXPECT_EQ(rep.at("model", 2).n, 24);
  EXPECT_NEAR(rep.at("model", 1).rel_rmse, 0.5, 1e-12);
}

TEST(External, IdenticalForecastsGiveIdenticalMetrics) {
  const Panel a = ramp_actuals(80);
  std::vector<YearMonth> origins;
  for (int k = 0; k < 70; ++k) origins.push_back(a.dates[k]);
  const auto r = offset_result(a, origins, 6, {{"m", 1.0}});
  ExternalForecasts ext;
  // One quarterly publication per year over four years, horizons 1..6.
  for (int y = 0; y < 4; ++y)
    for (int h = 1; h <= 6; ++h) {
      const YearMonth d = a.dates[2 + 12 * y];
      ext[{d, h}] = r.forecasts.at("m").at(d)(h - 1);
    }
  const auto rep = compare_external(r, a, ext, "m");
  EXPECT_EQ(matched_cells(rep), 24);
  for (int h = 1; h <= 6; ++h) {
    EXPECT_EQ(rep.at("m", h).n, 4);
    EXPECT_EQ(rep.at("m", h).rmse, rep.at("external", h).rmse);
    EXPECT_EQ(rep.at("m", h).rel_rmse, 1.0);
  }
}

TEST(External, EmptyOverlapIsAnError) {
  const Panel a = ramp_actuals(30);
  const auto r = offset_result(a, {a.dates[5]}, 2, {{"m", 1.0}});
  const ExternalForecasts ext{{{YearMonth{2020, 1}, 1}, 3.0}};
  EXPECT_THROW(compare_external(r, a, ext, "m"), EmptyOverlapError);
  EXPECT_THROW(compare_external(r, a, ext, "nope"), DomainError);
}

TEST(External, ReadCsv) {
  std::istringstream in("publish_date,horizon,forecast,source\n2015-02,1,2.5,boe\n2015-02,2,2.6,boe\n\n2015-05,1,2.1,boe\n");
  const auto ext = read_external(in);
  ASSERT_EQ(ext.size(), 3u);
  EXPECT_EQ(ext.at({YearMonth{2015, 2}, 2}), 2.6);
  std::istringstream dup("publish_date,horizon,forecast\n2015-02,1,2.5\n2015-02,1,2.6\n");
  EXPECT_THROW(read_external(dup), DataError);
  std::istringstream missing("date,horizon,forecast\n");
  EXPECT_THROW(read_external(missing), DataError);
}

BacktestResult with_metadata(const std::vector<std::vector<std::vector<std::string>>>& per_month) {
  BacktestResult r;
  YearMonth d{2012, 1};
  for (const auto& graphs : per_month) {
    for (std::size_t k = 0; k < graphs.size(); ++k)
      r.metadata.push_back({"M", d, static_cast<int>(k) + 1, static_cast<int>(k), graphs[k], 0, -1});
    r.metadata.push_back({"other", d, 1, 0, {"fuels", "food"}, 0, -1});
    d += 1;
  }
  return r;
}

TEST(ComponentFrequency, ConstantTopGraph) {
  const auto r = with_metadata(std::vector<std::vector<std::vector<std::string>>>(8, {{"fuels"}}));
  const auto rows = component_frequency(r, "M", {"fuels", "food"}, 6);
  ASSERT_EQ(rows.size(), 16u);
  for (const auto& row : rows) EXPECT_DOUBLE_EQ(row.pct, row.component == "fuels" ? 100.0 : 0.0);
}

TEST(ComponentFrequency, SmoothingOneIsRawShare) {
  const auto r = with_metadata({{{"a", "b"}, {"a"}}, {{"b"}, {}}, {{"a"}, {"a"}}, {{}, {}}});
  const auto raw = component_frequency(r, "M", {"a", "b", "c"}, 1);
  const std::vector<double> a{100, 0, 100, 0}, b{50, 50, 0, 0};
  for (std::size_t t = 0; t < 4; ++t) {
    EXPECT_DOUBLE_EQ(raw[t].pct, a[t]);
    EXPECT_DOUBLE_EQ(raw[4 + t].pct, b[t]);
    EXPECT_DOUBLE_EQ(raw[8 + t].pct, 0.0);
  }
  // Trailing mean, shorter at the start.
  const auto smooth = component_frequency(r, "M", {"a"}, 3);
  EXPECT_DOUBLE_EQ(smooth[0].pct, 100.0);
  EXPECT_DOUBLE_EQ(smooth[1].pct, 50.0);
  EXPECT_NEAR(smooth[2].pct, 200.0 / 3, 1e-12);
  EXPECT_NEAR(smooth[3].pct, 100.0 / 3, 1e-12);
  EXPECT_THROW(component_frequency(r, "M", {"a"}, 0), DomainError);
  std::ostringstream os;
  write_components_csv(os, smooth);
  EXPECT_EQ(os.str().substr(0, 33), "date,component,pct\n2012-01,a,100\n");
}

TEST(Aggregate, MeanAndSampleSd) {
  std::vector<EvalReport> runs(3);
  const double vals[] = {1.0, 2.0, 4.0};
  for (int k = 0; k < 3; ++k) {
    EvalCell c;
    c.label = "m";
    c.horizon = 1;
    c.n = 10;
    c.rmse = vals[k];
    c.mape = 10 * vals[k];
    c.rel_rmse = vals[k] / 2;
    runs[k].cells.push_back(c);
  }
  const auto agg = aggregate_runs(runs);
  const auto& c = agg.at("m", 1);
  EXPECT_DOUBLE_EQ(c.rmse, 7.0 / 3);
  EXPECT_NEAR(c.sd_rmse, std::sqrt((16.0 / 9 + 1.0 / 9 + 25.0 / 9) / 2), 1e-12);
  EXPECT_NEAR(c.sd_mape, 10 * c.sd_rmse, 1e-12);
  EXPECT_DOUBLE_EQ(c.rel_rmse, 7.0 / 6);
  EXPECT_EQ(c.n, 10);
  EXPECT_EQ(aggregate_runs({runs[0]}).at("m", 1).sd_rmse, 0.0);
  EXPECT_THROW(aggregate_runs({}), DomainError);
  std::ostringstream os;
  write_report_csv(os, agg);
  EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "label,horizon,n,rmse,mape,rel_rmse,rel_mape,sd_rmse,sd_mape");
}

}  // namespace
}  // namespace ragnar
