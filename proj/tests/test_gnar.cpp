#include <gtest/gtest.h>

#include <sstream>

#include "ragnar/benchmarks.hpp"
#include "ragnar/gnar.hpp"
#include "ragnar/synthetic.hpp"
#include "support.hpp"

namespace ragnar {
namespace {

using testing::make_panel;

constexpr ParamClass kClasses[] = {ParamClass::global_alpha, ParamClass::standard, ParamClass::local_alpha_beta};

// Ring 0-1-...-(n-1)-0 plus a few chords, so every node has neighbours.
Graph ring_graph(int n, std::vector<Edge> extra = {}) {
  std::vector<Edge> edges = std::move(extra);
  for (int i = 0; i < n; ++i) edges.emplace_back(i, (i + 1) % n);
  return Graph(n, edges);
}

// Stable coefficients for `spec` with node-dependent values where allowed.
GnarFit test_coefficients(const GnarSpec& spec, int n, double scale = 1.0) {
  const bool a_shared = spec.param_class == ParamClass::global_alpha;
  const bool b_shared = spec.param_class != ParamClass::local_alpha_beta;
  Eigen::MatrixXd alpha(a_shared ? 1 : n, spec.p), beta(b_shared ? 1 : n, spec.beta_count());
  for (Eigen::Index i = 0; i < alpha.rows(); ++i)
    for (int j = 0; j < spec.p; ++j) alpha(i, j) = scale * (j == 0 ? 0.35 + 0.04 * i : -0.15 + 0.02 * i);
  for (Eigen::Index i = 0; i < beta.rows(); ++i)
    for (int c = 0; c < spec.beta_count(); ++c) beta(i, c) = scale * (c % 2 == 0 ? 0.25 - 0.02 * i : 0.1);
  return make_coefficients(spec, n, alpha, beta);
}

PanelWindow raw_window(const Eigen::MatrixXd& x) {
  const auto p = make_panel(x);
  return window(p, p.dates.back(), static_cast<int>(x.rows()), false);
}

double max_abs(const Eigen::MatrixXd& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

TEST(ParamCount, Examples) {
  EXPECT_EQ(param_count(GnarSpec::constant(ParamClass::global_alpha, 25, 2), 114), 75);
  EXPECT_EQ(param_count(GnarSpec::constant(ParamClass::standard, 1, 1), 114), 115);
  EXPECT_EQ(param_count(GnarSpec::constant(ParamClass::local_alpha_beta, 2, 2), 114), 684);
}

TEST(ParamCount, TableRanges) {
  struct Row {
    ParamClass c;
    std::vector<int> stages;
    long lo, hi;
  };
  const std::vector<Row> rows{
      {ParamClass::global_alpha, {1}, 2, 4},          {ParamClass::global_alpha, {2}, 3, 6},
      {ParamClass::global_alpha, {1, 2}, 2, 6},       {ParamClass::standard, {1}, 115, 230},
      {ParamClass::standard, {2}, 116, 232},          {ParamClass::standard, {1, 2}, 115, 232},
      {ParamClass::local_alpha_beta, {1}, 228, 456},  {ParamClass::local_alpha_beta, {2}, 342, 684},
      {ParamClass::local_alpha_beta, {1, 2}, 228, 684}};
  for (const auto& r : rows) {
    long lo = 1L << 40, hi = 0;
    for (int p : {1, 2})
      for (int s : r.stages) {
        const long k = param_count(GnarSpec::constant(r.c, p, s), 114);
        lo = std::min(lo, k);
        hi = std::max(hi, k);
      }
    EXPECT_EQ(lo, r.lo) << class_name(r.c);
    EXPECT_EQ(hi, r.hi) << class_name(r.c);
  }
}

TEST(GnarSpec, ValidationAndIndexing) {
  EXPECT_THROW((GnarSpec{ParamClass::standard, 2, {1}}.validate()), DomainError);
  EXPECT_THROW((GnarSpec{ParamClass::standard, 1, {-1}}.validate()), DomainError);
  EXPECT_THROW(GnarSpec::constant(ParamClass::standard, 0, 1), DomainError);
  const GnarSpec s{ParamClass::local_alpha_beta, 3, {2, 0, 1}};
  EXPECT_EQ(s.beta_count(), 3);
  EXPECT_EQ(s.beta_index(1, 2), 1);
  EXPECT_EQ(s.beta_index(3, 1), 2);
  EXPECT_EQ(s.str(), "local_alpha_beta GNAR(3,[2,0,1])");
  EXPECT_EQ(parse_class("standard"), ParamClass::standard);
  EXPECT_THROW(parse_class("bogus"), DomainError);
}

TEST(BuildDesign, TwoNodeSingletonAverage) {
  Eigen::MatrixXd x(4, 2);
  x << 1, 10, 2, 20, 3, 30, 4, 40;
  const auto prob = build_design(raw_window(x), Graph(2, {{0, 1}}), {ParamClass::local_alpha_beta, 1, {1}}, {1});
  ASSERT_EQ(prob.blocks.size(), 1u);
  const auto& b = prob.blocks[0];
  EXPECT_EQ(b.y, Eigen::Vector3d(20, 30, 40));
  EXPECT_EQ(Eigen::VectorXd(b.own.col(0)), Eigen::Vector3d(10, 20, 30));
  EXPECT_EQ(Eigen::VectorXd(b.neighbour.col(0)), Eigen::Vector3d(1, 2, 3));
  EXPECT_TRUE(b.present[0]);
}

TEST(BuildDesign, EmptyStageColumnIsAbsent) {
  const Eigen::MatrixXd x = Eigen::MatrixXd::Random(10, 3);
  const auto prob = build_design(raw_window(x), Graph(3, {{1, 2}}), {ParamClass::standard, 1, {2}}, {0, 1});
  EXPECT_FALSE(prob.blocks[0].present[0]);
  EXPECT_FALSE(prob.blocks[0].present[1]);
  EXPECT_EQ(max_abs(prob.blocks[0].neighbour), 0.0);
  EXPECT_TRUE(prob.blocks[1].present[0]);
  EXPECT_FALSE(prob.blocks[1].present[1]);
}

TEST(BuildDesign, ZeroStageIsArDesign) {
  const Eigen::MatrixXd x = Eigen::MatrixXd::Random(12, 3);
  const auto prob = build_design(raw_window(x), ring_graph(3), {ParamClass::local_alpha_beta, 2, {0, 0}}, {0, 1, 2});
  for (int i = 0; i < 3; ++i) {
    const auto& b = prob.blocks[i];
    EXPECT_EQ(b.neighbour.cols(), 0);
    EXPECT_EQ(b.y, x.col(i).tail(10));
    EXPECT_EQ(Eigen::VectorXd(b.own.col(0)), x.col(i).segment(1, 10));
    EXPECT_EQ(Eigen::VectorXd(b.own.col(1)), x.col(i).segment(0, 10));
  }
}

TEST(BuildDesign, Errors) {
  const Eigen::MatrixXd x = Eigen::MatrixXd::Random(3, 3);
  EXPECT_THROW(build_design(raw_window(x), ring_graph(3), GnarSpec::constant(ParamClass::standard, 3, 1), {0}),
               RangeError);
  EXPECT_THROW(build_design(raw_window(x), ring_graph(4), GnarSpec::constant(ParamClass::standard, 1, 1), {0}),
               ShapeError);
}

TEST(Forecast, WorkedExample) {
  const auto coef = make_coefficients({ParamClass::global_alpha, 1, {1}}, 2, Eigen::MatrixXd::Constant(1, 1, 0.5),
                                      Eigen::MatrixXd::Constant(1, 1, 0.2));
  Eigen::MatrixXd hist(1, 2);
  hist << 1, 2;
  const auto path = forecast(coef, Graph(2, {{0, 1}}), hist, 2);
  EXPECT_NEAR(path.at(1, 0), 0.9, 1e-15);
  EXPECT_NEAR(path.at(1, 1), 1.2, 1e-15);
  EXPECT_NEAR(path.at(2, 0), 0.69, 1e-15);
}

TEST(Forecast, ZeroCoefficientsGiveMeans) {
  const GnarSpec spec = GnarSpec::constant(ParamClass::local_alpha_beta, 2, 1);
  const Eigen::Vector3d means(1.5, -2.0, 0.25);
  const auto coef = make_coefficients(spec, 3, Eigen::MatrixXd::Zero(3, 2), Eigen::MatrixXd::Zero(3, 2), means);
  const auto path = forecast(coef, ring_graph(3), Eigen::MatrixXd::Random(5, 3), 6);
  for (int h = 1; h <= 6; ++h)
    for (int i = 0; i < 3; ++i) EXPECT_EQ(path.at(h, i), means(i));
}

TEST(Forecast, ZeroBetaIsArPath) {
  const GnarSpec spec = GnarSpec::constant(ParamClass::standard, 2, 1);
  auto coef = test_coefficients(spec, 4);
  coef.beta.setZero();
  coef.node_means = Eigen::Vector4d(0.5, 1.0, -1.0, 2.0);
  const Eigen::MatrixXd hist = Eigen::MatrixXd::Random(6, 4);
  const auto path = forecast(coef, ring_graph(4), hist, 12);
  for (int i = 0; i < 4; ++i) {
    ArFit ar;
    ar.order = 2;
    ar.coef = coef.alpha.row(i).transpose();
    ar.mean = coef.node_means(i);
    const Eigen::VectorXd expected = ar_forecast(ar, hist.col(i), 12);
    EXPECT_LT((path.values.col(i) - expected).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Forecast, Errors) {
  const GnarSpec spec = GnarSpec::constant(ParamClass::standard, 2, 1);
  const auto coef = test_coefficients(spec, 4);
  const Eigen::MatrixXd hist = Eigen::MatrixXd::Random(6, 4);
  EXPECT_THROW(forecast(coef, ring_graph(4), hist, 0), DomainError);
  EXPECT_THROW(forecast(coef, ring_graph(4), Eigen::MatrixXd::Random(1, 4), 1), RangeError);
  EXPECT_THROW(forecast(coef, ring_graph(4), Eigen::MatrixXd::Random(6, 3), 1), ShapeError);
  EXPECT_THROW(forecast(coef, ring_graph(5), Eigen::MatrixXd::Random(6, 5), 1), ShapeError);
}

TEST(Forecast, OneCallEqualsIteratedOneStepCalls) {
  const Graph g = ring_graph(6, {{0, 3}});
  for (ParamClass c : kClasses) {
    const GnarSpec spec{c, 3, {2, 1, 0}};
    const Eigen::MatrixXd x = simulate_gnar(test_coefficients(spec, 6), g, 80, 1.0, 5, 50);
    const auto w = raw_window(x);
    auto f = fit_window(window(make_panel(x), make_panel(x).dates.back(), 80, true), g, spec);
    const auto full = forecast(f, g, x, 12);
    Eigen::MatrixXd hist = x;
    for (int h = 1; h <= 12; ++h) {
      const auto step = forecast(f, g, hist, 1);
      for (int i = 0; i < 6; ++i) EXPECT_EQ(step.at(1, i), full.at(h, i)) << class_name(c) << " h=" << h;
      hist.conservativeResize(hist.rows() + 1, Eigen::NoChange);
      hist.row(hist.rows() - 1) = step.values.row(0);
    }
  }
}

// Noiseless simulation: x_t follows the one-step map exactly.
class NoiselessRecovery : public ::testing::TestWithParam<std::tuple<ParamClass, int>> {};

TEST_P(NoiselessRecovery, RecoversCoefficientsAndMap) {
  const auto [c, p] = GetParam();
  const int n = 8;
  const Graph g = ring_graph(n, {{0, 4}, {2, 6}, {1, 5}});
  const GnarSpec spec = GnarSpec::constant(c, p, 1);
  const GnarFit truth = test_coefficients(spec, n);
  const Eigen::MatrixXd x = simulate_gnar(truth, g, 40, 0.0, 99, 0, 1.0);
  const GnarFit est = fit_window(raw_window(x), g, spec);
  EXPECT_LT(max_abs(est.alpha - truth.alpha), 1e-8) << spec.str();
  EXPECT_LT(max_abs(est.beta - truth.beta), 1e-8) << spec.str();
  for (int t = p; t < x.rows(); ++t) {
    const Eigen::MatrixXd hist = x.topRows(t);
    const auto a = forecast(est, g, hist, 1), b = forecast(truth, g, hist, 1);
    EXPECT_LT(max_abs(a.values - b.values), 1e-8);
    EXPECT_LT(max_abs(a.values - x.row(t)), 1e-8);
  }
}

INSTANTIATE_TEST_SUITE_P(AllClasses, NoiselessRecovery,
                         ::testing::Combine(::testing::ValuesIn(kClasses), ::testing::Values(1, 2)));

TEST(Fit, ZeroStageReducesToAr) {
  for (int k = 0; k < 20; ++k) {
    const int n = 1 + k % 4, p = 1 + k % 3;
    const Eigen::MatrixXd x = simulate_gnar(test_coefficients(GnarSpec::constant(ParamClass::standard, p, 0), n, 0.8),
                                            Graph(n, {}), 60, 1.0, 700 + k, 30);
    const auto panel = make_panel(x);
    const auto w = window(panel, panel.dates.back(), 60, true);
    for (ParamClass c : {ParamClass::standard, ParamClass::local_alpha_beta}) {
      const Graph g = n > 1 ? generate_graph(n, 0.5, k) : Graph(1, {});
      const auto f = fit_window(w, g, GnarSpec::constant(c, p, 0));
      const auto path = forecast(f, g, w, 12);
      for (int i = 0; i < n; ++i) {
        const ArFit ar = ar_fit(x.col(i), p);
        EXPECT_LT((f.alpha.row(i).transpose() - ar.coef).cwiseAbs().maxCoeff(), 1e-8);
        EXPECT_LT((path.values.col(i) - ar_forecast(ar, x.col(i), 12)).cwiseAbs().maxCoeff(), 1e-8);
      }
    }
  }
}

TEST(Fit, GlobalAlphaOnIdenticalCopies) {
  Eigen::MatrixXd x(50, 4);
  const Eigen::MatrixXd one = simulate_gnar(test_coefficients(GnarSpec::constant(ParamClass::standard, 2, 0), 1),
                                            Graph(1, {}), 50, 1.0, 3, 20);
  for (int i = 0; i < 4; ++i) x.col(i) = one.col(0);
  const auto panel = make_panel(x);
  const auto f = fit_window(window(panel, panel.dates.back(), 50, true), Graph(4, {}),
                            GnarSpec::constant(ParamClass::global_alpha, 2, 0));
  const ArFit ar = ar_fit(one.col(0), 2);
  EXPECT_LT((f.alpha.row(0).transpose() - ar.coef).cwiseAbs().maxCoeff(), 1e-10);
}

// Hand-built per-node regression with stage-1 averages from graph.neighbours.
Eigen::VectorXd direct_local_fit(const Eigen::MatrixXd& x, const Graph& g, int node, int p) {
  const auto& nb = g.neighbours(node);
  const Eigen::Index rows = x.rows() - p;
  Eigen::MatrixXd design(rows, 2 * p);
  Eigen::VectorXd y(rows);
  for (Eigen::Index t = p; t < x.rows(); ++t) {
    y(t - p) = x(t, node);
    for (int j = 1; j <= p; ++j) {
      design(t - p, j - 1) = x(t - j, node);
      double avg = 0.0;
      for (int q : nb) avg += x(t - j, q);
      design(t - p, p + j - 1) = avg / static_cast<double>(nb.size());
    }
  }
  return design.householderQr().solve(y);
}

TEST(Fit, LocalMatchesIndependentRegressions) {
  const Graph g = ring_graph(7, {{0, 3}, {2, 5}});
  const GnarSpec spec = GnarSpec::constant(ParamClass::local_alpha_beta, 2, 1);
  const Eigen::MatrixXd x = simulate_gnar(test_coefficients(spec, 7), g, 90, 1.0, 21, 40);
  const auto f = fit_window(raw_window(x), g, spec);
  const auto dense = fit_stacked_dense(build_design(raw_window(x), g, spec, {0, 1, 2, 3, 4, 5, 6}));
  for (int i = 0; i < 7; ++i) {
    const Eigen::VectorXd d = direct_local_fit(x, g, i, 2);
    EXPECT_LT((f.alpha.row(i).transpose() - d.head(2)).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LT((f.beta.row(i).transpose() - d.tail(2)).cwiseAbs().maxCoeff(), 1e-10);
    const auto single = fit_window(raw_window(x), g, spec, {i});
    EXPECT_LT((single.alpha.row(i) - f.alpha.row(i)).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_EQ(single.fitted_nodes, std::vector<int>{i});
  }
  EXPECT_LT(max_abs(f.alpha - dense.alpha), 1e-10);
  EXPECT_LT(max_abs(f.beta - dense.beta), 1e-10);
}

TEST(Fit, SharedClassesMatchDenseStackedSolver) {
  const Graph g = ring_graph(9, {{0, 4}, {3, 7}});
  for (ParamClass c : {ParamClass::global_alpha, ParamClass::standard}) {
    const GnarSpec spec{c, 3, {2, 1, 1}};
    const Eigen::MatrixXd x = simulate_gnar(test_coefficients(spec, 9), g, 120, 1.0, 8, 40);
    const auto prob = build_design(window(make_panel(x), make_panel(x).dates.back(), 120, true), g, spec,
                                   {0, 1, 2, 3, 4, 5, 6, 7, 8});
    const auto a = fit(prob), b = fit_stacked_dense(prob);
    EXPECT_LT(max_abs(a.alpha - b.alpha), 1e-8) << class_name(c);
    EXPECT_LT(max_abs(a.beta - b.beta), 1e-8) << class_name(c);
    EXPECT_LT(max_abs(a.residual_variance - b.residual_variance), 1e-8) << class_name(c);
  }
}

TEST(Fit, ResidualsOrthogonalToDesign) {
  const Graph g = ring_graph(6, {{1, 4}});
  for (ParamClass c : kClasses) {
    const GnarSpec spec{c, 2, {2, 1}};
    const Eigen::MatrixXd x = simulate_gnar(test_coefficients(spec, 6), g, 100, 1.0, 12, 40);
    const auto prob = build_design(raw_window(x), g, spec, {0, 1, 2, 3, 4, 5});
    const auto f = fit(prob);
    Eigen::VectorXd shared_alpha = Eigen::VectorXd::Zero(spec.p), shared_beta = Eigen::VectorXd::Zero(spec.beta_count());
    double scale = 0.0;
    for (const auto& b : prob.blocks) {
      const Eigen::VectorXd a = f.alpha.row(f.alpha_shared() ? 0 : b.node).transpose();
      const Eigen::VectorXd be = f.beta.row(f.beta_shared() ? 0 : b.node).transpose();
      const Eigen::VectorXd r = b.y - b.own * a - b.neighbour * be;
      scale = std::max(scale, b.y.squaredNorm());
      const Eigen::VectorXd ga = b.own.transpose() * r, gb = b.neighbour.transpose() * r;
      if (f.alpha_shared()) shared_alpha += ga;
      else EXPECT_LT(ga.cwiseAbs().maxCoeff(), 1e-8 * scale);
      if (f.beta_shared()) shared_beta += gb;
      else EXPECT_LT(gb.cwiseAbs().maxCoeff(), 1e-8 * scale);
      EXPECT_GE(f.residual_variance(b.node), 0.0);
    }
    EXPECT_LT(shared_alpha.cwiseAbs().maxCoeff(), 1e-8 * scale) << class_name(c);
    EXPECT_LT(shared_beta.cwiseAbs().maxCoeff(), 1e-8 * scale) << class_name(c);
  }
}

TEST(Fit, ShiftingOneIsolatedNodeOnlyMovesItsMean) {
  const Graph g(6, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 0}});  // node 5 isolated
  for (ParamClass c : kClasses) {
    const GnarSpec spec = GnarSpec::constant(c, 2, 1);
    const Eigen::MatrixXd x = simulate_gnar(test_coefficients(spec, 6), g, 80, 1.0, 4, 30);
    Eigen::MatrixXd shifted = x;
    shifted.col(5).array() += 7.25;
    const auto pa = make_panel(x), pb = make_panel(shifted);
    const auto wa = window(pa, pa.dates.back(), 80, true), wb = window(pb, pb.dates.back(), 80, true);
    const auto fa = fit_window(wa, g, spec), fb = fit_window(wb, g, spec);
    EXPECT_LT(max_abs(fa.alpha - fb.alpha), 1e-9) << class_name(c);
    EXPECT_LT(max_abs(fa.beta - fb.beta), 1e-9) << class_name(c);
    EXPECT_NEAR(fb.node_means(5) - fa.node_means(5), 7.25, 1e-12);
    EXPECT_LT(max_abs(fa.node_means.head(5) - fb.node_means.head(5)), 1e-15);
    const auto ya = forecast(fa, g, wa, 6), yb = forecast(fb, g, wb, 6);
    EXPECT_LT((yb.values.col(5).array() - ya.values.col(5).array() - 7.25).abs().maxCoeff(), 1e-9);
    EXPECT_LT(max_abs(ya.values.leftCols(5) - yb.values.leftCols(5)), 1e-9);
  }
}

TEST(Fit, UnderdeterminedNamesNodeAndSpec) {
  const Eigen::MatrixXd x = Eigen::MatrixXd::Random(4, 3);
  try {
    fit_window(raw_window(x), ring_graph(3), GnarSpec::constant(ParamClass::local_alpha_beta, 3, 1));
    FAIL() << "expected UnderdeterminedError";
  } catch (const UnderdeterminedError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("node 0"), std::string::npos) << what;
    EXPECT_NE(what.find("GNAR(3,[1,1,1])"), std::string::npos) << what;
  }
}

TEST(Fit, CollinearNeighbourAveragesUseRidge) {
  // Node 0 sees node 1 at stage 1 and node 2 at stage 2; both carry the same series.
  Eigen::MatrixXd x = Eigen::MatrixXd::Random(40, 3);
  x.col(2) = x.col(1);
  const auto f = fit_window(raw_window(x), Graph(3, {{0, 1}, {1, 2}}), GnarSpec::constant(ParamClass::local_alpha_beta, 1, 2),
                            {0});
  EXPECT_TRUE(f.ridge);
  EXPECT_TRUE(f.alpha.row(0).allFinite());
  EXPECT_TRUE(f.beta.row(0).allFinite());
}

TEST(Fit, SerialisationRoundTrip) {
  const Graph g = ring_graph(5);
  for (ParamClass c : kClasses) {
    const GnarSpec spec{c, 2, {1, 2}};
    const Eigen::MatrixXd x = simulate_gnar(test_coefficients(spec, 5), g, 60, 1.0, 2, 10);
    const auto panel = make_panel(x);
    auto f = fit_window(window(panel, panel.dates.back(), 60, true), g, spec, {}, "g17");
    std::stringstream ss;
    write_fit(ss, f);
    const auto back = read_fit(ss);
    EXPECT_EQ(back.spec, f.spec);
    EXPECT_EQ(back.graph_id, "g17");
    EXPECT_EQ(back.alpha, f.alpha);
    EXPECT_EQ(back.beta, f.beta);
    EXPECT_EQ(back.node_means, f.node_means);
    EXPECT_EQ(back.residual_variance, f.residual_variance);
    EXPECT_EQ(back.fitted_nodes, f.fitted_nodes);
    EXPECT_EQ(back.ridge, f.ridge);
  }
}

}  // namespace
}  // namespace ragnar
