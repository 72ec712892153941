#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "ragnar/gnar.hpp"
#include "ragnar/graph.hpp"
#include "ragnar/panel.hpp"
#include "ragnar/rng.hpp"
#include "ragnar/text.hpp"
#include "ragnar/year_month.hpp"

namespace ragnar {

/// Simulated GNAR path. `coefficients` supplies alpha/beta under its class's
/// sharing pattern; node_means is the process mean. The first p rows are
/// drawn as mean + init_sd * N(0,1), then each step applies the one-step map
/// plus noise_sd * N(0,1). `burn_in` leading rows are discarded.
inline Eigen::MatrixXd simulate_gnar(const GnarFit& coefficients, const Graph& graph, int length, double noise_sd,
                                     std::uint64_t seed, int burn_in = 0, double init_sd = 1.0) {
  const int n = coefficients.n_nodes, p = coefficients.spec.p;
  if (length < 1) throw DomainError("simulation length must be at least 1");
  if (static_cast<int>(coefficients.fitted_nodes.size()) != n)
    throw DomainError("simulation needs coefficients for every node");
  Rng rng(seed);
  const int total = length + burn_in + p;
  Eigen::MatrixXd x(total, n);
  for (int t = 0; t < p; ++t)
    for (int i = 0; i < n; ++i) x(t, i) = coefficients.node_means(i) + init_sd * rng.normal();
  for (int t = p; t < total; ++t) {
    const auto step = forecast(coefficients, graph, Eigen::MatrixXd(x.middleRows(t - p, p)), 1);
    for (int i = 0; i < n; ++i) x(t, i) = step.values(0, i) + noise_sd * rng.normal();
  }
  return x.bottomRows(length);
}

/// Coefficient container for simulation: shared or per-node arrays filled
/// from the given rows.
inline GnarFit make_coefficients(const GnarSpec& spec, int n_nodes, const Eigen::MatrixXd& alpha,
                                 const Eigen::MatrixXd& beta, const Eigen::VectorXd& means = {}) {
  spec.validate();
  GnarFit f;
  f.spec = spec;
  f.n_nodes = n_nodes;
  f.alpha = alpha;
  f.beta = beta;
  if (alpha.rows() != (f.alpha_shared() ? 1 : n_nodes) || alpha.cols() != spec.p)
    throw ShapeError("alpha shape does not match " + spec.str());
  if (beta.rows() != (f.beta_shared() ? 1 : n_nodes) || beta.cols() != spec.beta_count())
    throw ShapeError("beta shape does not match " + spec.str());
  f.node_means = means.size() == 0 ? Eigen::VectorXd::Zero(n_nodes) : means;
  f.residual_variance = Eigen::VectorXd::Zero(n_nodes);
  for (int i = 0; i < n_nodes; ++i) f.fitted_nodes.push_back(i);
  return f;
}

struct FixtureOptions {
  int n_nodes = 12;
  YearMonth start{2000, 1};
  int months = 192;  // price months; rates start 12 months later
  std::uint64_t seed = 20240601;
  double edge_prob = 0.25;
  double noise_sd = 0.25;
};

/// Synthetic CPI-like panel in long CSV form. Rates follow a stationary
/// GNAR(2,[1,1]) on a fixed random graph with node 0 as the headline series;
/// index levels are rebuilt from the rates. One extra series is observed
/// only in January and must be excluded on load.
inline void write_fixture_csv(std::ostream& os, const FixtureOptions& opt = {}) {
  const int n = opt.n_nodes;
  const Graph truth = generate_graph(n, opt.edge_prob, derive_seed(opt.seed, 0));
  const GnarSpec spec{ParamClass::standard, 2, {1, 1}};
  Rng rng(derive_seed(opt.seed, 1));
  Eigen::MatrixXd alpha(n, 2), beta(1, 2);
  Eigen::VectorXd means(n);
  for (int i = 0; i < n; ++i) {
    alpha(i, 0) = 0.55 + 0.3 * rng.uniform();
    alpha(i, 1) = 0.05 + 0.1 * rng.uniform();
    means(i) = 1.0 + 3.0 * rng.uniform();
  }
  beta << 0.15, -0.05;
  const auto coef = make_coefficients(spec, n, alpha, beta, means);
  const int rate_months = opt.months - 12;
  const Eigen::MatrixXd rates = simulate_gnar(coef, truth, rate_months, opt.noise_sd, derive_seed(opt.seed, 2), 100);

  static const char* kLevels[] = {"overall", "division", "group", "class"};
  os << "series_id,date,value,label,level\n";
  for (int i = 0; i < n; ++i) {
    std::vector<double> level(opt.months);
    for (int t = 0; t < 12; ++t) level[t] = 100.0 + 2.0 * rng.uniform();
    for (int t = 12; t < opt.months; ++t) level[t] = level[t - 12] * (1.0 + rates(t - 12, i) / 100.0);
    char id[32];
    std::snprintf(id, sizeof id, "S%02d", i);
    const std::string label = i == 0 ? "All items" : "Component " + std::to_string(i);
    const char* lvl = i == 0 ? kLevels[0] : kLevels[1 + (i % 3)];
    for (int t = 0; t < opt.months; ++t)
      os << id << ',' << (opt.start + t).str() << ',' << text::format_fixed(level[t], 4) << ','
         << text::csv_field(label) << ',' << lvl << '\n';
  }
  for (int t = 0; t < opt.months; t += 12)
    os << "ANNUAL," << (opt.start + t).str() << ',' << text::format_fixed(100.0 + t / 12.0, 4)
       << ",Annual weights,class\n";
}

}  // namespace ragnar
