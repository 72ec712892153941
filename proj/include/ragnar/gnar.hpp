#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "ragnar/errors.hpp"
#include "ragnar/graph.hpp"
#include "ragnar/least_squares.hpp"
#include "ragnar/panel.hpp"
#include "ragnar/text.hpp"
#include "ragnar/year_month.hpp"

namespace ragnar {

/// Coefficient sharing pattern.
///  - global_alpha: alpha_j and beta_{j,r} shared by every node
///  - standard: alpha_{i,j} per node, beta_{j,r} shared
///  - local_alpha_beta: every coefficient per node
enum class ParamClass { global_alpha, standard, local_alpha_beta };

inline const char* class_name(ParamClass c) {
  switch (c) {
    case ParamClass::global_alpha: return "global_alpha";
    case ParamClass::standard: return "standard";
    case ParamClass::local_alpha_beta: return "local_alpha_beta";
  }
  return "";
}

inline ParamClass parse_class(std::string_view s) {
  s = text::trim(s);
  if (s == "global_alpha" || s == "global") return ParamClass::global_alpha;
  if (s == "standard" || s == "local_alpha") return ParamClass::standard;
  if (s == "local_alpha_beta" || s == "local_ab") return ParamClass::local_alpha_beta;
  throw DomainError("unknown parameter class '" + std::string(s) + "'");
}

/// GNAR(p, s) order: p own lags; at lag j, neighbour stages 1..s[j-1].
struct GnarSpec {
  ParamClass param_class = ParamClass::local_alpha_beta;
  int p = 1;
  std::vector<int> s{1};
  bool target_only = false;

  static GnarSpec constant(ParamClass c, int p, int stage, bool target_only = false) {
    if (p < 1) throw DomainError("lag order p must be at least 1");
    if (stage < 0) throw DomainError("neighbour stage must be non-negative");
    return GnarSpec{c, p, std::vector<int>(p, stage), target_only};
  }

  void validate() const {
    if (p < 1) throw DomainError("lag order p must be at least 1");
    if (static_cast<int>(s.size()) != p)
      throw DomainError("stage vector has length " + std::to_string(s.size()) + ", expected p = " + std::to_string(p));
    for (int v : s)
      if (v < 0) throw DomainError("neighbour stages must be non-negative");
  }

  int max_stage() const { return s.empty() ? 0 : *std::max_element(s.begin(), s.end()); }
  int beta_count() const { return std::accumulate(s.begin(), s.end(), 0); }

  /// Column of beta_{j,r} (1-based j and r) in the neighbour block.
  int beta_index(int j, int r) const {
    int off = 0;
    for (int k = 0; k < j - 1; ++k) off += s[k];
    return off + r - 1;
  }

  /// "GNAR(2,[1,1])" plus the class.
  std::string str() const {
    std::string out = std::string(class_name(param_class)) + " GNAR(" + std::to_string(p) + ",[";
    for (std::size_t k = 0; k < s.size(); ++k) out += (k ? "," : "") + std::to_string(s[k]);
    return out + "])";
  }

  friend bool operator==(const GnarSpec&, const GnarSpec&) = default;
};

/// Number of free coefficients (no intercepts: series are demeaned).
inline long param_count(const GnarSpec& spec, int n_nodes) {
  const long p = spec.p, sum_s = spec.beta_count(), n = n_nodes;
  switch (spec.param_class) {
    case ParamClass::global_alpha: return p + sum_s;
    case ParamClass::standard: return n * p + sum_s;
    case ParamClass::local_alpha_beta: return n * (p + sum_s);
  }
  return 0;
}

/// Per-node regression block: y_i(t) on own lags and lagged stage averages.
/// Neighbour columns whose stage set is empty are zero and flagged absent.
struct NodeBlock {
  int node = 0;
  Eigen::VectorXd y;
  Eigen::MatrixXd own;       // rows x p
  Eigen::MatrixXd neighbour; // rows x beta_count
  std::vector<char> present; // per neighbour column
};

struct RegressionProblem {
  GnarSpec spec;
  int n_nodes = 0;
  std::string graph_id;
  Eigen::VectorXd means;
  std::vector<NodeBlock> blocks;
};

/// Plain average of the member columns of `x` (zero when empty).
inline Eigen::VectorXd stage_average(const Eigen::MatrixXd& x, const std::vector<int>& members) {
  Eigen::VectorXd avg = Eigen::VectorXd::Zero(x.rows());
  if (members.empty()) return avg;
  for (int q : members) avg += x.col(q);
  return avg / static_cast<double>(members.size());
}

/// Regression block for node i of the (possibly demeaned) window `x`.
/// `nb` must cover the spec's deepest stage rooted at i.
inline NodeBlock build_node_block(const Eigen::MatrixXd& x, const StagedNeighbourhood& nb, const GnarSpec& spec,
                                  int i) {
  const int rows = static_cast<int>(x.rows()) - spec.p;
  const int n_beta = spec.beta_count();
  const int max_stage = spec.max_stage();
  NodeBlock b;
  b.node = i;
  b.y = x.col(i).tail(rows);
  b.own.resize(rows, spec.p);
  for (int j = 1; j <= spec.p; ++j) b.own.col(j - 1) = x.col(i).segment(spec.p - j, rows);
  b.neighbour = Eigen::MatrixXd::Zero(rows, n_beta);
  b.present.assign(n_beta, 0);
  if (max_stage > nb.max_stage()) throw DomainError("neighbourhood shallower than the spec's stages");
  for (int r = 1; r <= max_stage; ++r) {
    const auto& members = nb.stage(r);
    if (members.empty()) continue;
    const Eigen::VectorXd avg = stage_average(x, members);
    for (int j = 1; j <= spec.p; ++j) {
      if (spec.s[j - 1] < r) continue;
      const int c = spec.beta_index(j, r);
      b.neighbour.col(c) = avg.segment(spec.p - j, rows);
      b.present[c] = 1;
    }
  }
  return b;
}

inline RegressionProblem build_design(const PanelWindow& window, const Graph& graph, const GnarSpec& spec,
                                      const std::vector<int>& targets, std::string graph_id = {}) {
  spec.validate();
  const Eigen::MatrixXd& x = window.values;
  const int n = static_cast<int>(x.cols());
  if (graph.n_nodes() != n)
    throw ShapeError("graph has " + std::to_string(graph.n_nodes()) + " nodes but window has " + std::to_string(n) +
                     " series");
  const int length = static_cast<int>(x.rows());
  if (length < spec.p + 1)
    throw RangeError("window of length " + std::to_string(length) + " too short for p = " + std::to_string(spec.p));
  const int max_stage = spec.max_stage();

  RegressionProblem prob;
  prob.spec = spec;
  prob.n_nodes = n;
  prob.graph_id = std::move(graph_id);
  prob.means = window.demeaned ? window.means : Eigen::VectorXd::Zero(n);
  for (int i : targets) {
    if (i < 0 || i >= n) throw RangeError("target node " + std::to_string(i) + " out of range");
    const auto nb = max_stage > 0 ? neighbour_sets(graph, i, max_stage) : StagedNeighbourhood{i, {}};
    prob.blocks.push_back(build_node_block(x, nb, spec, i));
  }
  return prob;
}

/// Fitted coefficients. Shared coefficients are stored with one row, per-node
/// ones with n_nodes rows (NaN for nodes that were not fitted). Absent
/// neighbour terms (empty stage set) are stored as 0.
struct GnarFit {
  GnarSpec spec;
  int n_nodes = 0;
  std::string graph_id;
  Eigen::MatrixXd alpha;  // 1 x p or n x p
  Eigen::MatrixXd beta;   // 1 x B or n x B
  Eigen::VectorXd residual_variance;
  Eigen::VectorXd node_means;
  std::vector<int> fitted_nodes;
  bool ridge = false;

  bool alpha_shared() const { return spec.param_class == ParamClass::global_alpha; }
  bool beta_shared() const { return spec.param_class != ParamClass::local_alpha_beta; }
  double alpha_at(int node, int j) const { return alpha(alpha_shared() ? 0 : node, j - 1); }
  double beta_at(int node, int j, int r) const { return beta(beta_shared() ? 0 : node, spec.beta_index(j, r)); }
};

namespace detail {

inline std::vector<int> active_columns(const std::vector<char>& present) {
  std::vector<int> cols;
  for (int c = 0; c < static_cast<int>(present.size()); ++c)
    if (present[c]) cols.push_back(c);
  return cols;
}

inline Eigen::MatrixXd select_columns(const Eigen::MatrixXd& m, const std::vector<int>& cols) {
  Eigen::MatrixXd out(m.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) out.col(static_cast<Eigen::Index>(k)) = m.col(cols[k]);
  return out;
}

inline std::vector<char> union_present(const RegressionProblem& prob) {
  std::vector<char> any(prob.spec.beta_count(), 0);
  for (const auto& b : prob.blocks)
    for (std::size_t c = 0; c < any.size(); ++c) any[c] = any[c] || b.present[c];
  return any;
}

inline GnarFit empty_fit(const RegressionProblem& prob) {
  GnarFit fit;
  fit.spec = prob.spec;
  fit.n_nodes = prob.n_nodes;
  fit.graph_id = prob.graph_id;
  fit.node_means = prob.means;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const int n = prob.n_nodes, p = prob.spec.p, nb = prob.spec.beta_count();
  fit.alpha = Eigen::MatrixXd::Constant(fit.alpha_shared() ? 1 : n, p, nan);
  fit.beta = Eigen::MatrixXd::Constant(fit.beta_shared() ? 1 : n, nb, nan);
  fit.residual_variance = Eigen::VectorXd::Constant(n, nan);
  for (const auto& b : prob.blocks) fit.fitted_nodes.push_back(b.node);
  return fit;
}

inline std::string underdetermined(const RegressionProblem& prob, const std::string& where, long rows, long cols) {
  return prob.spec.str() + " on graph '" + prob.graph_id + "': " + where + " has " + std::to_string(rows) +
         " rows for " + std::to_string(cols) + " coefficients";
}

// Fills per-node residual variances from the final coefficients.
inline void finish_residuals(const RegressionProblem& prob, GnarFit& fit) {
  for (const auto& b : prob.blocks) {
    Eigen::VectorXd a(prob.spec.p), be(prob.spec.beta_count());
    for (int j = 1; j <= prob.spec.p; ++j) a(j - 1) = fit.alpha_at(b.node, j);
    for (int c = 0; c < be.size(); ++c) be(c) = fit.beta(fit.beta_shared() ? 0 : b.node, c);
    const Eigen::VectorXd resid = b.y - b.own * a - b.neighbour * be;
    long k = prob.spec.p;
    for (char pr : b.present) k += pr;
    const long dof = static_cast<long>(b.y.size()) - k;
    fit.residual_variance(b.node) = resid.squaredNorm() / static_cast<double>(dof > 0 ? dof : b.y.size());
  }
}

}  // namespace detail

/// Least-squares fit under the class's sharing pattern.
///  - local_alpha_beta: independent per-node regressions.
///  - standard: shared betas from the stacked problem after projecting out
///    each node's own-lag block, then per-node alphas (Frisch-Waugh-Lovell).
///  - global_alpha: one stacked regression.
inline GnarFit fit(const RegressionProblem& prob) {
  GnarFit out = detail::empty_fit(prob);
  const int p = prob.spec.p;
  const int n_beta = prob.spec.beta_count();
  if (prob.blocks.empty()) throw DomainError("no target nodes to fit");

  switch (prob.spec.param_class) {
    case ParamClass::local_alpha_beta: {
      for (const auto& b : prob.blocks) {
        const auto cols = detail::active_columns(b.present);
        const long k = p + static_cast<long>(cols.size());
        if (b.y.size() < k) throw UnderdeterminedError(detail::underdetermined(prob, "node " + std::to_string(b.node), b.y.size(), k));
        Eigen::MatrixXd x(b.y.size(), k);
        x << b.own, detail::select_columns(b.neighbour, cols);
        const auto sol = solve_least_squares(x, b.y);
        out.ridge = out.ridge || sol.ridge;
        out.alpha.row(b.node) = sol.coef.head(p).transpose();
        out.beta.row(b.node).setZero();
        for (std::size_t c = 0; c < cols.size(); ++c) out.beta(b.node, cols[c]) = sol.coef(p + static_cast<Eigen::Index>(c));
      }
      break;
    }
    case ParamClass::standard: {
      const auto cols = detail::active_columns(detail::union_present(prob));
      const long kb = static_cast<long>(cols.size());
      long total_rows = 0;
      for (const auto& b : prob.blocks) {
        if (b.y.size() < p) throw UnderdeterminedError(detail::underdetermined(prob, "node " + std::to_string(b.node), b.y.size(), p));
        total_rows += b.y.size();
      }
      const long total_cols = static_cast<long>(prob.blocks.size()) * p + kb;
      if (total_rows < total_cols) throw UnderdeterminedError(detail::underdetermined(prob, "stacked design", total_rows, total_cols));
      Eigen::VectorXd beta_active = Eigen::VectorXd::Zero(kb);
      std::vector<Eigen::ColPivHouseholderQR<Eigen::MatrixXd>> own_qr;
      own_qr.reserve(prob.blocks.size());
      for (const auto& b : prob.blocks) own_qr.emplace_back(b.own);
      if (kb > 0) {
        Eigen::MatrixXd bz(total_rows, kb);
        Eigen::VectorXd yz(total_rows);
        long row = 0;
        for (std::size_t k = 0; k < prob.blocks.size(); ++k) {
          const auto& b = prob.blocks[k];
          const auto& qr = own_qr[k];
          const Eigen::Index m = b.y.size(), rank = qr.rank();
          const Eigen::MatrixXd q = Eigen::MatrixXd(qr.householderQ()).leftCols(rank);
          const Eigen::MatrixXd nb = detail::select_columns(b.neighbour, cols);
          bz.middleRows(row, m) = nb - q * (q.transpose() * nb);
          yz.segment(row, m) = b.y - q * (q.transpose() * b.y);
          row += m;
        }
        const auto sol = solve_least_squares(bz, yz);
        out.ridge = out.ridge || sol.ridge;
        beta_active = sol.coef;
      }
      out.beta.row(0).setZero();
      for (long c = 0; c < kb; ++c) out.beta(0, cols[c]) = beta_active(c);
      for (std::size_t k = 0; k < prob.blocks.size(); ++k) {
        const auto& b = prob.blocks[k];
        const Eigen::VectorXd partial = b.y - detail::select_columns(b.neighbour, cols) * beta_active;
        Eigen::VectorXd a;
        if (own_qr[k].rank() == p) {
          a = own_qr[k].solve(partial);
        } else {
          const auto sol = solve_least_squares(b.own, partial);
          out.ridge = out.ridge || sol.ridge;
          a = sol.coef;
        }
        out.alpha.row(b.node) = a.transpose();
      }
      break;
    }
    case ParamClass::global_alpha: {
      const auto cols = detail::active_columns(detail::union_present(prob));
      const long k = p + static_cast<long>(cols.size());
      long total_rows = 0;
      for (const auto& b : prob.blocks) total_rows += b.y.size();
      if (total_rows < k) throw UnderdeterminedError(detail::underdetermined(prob, "stacked design", total_rows, k));
      Eigen::MatrixXd x(total_rows, k);
      Eigen::VectorXd y(total_rows);
      long row = 0;
      for (const auto& b : prob.blocks) {
        const Eigen::Index m = b.y.size();
        x.block(row, 0, m, p) = b.own;
        x.block(row, p, m, k - p) = detail::select_columns(b.neighbour, cols);
        y.segment(row, m) = b.y;
        row += m;
      }
      const auto sol = solve_least_squares(x, y);
      out.ridge = sol.ridge;
      out.alpha.row(0) = sol.coef.head(p).transpose();
      out.beta.row(0).setZero();
      for (std::size_t c = 0; c < cols.size(); ++c) out.beta(0, cols[c]) = sol.coef(p + static_cast<Eigen::Index>(c));
      break;
    }
  }
  (void)n_beta;
  detail::finish_residuals(prob, out);
  return out;
}

/// Reference solver: materialises the full stacked design with explicit
/// per-node and shared columns and solves it in one least-squares call.
/// Slow; used to cross-check fit().
inline GnarFit fit_stacked_dense(const RegressionProblem& prob) {
  GnarFit out = detail::empty_fit(prob);
  const int p = prob.spec.p;
  const int nb = prob.spec.beta_count();
  const long n_blocks = static_cast<long>(prob.blocks.size());
  const bool alpha_shared = out.alpha_shared(), beta_shared = out.beta_shared();
  const auto shared_cols = detail::active_columns(detail::union_present(prob));
  const long alpha_cols = alpha_shared ? p : n_blocks * p;
  std::vector<std::vector<int>> node_cols;
  long beta_cols = 0;
  if (beta_shared) {
    beta_cols = static_cast<long>(shared_cols.size());
  } else {
    for (const auto& b : prob.blocks) {
      node_cols.push_back(detail::active_columns(b.present));
      beta_cols += static_cast<long>(node_cols.back().size());
    }
  }
  long total_rows = 0;
  for (const auto& b : prob.blocks) total_rows += b.y.size();
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(total_rows, alpha_cols + beta_cols);
  Eigen::VectorXd y(total_rows);
  long row = 0, beta_off = alpha_cols;
  for (long k = 0; k < n_blocks; ++k) {
    const auto& b = prob.blocks[k];
    const Eigen::Index m = b.y.size();
    x.block(row, alpha_shared ? 0 : k * p, m, p) = b.own;
    if (beta_shared) {
      x.block(row, alpha_cols, m, beta_cols) = detail::select_columns(b.neighbour, shared_cols);
    } else {
      const auto& cols = node_cols[k];
      x.block(row, beta_off, m, static_cast<long>(cols.size())) = detail::select_columns(b.neighbour, cols);
      beta_off += static_cast<long>(cols.size());
    }
    y.segment(row, m) = b.y;
    row += m;
  }
  const auto sol = solve_least_squares(x, y);
  out.ridge = sol.ridge;
  beta_off = alpha_cols;
  for (long k = 0; k < n_blocks; ++k) {
    const int node = prob.blocks[k].node;
    if (alpha_shared) out.alpha.row(0) = sol.coef.head(p).transpose();
    else out.alpha.row(node) = sol.coef.segment(k * p, p).transpose();
    if (beta_shared) {
      out.beta.row(0).setZero();
      for (std::size_t c = 0; c < shared_cols.size(); ++c) out.beta(0, shared_cols[c]) = sol.coef(alpha_cols + static_cast<long>(c));
    } else {
      out.beta.row(node).setZero();
      for (std::size_t c = 0; c < node_cols[k].size(); ++c) out.beta(node, node_cols[k][c]) = sol.coef(beta_off + static_cast<long>(c));
      beta_off += static_cast<long>(node_cols[k].size());
    }
  }
  (void)nb;
  detail::finish_residuals(prob, out);
  return out;
}

/// Fits the spec on the window for `targets` (all nodes when empty).
inline GnarFit fit_window(const PanelWindow& window, const Graph& graph, const GnarSpec& spec,
                          std::vector<int> targets = {}, std::string graph_id = {}) {
  if (targets.empty()) {
    targets.resize(window.values.cols());
    std::iota(targets.begin(), targets.end(), 0);
  }
  return fit(build_design(window, graph, spec, targets, std::move(graph_id)));
}

/// Forecasts for horizons 1..H on the original scale; values(h-1, i).
struct ForecastPath {
  YearMonth origin;
  Eigen::MatrixXd values;

  int horizons() const { return static_cast<int>(values.rows()); }
  double at(int h, int node) const { return values(h - 1, node); }
};

/// Iterated forecasts. `history` holds original-scale observations (rows are
/// consecutive months ending at the origin, at least p of them). Each step
/// demeans with the fit's stored means and appends its own re-centred output,
/// so one H-step call equals H successive one-step calls.
inline ForecastPath forecast(const GnarFit& fit, const Graph& graph, const Eigen::MatrixXd& history, int horizon,
                             YearMonth origin = {}) {
  if (horizon < 1) throw DomainError("forecast horizon must be at least 1");
  const int n = fit.n_nodes, p = fit.spec.p;
  if (history.cols() != n) throw ShapeError("history has " + std::to_string(history.cols()) + " series, fit has " + std::to_string(n));
  if (graph.n_nodes() != n) throw ShapeError("graph node count does not match fit");
  if (history.rows() < p) throw RangeError("history shorter than p = " + std::to_string(p));
  if (horizon > 1 && static_cast<int>(fit.fitted_nodes.size()) != n)
    throw DomainError("multi-step forecasts need a fit covering every node");

  const int max_stage = fit.spec.max_stage();
  std::vector<StagedNeighbourhood> nbs;
  for (int i : fit.fitted_nodes) nbs.push_back(max_stage > 0 ? neighbour_sets(graph, i, max_stage) : StagedNeighbourhood{i, {}});

  // Demeaned rolling buffer; row p-1 is the latest observation.
  Eigen::MatrixXd buf(p, n);
  for (int k = 0; k < p; ++k)
    for (int q = 0; q < n; ++q) buf(k, q) = history(history.rows() - p + k, q) - fit.node_means(q);

  ForecastPath out;
  out.origin = origin;
  out.values = Eigen::MatrixXd::Constant(horizon, n, std::numeric_limits<double>::quiet_NaN());
  Eigen::RowVectorXd next(n);
  for (int h = 1; h <= horizon; ++h) {
    next.setConstant(std::numeric_limits<double>::quiet_NaN());
    for (std::size_t f = 0; f < fit.fitted_nodes.size(); ++f) {
      const int i = fit.fitted_nodes[f];
      double pred = 0.0;
      for (int j = 1; j <= p; ++j) {
        const auto lag_row = buf.row(p - j);
        pred += fit.alpha_at(i, j) * lag_row(i);
        for (int r = 1; r <= fit.spec.s[j - 1]; ++r) {
          const auto& members = nbs[f].stage(r);
          if (members.empty()) continue;
          double avg = 0.0;
          for (int q : members) avg += lag_row(q);
          avg /= static_cast<double>(members.size());
          pred += fit.beta_at(i, j, r) * avg;
        }
      }
      out.values(h - 1, i) = pred + fit.node_means(i);
    }
    if (h == horizon) break;
    for (int q = 0; q < n; ++q) next(q) = out.values(h - 1, q) - fit.node_means(q);
    if (p > 1) buf.topRows(p - 1) = buf.bottomRows(p - 1).eval();
    buf.row(p - 1) = next;
  }
  return out;
}

/// Forecast from a window; a demeaned window is restored to the original
/// scale first.
inline ForecastPath forecast(const GnarFit& fit, const Graph& graph, const PanelWindow& history, int horizon) {
  return forecast(fit, graph, history.raw(), horizon, history.end_date);
}

// Flat key=value serialisation. Matrices are row-major, comma-separated.

namespace detail {
inline std::string join_values(const Eigen::MatrixXd& m) {
  std::string out;
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (!out.empty()) out += ',';
      out += text::format_double(m(r, c));
    }
  return out;
}
inline Eigen::MatrixXd parse_values(const std::string& s, Eigen::Index rows, Eigen::Index cols) {
  const auto items = text::split_list(s);
  if (static_cast<Eigen::Index>(items.size()) != rows * cols) throw DataError("coefficient count mismatch in fit file");
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = text::parse_double(items[r * cols + c]);
  return m;
}
}  // namespace detail

inline void write_fit(std::ostream& os, const GnarFit& fit) {
  os << "class=" << class_name(fit.spec.param_class) << '\n';
  os << "p=" << fit.spec.p << '\n';
  os << "s=";
  for (std::size_t k = 0; k < fit.spec.s.size(); ++k) os << (k ? "," : "") << fit.spec.s[k];
  os << '\n';
  os << "target_only=" << (fit.spec.target_only ? 1 : 0) << '\n';
  os << "graph=" << fit.graph_id << '\n';
  os << "nodes=" << fit.n_nodes << '\n';
  os << "fitted=";
  for (std::size_t k = 0; k < fit.fitted_nodes.size(); ++k) os << (k ? "," : "") << fit.fitted_nodes[k];
  os << '\n';
  os << "ridge=" << (fit.ridge ? 1 : 0) << '\n';
  os << "alpha.rows=" << fit.alpha.rows() << '\n';
  os << "alpha=" << detail::join_values(fit.alpha) << '\n';
  os << "beta.rows=" << fit.beta.rows() << '\n';
  os << "beta.cols=" << fit.beta.cols() << '\n';
  os << "beta=" << detail::join_values(fit.beta) << '\n';
  os << "means=" << detail::join_values(fit.node_means.transpose()) << '\n';
  os << "residual_variance=" << detail::join_values(fit.residual_variance.transpose()) << '\n';
}

inline GnarFit read_fit(std::istream& is) {
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(is, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    kv[std::string(text::trim(line.substr(0, eq)))] = std::string(text::trim(line.substr(eq + 1)));
  }
  auto get = [&](const std::string& k) -> const std::string& {
    auto it = kv.find(k);
    if (it == kv.end()) throw DataError("fit file lacks key '" + k + "'");
    return it->second;
  };
  GnarFit fit;
  fit.spec.param_class = parse_class(get("class"));
  fit.spec.p = static_cast<int>(text::parse_int(get("p")));
  fit.spec.s.clear();
  for (const auto& v : text::split_list(get("s"))) fit.spec.s.push_back(static_cast<int>(text::parse_int(v)));
  fit.spec.target_only = get("target_only") == "1";
  fit.spec.validate();
  fit.graph_id = get("graph");
  fit.n_nodes = static_cast<int>(text::parse_int(get("nodes")));
  for (const auto& v : text::split_list(get("fitted"))) fit.fitted_nodes.push_back(static_cast<int>(text::parse_int(v)));
  fit.ridge = get("ridge") == "1";
  fit.alpha = detail::parse_values(get("alpha"), text::parse_int(get("alpha.rows")), fit.spec.p);
  fit.beta = detail::parse_values(get("beta"), text::parse_int(get("beta.rows")), text::parse_int(get("beta.cols")));
  fit.node_means = detail::parse_values(get("means"), 1, fit.n_nodes).transpose();
  fit.residual_variance = detail::parse_values(get("residual_variance"), 1, fit.n_nodes).transpose();
  return fit;
}

}  // namespace ragnar
