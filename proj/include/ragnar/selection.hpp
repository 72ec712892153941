#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <compare>
#include <limits>
#include <map>
#include <numeric>
#include <string>
#include <tuple>
#include <vector>

#include "ragnar/errors.hpp"
#include "ragnar/gnar.hpp"
#include "ragnar/graph.hpp"
#include "ragnar/least_squares.hpp"
#include "ragnar/panel.hpp"
#include "ragnar/parallel.hpp"
#include "ragnar/year_month.hpp"

namespace ragnar {

/// GNAR(p, s) with the same stage s at every lag.
struct MemberSpec {
  int p = 1;
  int s = 1;

  GnarSpec spec(ParamClass c, bool target_only = false) const { return GnarSpec::constant(c, p, s, target_only); }
  std::string str() const { return "GNAR(" + std::to_string(p) + "," + std::to_string(s) + ")"; }
  friend auto operator<=>(const MemberSpec&, const MemberSpec&) = default;
};

/// Members whose forecasts are averaged with equal weight: one member for a
/// plain GNAR model, the P x S grid for AvGNAR.
using ModelMembers = std::vector<MemberSpec>;

inline ModelMembers member_grid(const std::vector<int>& orders, const std::vector<int>& stages) {
  ModelMembers out;
  for (int p : orders)
    for (int s : stages) out.push_back({p, s});
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

/// Root-mean-square of the errors; +inf if any error is non-finite or the
/// buffer is empty.
inline double buffer_rmse(const std::vector<double>& errors) {
  if (errors.empty()) return std::numeric_limits<double>::infinity();
  double ss = 0.0;
  for (double e : errors) {
    if (!std::isfinite(e)) return std::numeric_limits<double>::infinity();
    ss += e * e;
  }
  const double r = std::sqrt(ss / static_cast<double>(errors.size()));
  return std::isfinite(r) ? r : std::numeric_limits<double>::infinity();
}

/// Rolling one-step errors at one node for every graph of an ensemble,
/// ranked by RMSE (ties by graph id). Graph ids are ensemble indices.
struct RankingTable {
  YearMonth as_of;
  int node = 0;
  ModelMembers members;
  std::vector<std::vector<double>> errors;  // [graph][oldest..newest]
  std::vector<double> rmse;                 // [graph]
  std::vector<int> order;                   // graph ids, best first

  int n_graphs() const { return static_cast<int>(rmse.size()); }

  /// 1-based rank of graph `id`.
  int rank_of(int id) const {
    const auto it = std::find(order.begin(), order.end(), id);
    if (it == order.end()) throw RangeError("graph id " + std::to_string(id) + " not ranked");
    return static_cast<int>(it - order.begin()) + 1;
  }

  std::vector<int> top(int n) const {
    if (n < 1 || n > n_graphs())
      throw DomainError("top " + std::to_string(n) + " requested from " + std::to_string(n_graphs()) + " graphs");
    return {order.begin(), order.begin() + n};
  }

  void sort() {
    order.resize(rmse.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return rmse[a] < rmse[b]; });
  }
};

/// One-step forecast at `node` from a target-only fit on the demeaned window
/// `w`. The single-node regression is the same for every parameter class.
inline double target_one_step(const PanelWindow& w, const StagedNeighbourhood& nb, const MemberSpec& m) {
  const GnarSpec spec = m.spec(ParamClass::local_alpha_beta, true);
  RegressionProblem prob;
  prob.spec = spec;
  prob.n_nodes = static_cast<int>(w.values.cols());
  prob.means = w.demeaned ? w.means : Eigen::VectorXd::Zero(prob.n_nodes);
  prob.blocks.push_back(build_node_block(w.values, nb, spec, nb.root));
  const NodeBlock& b = prob.blocks.front();
  const auto cols = detail::active_columns(b.present);
  const long k = m.p + static_cast<long>(cols.size());
  if (b.y.size() < k) return std::numeric_limits<double>::quiet_NaN();
  Eigen::MatrixXd x(b.y.size(), k);
  x << b.own, detail::select_columns(b.neighbour, cols);
  const auto sol = solve_least_squares(x, b.y);

  const Eigen::MatrixXd& v = w.values;
  const Eigen::Index last = v.rows() - 1;
  const int i = nb.root;
  double pred = 0.0;
  for (int j = 1; j <= m.p; ++j) pred += sol.coef(j - 1) * v(last + 1 - j, i);
  for (std::size_t c = 0; c < cols.size(); ++c) {
    const int col = cols[c];
    // Column index -> (lag j, stage r) for a constant stage vector.
    const int j = col / m.s + 1, r = col % m.s + 1;
    const auto& members = nb.stage(r);
    double avg = 0.0;
    for (int q : members) avg += v(last + 1 - j, q);
    pred += sol.coef(m.p + static_cast<Eigen::Index>(c)) * (avg / static_cast<double>(members.size()));
  }
  return pred + (w.demeaned ? w.means(i) : 0.0);
}

/// Scores graph ensembles by rolling one-step RMSE at a node. One-step
/// member forecasts are cached per (node, p, s, target month), so moving the
/// ranking date forward one month costs one new fit per graph and member.
class RankingEngine {
 public:
  RankingEngine(const Panel& panel, const std::vector<Graph>& graphs, int n_train, int n_val, unsigned threads = 1)
      : panel_(&panel), graphs_(&graphs), n_train_(n_train), n_val_(n_val), threads_(threads) {
    if (n_train < 2) throw DomainError("n_train must be at least 2");
    if (n_val < 1) throw DomainError("n_val must be at least 1");
    if (graphs.empty()) throw DomainError("empty graph ensemble");
    for (const auto& g : graphs)
      if (g.n_nodes() != panel.n_series())
        throw ShapeError("graph has " + std::to_string(g.n_nodes()) + " nodes, panel has " +
                         std::to_string(panel.n_series()) + " series");
  }

  // The engine keeps references; temporaries would dangle.
  RankingEngine(Panel&&, const std::vector<Graph>&, int, int, unsigned = 1) = delete;
  RankingEngine(const Panel&, std::vector<Graph>&&, int, int, unsigned = 1) = delete;

  int n_val() const { return n_val_; }
  int n_train() const { return n_train_; }
  const std::vector<Graph>& graphs() const { return *graphs_; }
  const Panel& panel() const { return *panel_; }

  /// Earliest ranking date with enough history.
  YearMonth earliest_as_of() const { return panel_->dates.front() + (n_train_ + n_val_ - 1); }

  /// Ranking of every graph at `as_of` for the averaged member forecast.
  RankingTable rank(const ModelMembers& members, YearMonth as_of, int node) {
    if (members.empty()) throw DomainError("ranking model has no members");
    check_history(as_of);
    const int g = static_cast<int>(graphs_->size());
    RankingTable table;
    table.as_of = as_of;
    table.node = node;
    table.members = members;
    table.errors.assign(g, std::vector<double>(n_val_));
    for (int k = 0; k < n_val_; ++k) {
      const YearMonth target = as_of - (n_val_ - 1 - k);
      const double actual = panel_->values(panel_->row_of(target), node);
      std::vector<double> avg(g, 0.0);
      for (const auto& m : members) {
        const auto& f = forecasts(node, m, target);
        for (int id = 0; id < g; ++id) avg[id] += f[id];
      }
      for (int id = 0; id < g; ++id)
        table.errors[id][k] = actual - avg[id] / static_cast<double>(members.size());
    }
    table.rmse.resize(g);
    for (int id = 0; id < g; ++id) table.rmse[id] = buffer_rmse(table.errors[id]);
    table.sort();
    return table;
  }

  /// Drops cached forecasts for target months before `first_kept`.
  void evict_before(YearMonth first_kept) {
    for (auto it = cache_.begin(); it != cache_.end();) {
      if (std::get<3>(it->first) < first_kept.index()) it = cache_.erase(it);
      else ++it;
    }
    for (auto it = windows_.begin(); it != windows_.end();) {
      if (it->first + 1 < first_kept.index()) it = windows_.erase(it);
      else ++it;
    }
  }

  std::size_t cached_forecasts() const { return cache_.size(); }

  /// One-step forecasts of `target` month at `node` for every graph.
  const std::vector<double>& forecasts(int node, const MemberSpec& m, YearMonth target) {
    const auto key = std::make_tuple(node, m.p, m.s, target.index());
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    const PanelWindow& w = window_ending(target - 1);
    const auto& nbs = neighbourhoods(node, m.s);
    std::vector<double> out(graphs_->size());
    parallel_for(out.size(), threads_, [&](std::size_t id) {
      const double f = target_one_step(w, nbs[id], m);
      out[id] = std::isfinite(f) ? f : std::numeric_limits<double>::quiet_NaN();
    });
    return cache_.emplace(key, std::move(out)).first->second;
  }

 private:
  void check_history(YearMonth as_of) const {
    if (panel_->row_of(as_of) < 0) throw RangeError("ranking date " + as_of.str() + " outside panel span");
    if (as_of < earliest_as_of())
      throw RangeError("ranking at " + as_of.str() + " needs " + std::to_string(n_train_ + n_val_) +
                       " months of history; earliest feasible date is " + earliest_as_of().str());
  }

  const PanelWindow& window_ending(YearMonth end) {
    if (auto it = windows_.find(end.index()); it != windows_.end()) return it->second;
    return windows_.emplace(end.index(), window(*panel_, end, n_train_, true)).first->second;
  }

  const std::vector<StagedNeighbourhood>& neighbourhoods(int node, int depth) {
    auto& slot = nbhd_[node];
    const int need = std::max(depth, 1);
    if (slot.empty() || slot.front().max_stage() < need) {
      slot.resize(graphs_->size());
      parallel_for(slot.size(), threads_, [&](std::size_t id) { slot[id] = neighbour_sets((*graphs_)[id], node, need); });
    }
    return slot;
  }

  const Panel* panel_;
  const std::vector<Graph>* graphs_;
  int n_train_, n_val_;
  unsigned threads_;
  std::map<std::tuple<int, int, int, int>, std::vector<double>> cache_;
  std::map<int, PanelWindow> windows_;
  std::map<int, std::vector<StagedNeighbourhood>> nbhd_;
};

/// From-scratch ranking at `as_of` (no state carried between calls).
inline RankingTable score_networks(const Panel& panel, const std::vector<Graph>& graphs, const ModelMembers& members,
                                   YearMonth as_of, int n_train, int n_val, unsigned threads = 1) {
  RankingEngine engine(panel, graphs, n_train, n_val, threads);
  return engine.rank(members, as_of, panel.target);
}

struct NetworkBic {
  double value = 0.0;
  bool degenerate = false;  // some top-K RMSE was exactly zero
};

/// Mean of 2 log RMSE over the K best graphs plus p (s + 1) log(n_val) / n_val.
inline NetworkBic network_bic(const RankingTable& ranking, int k, const MemberSpec& m, int n_val) {
  if (k < 1 || k > ranking.n_graphs())
    throw DomainError("K = " + std::to_string(k) + " outside [1, " + std::to_string(ranking.n_graphs()) + "]");
  if (n_val < 1) throw DomainError("n_val must be at least 1");
  double sum = 0.0;
  for (int r = 0; r < k; ++r) {
    const double e = ranking.rmse[ranking.order[r]];
    if (e == 0.0) return {-std::numeric_limits<double>::infinity(), true};
    sum += 2.0 * std::log(e);
  }
  const double nv = static_cast<double>(n_val);
  return {sum / k + static_cast<double>(m.p) * (m.s + 1) * std::log(nv) / nv, false};
}

/// K = round(fraction * G), at least 1.
inline int top_k(int n_graphs, double fraction) {
  return std::clamp(static_cast<int>(std::lround(fraction * n_graphs)), 1, n_graphs);
}

struct SpecSelection {
  MemberSpec chosen;
  NetworkBic bic;
  RankingTable ranking;  // ranking under the chosen spec
  std::vector<std::pair<MemberSpec, NetworkBic>> scores;
};

/// Candidate with the smallest network BIC; ties go to smaller p, then s.
inline SpecSelection select_spec(RankingEngine& engine, std::vector<MemberSpec> candidates, YearMonth as_of, int node,
                                 int k) {
  if (candidates.empty()) throw DomainError("no candidate specs");
  std::sort(candidates.begin(), candidates.end());
  SpecSelection out;
  bool first = true;
  for (const auto& m : candidates) {
    RankingTable t = engine.rank({m}, as_of, node);
    const NetworkBic bic = network_bic(t, k, m, engine.n_val());
    out.scores.emplace_back(m, bic);
    if (first || bic.value < out.bic.value) {
      out.chosen = m;
      out.bic = bic;
      out.ranking = std::move(t);
      first = false;
    }
  }
  return out;
}

/// Member paths keyed by (class, graph id, p, s) for one origin, shared
/// between model labels that reuse members.
using MemberPathCache = std::map<std::tuple<int, int, int, int>, ForecastPath>;

/// Full-model forecast path of one member on one graph from the n_train
/// window ending at `origin`.
inline ForecastPath member_path(const Panel& panel, const Graph& graph, const MemberSpec& m, ParamClass c,
                                YearMonth origin, int n_train, int horizon) {
  const PanelWindow w = window(panel, origin, n_train, true);
  const GnarFit f = fit_window(w, graph, m.spec(c));
  return forecast(f, graph, w.raw(), horizon, origin);
}

struct GraphForecast {
  int graph_id = 0;
  ForecastPath path;     // mean over finite members
  int used_members = 0;  // members with finite paths
};

/// Equal-weight AvGNAR forecasts on each listed graph. Members whose path has
/// any non-finite value are left out of that graph's average.
inline std::vector<GraphForecast> ragnar_forecast(const Panel& panel, const std::vector<Graph>& graphs,
                                                  const std::vector<int>& graph_ids, const ModelMembers& members,
                                                  ParamClass c, YearMonth origin, int n_train, int horizon,
                                                  unsigned threads = 1, MemberPathCache* cache = nullptr) {
  if (members.empty()) throw DomainError("model has no members");
  if (graph_ids.empty()) throw DomainError("no graphs to forecast with");
  for (int id : graph_ids)
    if (id < 0 || id >= static_cast<int>(graphs.size())) throw DomainError("graph id " + std::to_string(id) + " out of range");

  // Fill missing member paths in parallel, then merge in a fixed order.
  std::vector<std::tuple<int, int, int, int>> keys;
  for (int id : graph_ids)
    for (const auto& m : members) keys.emplace_back(static_cast<int>(c), id, m.p, m.s);
  std::vector<ForecastPath> paths(keys.size());
  std::vector<char> have(keys.size(), 0);
  if (cache)
    for (std::size_t k = 0; k < keys.size(); ++k)
      if (auto it = cache->find(keys[k]); it != cache->end()) {
        paths[k] = it->second;
        have[k] = 1;
      }
  parallel_for(keys.size(), threads, [&](std::size_t k) {
    if (have[k]) return;
    const auto& [cls, id, p, s] = keys[k];
    try {
      paths[k] = member_path(panel, graphs[id], {p, s}, c, origin, n_train, horizon);
    } catch (const UnderdeterminedError&) {
      paths[k].origin = origin;
      paths[k].values = Eigen::MatrixXd::Constant(horizon, panel.n_series(), std::numeric_limits<double>::quiet_NaN());
    }
  });
  if (cache)
    for (std::size_t k = 0; k < keys.size(); ++k) cache->emplace(keys[k], paths[k]);

  std::vector<GraphForecast> out;
  std::size_t k = 0;
  for (int id : graph_ids) {
    GraphForecast gf;
    gf.graph_id = id;
    gf.path.origin = origin;
    gf.path.values = Eigen::MatrixXd::Zero(horizon, panel.n_series());
    for (std::size_t m = 0; m < members.size(); ++m, ++k) {
      if (!paths[k].values.allFinite()) continue;
      gf.path.values += paths[k].values;
      ++gf.used_members;
    }
    if (gf.used_members > 0) gf.path.values /= static_cast<double>(gf.used_members);
    else gf.path.values.setConstant(std::numeric_limits<double>::quiet_NaN());
    out.push_back(std::move(gf));
  }
  return out;
}

/// Equal-weight mean over the first `n` graph forecasts that are finite.
inline ForecastPath average_top(const std::vector<GraphForecast>& per_graph, int n) {
  if (n < 1 || n > static_cast<int>(per_graph.size()))
    throw DomainError("top_n = " + std::to_string(n) + " exceeds " + std::to_string(per_graph.size()) + " graphs");
  ForecastPath out;
  out.origin = per_graph.front().path.origin;
  out.values = Eigen::MatrixXd::Zero(per_graph.front().path.values.rows(), per_graph.front().path.values.cols());
  int used = 0;
  for (int k = 0; k < n; ++k) {
    if (per_graph[k].used_members == 0) continue;
    out.values += per_graph[k].path.values;
    ++used;
  }
  if (used > 0) out.values /= static_cast<double>(used);
  else out.values.setConstant(std::numeric_limits<double>::quiet_NaN());
  return out;
}

/// Directed network from the best graph at every node (one ranking per
/// node under the same members).
inline Graph directed_best_graph(RankingEngine& engine, const ModelMembers& members, YearMonth as_of,
                                 std::vector<int>* best_ids = nullptr) {
  const int n = engine.panel().n_series();
  std::vector<Graph> best;
  best.reserve(n);
  if (best_ids) best_ids->clear();
  for (int i = 0; i < n; ++i) {
    const RankingTable t = engine.rank(members, as_of, i);
    best.push_back(engine.graphs()[t.order.front()]);
    if (best_ids) best_ids->push_back(t.order.front());
  }
  return build_directed_graph(best);
}

}  // namespace ragnar
