#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cctype>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ragnar/benchmarks.hpp"
#include "ragnar/errors.hpp"
#include "ragnar/gnar.hpp"
#include "ragnar/graph.hpp"
#include "ragnar/panel.hpp"
#include "ragnar/selection.hpp"
#include "ragnar/text.hpp"
#include "ragnar/year_month.hpp"

namespace ragnar {

enum class Cadence { monthly, quarterly };

inline Cadence parse_cadence(std::string_view s) {
  s = text::trim(s);
  if (s == "monthly") return Cadence::monthly;
  if (s == "quarterly") return Cadence::quarterly;
  throw DomainError("unknown cadence '" + std::string(s) + "'");
}

inline const char* cadence_name(Cadence c) { return c == Cadence::monthly ? "monthly" : "quarterly"; }

/// One entry of the model menu, parsed from labels such as "RW(1)",
/// "AR(bic)", "AvAR(P2)", "GNAR(2,1)", "GNAR(bic,1)", "GNAR(bic,bic)",
/// "AvGNAR(P2,S3)" and "directed:GNAR(1,1)".
struct ModelEntry {
  enum class Kind { rw, ar_bic, avar, gnar_fixed, gnar_bic, avgnar, directed };
  Kind kind = Kind::rw;
  std::string text;
  int rw_order = 1;
  std::string order_set;
  std::string stage_set;
  MemberSpec fixed;
  int bic_stage = 0;  // 0: stage chosen by BIC too

  bool is_network() const { return kind != Kind::rw && kind != Kind::ar_bic && kind != Kind::avar; }
};

inline ModelEntry parse_model(std::string_view raw) {
  const std::string s(text::trim(raw));
  auto fail = [&] { return DomainError("unrecognised model '" + s + "'"); };
  auto args = [&](std::string_view body) {
    const auto open = body.find('('), close = body.rfind(')');
    if (open == std::string_view::npos || close != body.size() - 1 || close < open) throw fail();
    return std::pair{std::string(body.substr(0, open)), text::split_list(body.substr(open + 1, close - open - 1))};
  };
  ModelEntry m;
  m.text = s;
  std::string_view body = s;
  bool directed = false;
  if (body.rfind("directed:", 0) == 0) {
    directed = true;
    body.remove_prefix(9);
  }
  const auto [name, a] = args(body);
  try {
    if (directed) {
      if (name != "GNAR" || a.size() != 2) throw fail();
      m.kind = ModelEntry::Kind::directed;
      m.fixed = {static_cast<int>(text::parse_int(a[0])), static_cast<int>(text::parse_int(a[1]))};
    } else if (name == "RW" && a.size() == 1) {
      m.kind = ModelEntry::Kind::rw;
      m.rw_order = static_cast<int>(text::parse_int(a[0]));
      if (m.rw_order < 1) throw fail();
    } else if (name == "AR" && a.size() == 1 && a[0] == "bic") {
      m.kind = ModelEntry::Kind::ar_bic;
    } else if (name == "AvAR" && a.size() == 1) {
      m.kind = ModelEntry::Kind::avar;
      m.order_set = a[0];
    } else if (name == "AvGNAR" && a.size() == 2) {
      m.kind = ModelEntry::Kind::avgnar;
      m.order_set = a[0];
      m.stage_set = a[1];
    } else if (name == "GNAR" && a.size() == 2 && a[0] == "bic") {
      m.kind = ModelEntry::Kind::gnar_bic;
      m.bic_stage = a[1] == "bic" ? 0 : static_cast<int>(text::parse_int(a[1]));
      if (m.bic_stage < 0) throw fail();
    } else if (name == "GNAR" && a.size() == 2) {
      m.kind = ModelEntry::Kind::gnar_fixed;
      m.fixed = {static_cast<int>(text::parse_int(a[0])), static_cast<int>(text::parse_int(a[1]))};
    } else {
      throw fail();
    }
  } catch (const DataError&) {
    throw fail();
  }
  if ((m.kind == ModelEntry::Kind::gnar_fixed || m.kind == ModelEntry::Kind::directed) &&
      (m.fixed.p < 1 || m.fixed.s < 0))
    throw fail();
  return m;
}

/// Backtest protocol settings. Defaults are the reference CPI protocol.
struct BacktestConfig {
  int n_train = 150;
  int n_val = 30;
  int n_graphs = 10000;
  double edge_prob = 0.03;
  std::vector<int> top_n{5};
  double k_fraction = 0.25;
  int horizon = 12;
  Cadence cadence = Cadence::monthly;
  std::map<std::string, std::vector<int>> order_sets{{"P1", {1, 13, 25}}, {"P2", {2, 13, 25}}};
  std::map<std::string, std::vector<int>> stage_sets{{"S1", {1}}, {"S2", {2}}, {"S3", {1, 2}}};
  int bic_max_p = 25;
  std::vector<int> bic_stages{1, 2};
  std::vector<ParamClass> classes{ParamClass::global_alpha, ParamClass::standard, ParamClass::local_alpha_beta};
  std::vector<std::string> models{"RW(1)",         "RW(4)",         "AR(bic)",       "AvAR(P1)",
                                  "AvAR(P2)",      "GNAR(bic,1)",   "GNAR(bic,2)",   "GNAR(bic,bic)",
                                  "AvGNAR(P1,S1)", "AvGNAR(P2,S1)", "AvGNAR(P1,S2)", "AvGNAR(P2,S2)",
                                  "AvGNAR(P1,S3)", "AvGNAR(P2,S3)"};
  std::optional<YearMonth> start;  // first origin; default: earliest feasible
  std::optional<YearMonth> end;    // last origin; default: second-to-last month
  unsigned threads = 1;

  int max_top_n() const { return *std::max_element(top_n.begin(), top_n.end()); }

  std::vector<ModelEntry> menu() const {
    std::vector<ModelEntry> out;
    for (std::size_t k = 0; k < models.size(); ++k) {
      try {
        out.push_back(parse_model(models[k]));
      } catch (const DomainError& e) {
        throw ConfigError("models.labels", e.what());
      }
    }
    return out;
  }

  /// Checks every setting; errors name the config key path.
  void validate() const {
    auto positive = [](const char* key, long v) {
      if (v < 1) throw ConfigError(key, "must be a positive integer, got " + std::to_string(v));
    };
    positive("backtest.n_train", n_train);
    positive("backtest.n_val", n_val);
    positive("graphs.count", n_graphs);
    positive("backtest.horizon", horizon);
    positive("backtest.bic_max_p", bic_max_p);
    if (!(edge_prob >= 0.0 && edge_prob <= 1.0))
      throw ConfigError("graphs.pi", "edge probability must lie in [0,1], got " + text::format_double(edge_prob));
    if (!(k_fraction > 0.0 && k_fraction <= 1.0))
      throw ConfigError("backtest.k_fraction", "must lie in (0,1], got " + text::format_double(k_fraction));
    if (top_n.empty()) throw ConfigError("backtest.top_n", "needs at least one value");
    for (int n : top_n) {
      if (n < 1) throw ConfigError("backtest.top_n", "values must be positive");
      if (n > n_graphs) throw ConfigError("backtest.top_n", "exceeds graphs.count");
    }
    if (bic_max_p + 1 >= n_train) throw ConfigError("backtest.bic_max_p", "must be below n_train - 1");
    if (classes.empty()) throw ConfigError("models.classes", "needs at least one class");
    if (bic_stages.empty()) throw ConfigError("backtest.bic_stages", "needs at least one stage");
    for (int s : bic_stages)
      if (s < 0) throw ConfigError("backtest.bic_stages", "stages must be non-negative");
    for (const auto& [name, set] : order_sets) {
      if (set.empty()) throw ConfigError("backtest.order_set." + name, "empty order set");
      for (int p : set)
        if (p < 1 || p >= n_train) throw ConfigError("backtest.order_set." + name, "orders must lie in [1, n_train)");
    }
    for (const auto& [name, set] : stage_sets) {
      if (set.empty()) throw ConfigError("backtest.stage_set." + name, "empty stage set");
      for (int s : set)
        if (s < 0) throw ConfigError("backtest.stage_set." + name, "stages must be non-negative");
    }
    if (start && end && *end < *start) throw ConfigError("backtest.end", "precedes backtest.start");
    for (const auto& m : menu()) {
      if (!m.order_set.empty() && !order_sets.count(m.order_set))
        throw ConfigError("models.labels", "model " + m.text + " uses undefined order set " + m.order_set);
      if (!m.stage_set.empty() && !stage_sets.count(m.stage_set))
        throw ConfigError("models.labels", "model " + m.text + " uses undefined stage set " + m.stage_set);
      if ((m.kind == ModelEntry::Kind::gnar_fixed || m.kind == ModelEntry::Kind::directed) && m.fixed.p >= n_train)
        throw ConfigError("models.labels", "model " + m.text + " has p >= n_train");
    }
  }
};

/// Label of a network model forecast: "class:model:topN".
inline std::string network_label(ParamClass c, const ModelEntry& m, int top_n) {
  if (m.kind == ModelEntry::Kind::directed) return std::string(class_name(c)) + ":" + m.text;
  return std::string(class_name(c)) + ":" + m.text + ":top" + std::to_string(top_n);
}

/// One metadata row: a top graph of a network model at an origin.
struct OriginMeta {
  std::string model;
  YearMonth origin;
  int rank = 0;
  int graph_id = -1;  // -1 for the directed composite graph
  std::vector<std::string> stage1;  // target's stage-1 neighbours (series ids)
  int selected_p = 0;               // 0 when not a single selected spec
  int selected_s = -1;
};

/// Target-node forecasts for horizons 1..H per label and origin.
struct BacktestResult {
  std::vector<std::string> labels;
  std::map<std::string, std::map<YearMonth, Eigen::VectorXd>> forecasts;
  std::vector<OriginMeta> metadata;
  std::vector<YearMonth> origins;
  int ranking_refreshes = 0;
  int horizon = 0;

  void add(const std::string& label, YearMonth origin, Eigen::VectorXd values) {
    if (!forecasts.count(label)) labels.push_back(label);
    forecasts[label][origin] = std::move(values);
  }
};

/// Origins from the configured start to end at monthly steps.
inline std::vector<YearMonth> backtest_origins(const BacktestConfig& cfg, const Panel& panel) {
  if (panel.dates.empty()) throw DataError("empty panel");
  const YearMonth earliest = panel.dates.front() + (cfg.n_train + cfg.n_val - 1);
  const YearMonth first = cfg.start.value_or(earliest);
  const YearMonth last = cfg.end.value_or(panel.dates.back() - 1);
  if (first < earliest)
    throw RangeError("backtest start " + first.str() + " needs n_train + n_val = " +
                     std::to_string(cfg.n_train + cfg.n_val) + " months of history; earliest feasible start is " +
                     earliest.str());
  if (panel.row_of(last) < 0) throw RangeError("backtest end " + last.str() + " outside panel span");
  std::vector<YearMonth> out;
  for (YearMonth t = first; t <= last; t += 1) out.push_back(t);
  if (out.empty()) throw RangeError("backtest window is empty");
  return out;
}

/// Per-model ranking state kept between refreshes.
struct NetworkState {
  ModelMembers members;
  std::vector<int> top_ids;  // best first; for directed, best graph per node
  bool selected = false;     // members chosen by BIC
};

struct BacktestOptions {
  std::string checkpoint;  // JSON path; empty disables checkpointing
  bool resume = false;
  std::function<void(YearMonth)> on_origin;
};

namespace detail {

inline std::string fingerprint(const BacktestConfig& cfg, const Panel& panel, const std::vector<Graph>& graphs) {
  std::ostringstream os;
  os << cfg.n_train << '|' << cfg.n_val << '|' << cfg.horizon << '|' << cadence_name(cfg.cadence) << '|'
     << text::format_double(cfg.k_fraction) << '|' << cfg.bic_max_p << '|';
  for (int n : cfg.top_n) os << n << ',';
  for (const auto& [k, v] : cfg.order_sets) {
    os << k << ':';
    for (int p : v) os << p << ',';
  }
  for (const auto& [k, v] : cfg.stage_sets) {
    os << k << ':';
    for (int s : v) os << s << ',';
  }
  for (int s : cfg.bic_stages) os << s << ',';
  for (auto c : cfg.classes) os << class_name(c) << ',';
  for (const auto& m : cfg.models) os << m << ';';
  os << '|' << (cfg.start ? cfg.start->str() : "") << '|' << (cfg.end ? cfg.end->str() : "") << '|';
  for (const auto& s : panel.series) os << s.id << ',';
  for (Eigen::Index t = 0; t < panel.values.rows(); ++t)
    for (Eigen::Index i = 0; i < panel.values.cols(); ++i) os << text::format_double(panel.values(t, i)) << ',';
  for (const auto& g : graphs) write_graph(os, g);
  return text::hex64(text::fnv1a64(os.str()));
}

inline std::vector<std::string> stage1_ids(const Panel& panel, const Graph& g) {
  std::vector<std::string> out;
  for (int q : g.neighbours(panel.target)) out.push_back(panel.series[q].id);
  return out;
}

inline nlohmann::json to_json(const BacktestResult& r, const std::map<std::string, NetworkState>& state,
                              const std::string& fp) {
  nlohmann::json j;
  j["fingerprint"] = fp;
  j["horizon"] = r.horizon;
  j["ranking_refreshes"] = r.ranking_refreshes;
  j["origins"] = nlohmann::json::array();
  for (auto o : r.origins) j["origins"].push_back(o.str());
  j["labels"] = r.labels;
  nlohmann::json f = nlohmann::json::object();
  for (const auto& [label, by_origin] : r.forecasts) {
    nlohmann::json rows = nlohmann::json::object();
    for (const auto& [o, v] : by_origin) {
      nlohmann::json vals = nlohmann::json::array();
      for (Eigen::Index h = 0; h < v.size(); ++h) vals.push_back(text::format_double(v(h)));
      rows[o.str()] = vals;
    }
    f[label] = rows;
  }
  j["forecasts"] = f;
  j["metadata"] = nlohmann::json::array();
  for (const auto& m : r.metadata)
    j["metadata"].push_back({{"model", m.model},
                             {"origin", m.origin.str()},
                             {"rank", m.rank},
                             {"graph_id", m.graph_id},
                             {"stage1", m.stage1},
                             {"p", m.selected_p},
                             {"s", m.selected_s}});
  nlohmann::json st = nlohmann::json::object();
  for (const auto& [model, s] : state) {
    nlohmann::json mem = nlohmann::json::array();
    for (const auto& m : s.members) mem.push_back({m.p, m.s});
    st[model] = {{"members", mem}, {"top", s.top_ids}, {"selected", s.selected}};
  }
  j["state"] = st;
  return j;
}

inline void from_json(const nlohmann::json& j, BacktestResult& r, std::map<std::string, NetworkState>& state) {
  r = {};
  r.horizon = j.at("horizon").get<int>();
  r.ranking_refreshes = j.at("ranking_refreshes").get<int>();
  for (const auto& o : j.at("origins")) r.origins.push_back(YearMonth::parse(o.get<std::string>()));
  r.labels = j.at("labels").get<std::vector<std::string>>();
  for (const auto& [label, rows] : j.at("forecasts").items())
    for (const auto& [o, vals] : rows.items()) {
      Eigen::VectorXd v(static_cast<Eigen::Index>(vals.size()));
      for (std::size_t h = 0; h < vals.size(); ++h) v(static_cast<Eigen::Index>(h)) = text::parse_double(vals[h].get<std::string>());
      r.forecasts[label][YearMonth::parse(o)] = v;
    }
  for (const auto& m : j.at("metadata")) {
    OriginMeta row;
    row.model = m.at("model").get<std::string>();
    row.origin = YearMonth::parse(m.at("origin").get<std::string>());
    row.rank = m.at("rank").get<int>();
    row.graph_id = m.at("graph_id").get<int>();
    row.stage1 = m.at("stage1").get<std::vector<std::string>>();
    row.selected_p = m.at("p").get<int>();
    row.selected_s = m.at("s").get<int>();
    r.metadata.push_back(std::move(row));
  }
  state.clear();
  for (const auto& [model, s] : j.at("state").items()) {
    NetworkState ns;
    for (const auto& m : s.at("members")) ns.members.push_back({m[0].get<int>(), m[1].get<int>()});
    ns.top_ids = s.at("top").get<std::vector<int>>();
    ns.selected = s.at("selected").get<bool>();
    state[model] = std::move(ns);
  }
}

}  // namespace detail

/// Rolling-origin backtest at the panel's target node. At each origin every
/// model uses only data dated at or before the origin. Rankings (and BIC
/// selections) are refreshed every month, or every third origin at the
/// quarterly cadence; models are refitted at every origin either way.
inline BacktestResult run_backtest(const BacktestConfig& cfg, const Panel& panel, const std::vector<Graph>& graphs,
                                   const BacktestOptions& opt = {}) {
  cfg.validate();
  const auto menu = cfg.menu();
  if (panel.target < 0) throw ConfigError("data.target", "panel has no target series");
  bool any_network = false;
  for (const auto& m : menu) any_network = any_network || m.is_network();
  if (any_network && static_cast<int>(graphs.size()) < cfg.max_top_n())
    throw ConfigError("backtest.top_n", "exceeds the number of graphs supplied");
  const std::vector<YearMonth> origins = backtest_origins(cfg, panel);
  const int target = panel.target;
  const int horizon = cfg.horizon;
  const std::string fp = detail::fingerprint(cfg, panel, graphs);

  BacktestResult result;
  result.horizon = horizon;
  std::map<std::string, NetworkState> state;
  std::size_t first_todo = 0;
  if (opt.resume && !opt.checkpoint.empty() && std::filesystem::exists(opt.checkpoint)) {
    std::ifstream in(opt.checkpoint);
    const auto j = nlohmann::json::parse(in);
    if (j.at("fingerprint").get<std::string>() != fp)
      throw ConfigError("run.resume", "checkpoint " + opt.checkpoint + " belongs to a different configuration");
    detail::from_json(j, result, state);
    first_todo = result.origins.size();
    for (std::size_t k = 0; k < first_todo; ++k)
      if (k >= origins.size() || result.origins[k] != origins[k])
        throw ConfigError("run.resume", "checkpoint origins do not match the configured backtest");
  }

  std::unique_ptr<RankingEngine> engine;
  if (any_network) engine = std::make_unique<RankingEngine>(panel, graphs, cfg.n_train, cfg.n_val, cfg.threads);
  const int k_top = top_k(static_cast<int>(graphs.size()), cfg.k_fraction);
  const int n_top = cfg.max_top_n();

  for (std::size_t oi = first_todo; oi < origins.size(); ++oi) {
    const YearMonth t = origins[oi];
    const bool refresh = cfg.cadence == Cadence::monthly || (t - origins.front()) % 3 == 0;
    const PanelWindow bw = window(panel, t, cfg.n_train, false);
    const Eigen::VectorXd series = bw.values.col(target);
    MemberPathCache paths;

    for (const auto& m : menu) {
      switch (m.kind) {
        case ModelEntry::Kind::rw:
          result.add(m.text, t, Eigen::VectorXd::Constant(horizon, rw_forecast(series, m.rw_order)));
          break;
        case ModelEntry::Kind::ar_bic: {
          const int p = ar_bic_select(series, cfg.bic_max_p);
          result.add(m.text, t, ar_forecast(ar_fit(series, p), series, horizon));
          result.metadata.push_back({m.text, t, 0, -1, {}, p, -1});
          break;
        }
        case ModelEntry::Kind::avar:
          result.add(m.text, t, avar_forecast(series, cfg.order_sets.at(m.order_set), horizon));
          break;
        default: {
          NetworkState& ns = state[m.text];
          if (refresh || ns.top_ids.empty()) {
            ns.selected = false;
            if (m.kind == ModelEntry::Kind::directed) {
              ns.members = {m.fixed};
              directed_best_graph(*engine, ns.members, t, &ns.top_ids);
            } else if (m.kind == ModelEntry::Kind::gnar_bic) {
              std::vector<MemberSpec> cands;
              const std::vector<int> stages = m.bic_stage > 0 ? std::vector<int>{m.bic_stage} : cfg.bic_stages;
              for (int p = 1; p <= cfg.bic_max_p; ++p)
                for (int s : stages) cands.push_back({p, s});
              const SpecSelection sel = select_spec(*engine, cands, t, target, k_top);
              ns.members = {sel.chosen};
              ns.top_ids = sel.ranking.top(n_top);
              ns.selected = true;
            } else {
              ns.members = m.kind == ModelEntry::Kind::gnar_fixed
                               ? ModelMembers{m.fixed}
                               : member_grid(cfg.order_sets.at(m.order_set), cfg.stage_sets.at(m.stage_set));
              ns.top_ids = engine->rank(ns.members, t, target).top(n_top);
            }
          }
          const int sel_p = ns.members.size() == 1 ? ns.members.front().p : 0;
          const int sel_s = ns.members.size() == 1 ? ns.members.front().s : -1;
          if (m.kind == ModelEntry::Kind::directed) {
            std::vector<Graph> best;
            for (int id : ns.top_ids) best.push_back(graphs[id]);
            const Graph directed = build_directed_graph(best);
            std::vector<std::string> ids;
            for (int q : directed.neighbours(target)) ids.push_back(panel.series[q].id);
            result.metadata.push_back({m.text, t, 1, -1, ids, sel_p, sel_s});
            for (ParamClass c : cfg.classes) {
              Eigen::VectorXd v;
              try {
                v = member_path(panel, directed, ns.members.front(), c, t, cfg.n_train, horizon).values.col(target);
              } catch (const UnderdeterminedError&) {
                v = Eigen::VectorXd::Constant(horizon, std::numeric_limits<double>::quiet_NaN());
              }
              result.add(network_label(c, m, 1), t, v);
            }
            break;
          }
          for (std::size_t r = 0; r < ns.top_ids.size(); ++r)
            result.metadata.push_back({m.text, t, static_cast<int>(r) + 1, ns.top_ids[r],
                                       detail::stage1_ids(panel, graphs[ns.top_ids[r]]), sel_p, sel_s});
          for (ParamClass c : cfg.classes) {
            const auto per_graph =
                ragnar_forecast(panel, graphs, ns.top_ids, ns.members, c, t, cfg.n_train, horizon, cfg.threads, &paths);
            for (int n : cfg.top_n) result.add(network_label(c, m, n), t, average_top(per_graph, n).values.col(target));
          }
        }
      }
    }
    if (refresh && any_network) ++result.ranking_refreshes;
    result.origins.push_back(t);
    if (engine) engine->evict_before(t - (cfg.n_val - 2));
    if (!opt.checkpoint.empty()) {
      const auto tmp = opt.checkpoint + ".tmp";
      {
        std::ofstream out(tmp);
        out << detail::to_json(result, state, fp).dump() << '\n';
      }
      std::filesystem::rename(tmp, opt.checkpoint);
    }
    if (opt.on_origin) opt.on_origin(t);
  }
  return result;
}

/// File-system safe name for a label.
inline std::string label_filename(const std::string& label) {
  std::string out;
  for (char ch : label) {
    if (std::isalnum(static_cast<unsigned char>(ch))) out += ch;
    else if (out.empty() || out.back() != '_') out += '_';
  }
  while (!out.empty() && out.back() == '_') out.pop_back();
  return out + ".csv";
}

/// Writes forecasts/<label>.csv (origin_date,horizon,forecast), an
/// index.csv mapping files to labels, and metadata.csv.
inline void write_backtest(const std::filesystem::path& dir, const BacktestResult& r) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "forecasts");
  std::ofstream index(dir / "forecasts" / "index.csv");
  index << "file,label\n";
  std::set<std::string> used;
  for (const auto& label : r.labels) {
    const std::string file = label_filename(label);
    if (!used.insert(file).second) throw DataError("labels collide on file name " + file);
    index << file << ',' << text::csv_field(label) << '\n';
    std::ofstream os(dir / "forecasts" / file);
    os << "origin_date,horizon,forecast\n";
    for (const auto& [o, v] : r.forecasts.at(label))
      for (Eigen::Index h = 0; h < v.size(); ++h) os << o.str() << ',' << h + 1 << ',' << text::format_double(v(h)) << '\n';
  }
  std::ofstream meta(dir / "metadata.csv");
  meta << "label,origin_date,rank,graph_id,cpi_stage1_members,selected_p,selected_s\n";
  for (const auto& m : r.metadata) {
    std::string members;
    for (std::size_t k = 0; k < m.stage1.size(); ++k) members += (k ? ";" : "") + m.stage1[k];
    meta << text::csv_field(m.model) << ',' << m.origin.str() << ',' << m.rank << ',' << m.graph_id << ','
         << text::csv_field(members) << ',' << (m.selected_p > 0 ? std::to_string(m.selected_p) : "") << ','
         << (m.selected_s >= 0 ? std::to_string(m.selected_s) : "") << '\n';
  }
}

/// Reads the files written by write_backtest.
inline BacktestResult read_backtest(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  BacktestResult r;
  std::ifstream index(dir / "forecasts" / "index.csv");
  if (!index) throw DataError("missing " + (dir / "forecasts" / "index.csv").string());
  std::string line;
  std::getline(index, line);
  std::set<YearMonth> origins;
  while (std::getline(index, line)) {
    if (text::trim(line).empty()) continue;
    const auto f = text::split_csv_line(line);
    if (f.size() != 2) throw DataError("bad index line '" + line + "'");
    std::ifstream is(dir / "forecasts" / f[0]);
    if (!is) throw DataError("missing forecast file " + f[0]);
    std::getline(is, line);
    std::map<YearMonth, std::map<int, double>> rows;
    while (std::getline(is, line)) {
      if (text::trim(line).empty()) continue;
      const auto c = text::split_csv_line(line);
      if (c.size() != 3) throw DataError("bad forecast line '" + line + "' in " + f[0]);
      rows[YearMonth::parse(c[0])][static_cast<int>(text::parse_int(c[1]))] = text::parse_double(c[2]);
    }
    for (const auto& [o, hv] : rows) {
      Eigen::VectorXd v(static_cast<Eigen::Index>(hv.size()));
      for (const auto& [h, x] : hv) v(h - 1) = x;
      r.horizon = std::max(r.horizon, static_cast<int>(v.size()));
      r.add(f[1], o, v);
      origins.insert(o);
    }
  }
  r.origins.assign(origins.begin(), origins.end());
  std::ifstream meta(dir / "metadata.csv");
  if (meta) {
    std::getline(meta, line);
    while (std::getline(meta, line)) {
      if (text::trim(line).empty()) continue;
      const auto c = text::split_csv_line(line);
      if (c.size() != 7) throw DataError("bad metadata line '" + line + "'");
      OriginMeta m;
      m.model = c[0];
      m.origin = YearMonth::parse(c[1]);
      m.rank = static_cast<int>(text::parse_int(c[2]));
      m.graph_id = static_cast<int>(text::parse_int(c[3]));
      m.stage1 = text::split_list(c[4], ';');
      m.selected_p = c[5].empty() ? 0 : static_cast<int>(text::parse_int(c[5]));
      m.selected_s = c[6].empty() ? -1 : static_cast<int>(text::parse_int(c[6]));
      r.metadata.push_back(std::move(m));
    }
  }
  return r;
}

}  // namespace ragnar
