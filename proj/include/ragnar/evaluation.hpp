#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ragnar/backtest.hpp"
#include "ragnar/errors.hpp"
#include "ragnar/panel.hpp"
#include "ragnar/text.hpp"
#include "ragnar/year_month.hpp"

namespace ragnar {

/// (actual, forecast)
using ForecastPair = std::pair<double, double>;

inline double rmse(const std::vector<ForecastPair>& pairs) {
  if (pairs.empty()) throw DomainError("rmse of an empty sample");
  double ss = 0.0;
  for (const auto& [a, f] : pairs) ss += (a - f) * (a - f);
  return std::sqrt(ss / static_cast<double>(pairs.size()));
}

/// Percent: 100 * mean(|X - F| / (|X| + 1)).
inline double mape(const std::vector<ForecastPair>& pairs) {
  if (pairs.empty()) throw DomainError("mape of an empty sample");
  double s = 0.0;
  for (const auto& [a, f] : pairs) s += std::abs(a - f) / (std::abs(a) + 1.0);
  return 100.0 * s / static_cast<double>(pairs.size());
}

/// One (label, horizon) cell. Absent cells (no matched pairs) have n = 0 and
/// NaN metrics. sd_* are filled only by aggregate_runs.
struct EvalCell {
  std::string label;
  int horizon = 0;
  int n = 0;
  double rmse = std::numeric_limits<double>::quiet_NaN();
  double mape = std::numeric_limits<double>::quiet_NaN();
  double rel_rmse = std::numeric_limits<double>::quiet_NaN();
  double rel_mape = std::numeric_limits<double>::quiet_NaN();
  double sd_rmse = std::numeric_limits<double>::quiet_NaN();
  double sd_mape = std::numeric_limits<double>::quiet_NaN();

  bool present() const { return n > 0; }
};

struct EvalReport {
  std::string benchmark;
  std::vector<EvalCell> cells;

  const EvalCell& at(const std::string& label, int h) const {
    for (const auto& c : cells)
      if (c.label == label && c.horizon == h) return c;
    throw RangeError("no cell for " + label + " at horizon " + std::to_string(h));
  }
};

/// Realised target value for `date`, NaN when not observed.
inline double actual_at(const Panel& actuals, YearMonth date) {
  const int row = actuals.row_of(date);
  return row < 0 ? std::numeric_limits<double>::quiet_NaN() : actuals.values(row, actuals.target);
}

namespace detail {

// Origins of `label` at horizon h whose forecast and actual are finite.
inline std::set<YearMonth> usable_origins(const BacktestResult& r, const std::string& label, int h, const Panel& actuals) {
  std::set<YearMonth> out;
  for (const auto& [o, v] : r.forecasts.at(label)) {
    if (h > v.size() || !std::isfinite(v(h - 1))) continue;
    if (std::isfinite(actual_at(actuals, o + h))) out.insert(o);
  }
  return out;
}

inline std::vector<ForecastPair> pairs_on(const BacktestResult& r, const std::string& label, int h,
                                          const Panel& actuals, const std::set<YearMonth>& origins) {
  std::vector<ForecastPair> out;
  const auto& by = r.forecasts.at(label);
  for (auto o : origins) out.emplace_back(actual_at(actuals, o + h), by.at(o)(h - 1));
  return out;
}

}  // namespace detail

/// Per label and horizon: RMSE and MAPE over origins with realised actuals,
/// and both relative to the benchmark on the same (origin, horizon) pairs.
inline EvalReport horizon_table(const BacktestResult& result, const Panel& actuals, const std::string& benchmark) {
  if (!result.forecasts.count(benchmark)) throw DomainError("benchmark label '" + benchmark + "' not in result");
  EvalReport rep;
  rep.benchmark = benchmark;
  for (const auto& label : result.labels) {
    for (int h = 1; h <= result.horizon; ++h) {
      EvalCell c;
      c.label = label;
      c.horizon = h;
      const auto own = detail::usable_origins(result, label, h, actuals);
      c.n = static_cast<int>(own.size());
      if (c.n > 0) {
        const auto p = detail::pairs_on(result, label, h, actuals, own);
        c.rmse = rmse(p);
        c.mape = mape(p);
        const auto bench = detail::usable_origins(result, benchmark, h, actuals);
        std::set<YearMonth> common;
        for (auto o : own)
          if (bench.count(o)) common.insert(o);
        if (!common.empty()) {
          const auto pm = detail::pairs_on(result, label, h, actuals, common);
          const auto pb = detail::pairs_on(result, benchmark, h, actuals, common);
          c.rel_rmse = rmse(pm) / rmse(pb);
          c.rel_mape = mape(pm) / mape(pb);
        }
      }
      rep.cells.push_back(std::move(c));
    }
  }
  return rep;
}

/// External forecasts: (publish_date, horizon) -> forecast, targeting
/// publish_date + horizon.
using ExternalForecasts = std::map<std::pair<YearMonth, int>, double>;

inline ExternalForecasts read_external(std::istream& in, const std::string& date_format = "%Y-%m") {
  ExternalForecasts out;
  std::string line;
  if (!std::getline(in, line)) throw DataError("external forecast file is empty");
  const auto header = text::split_csv_line(line);
  auto col = [&](const char* name) {
    for (std::size_t k = 0; k < header.size(); ++k)
      if (text::trim(header[k]) == name) return static_cast<int>(k);
    throw DataError(std::string("external forecast file lacks column '") + name + "'");
  };
  const int cd = col("publish_date"), ch = col("horizon"), cf = col("forecast");
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    const auto f = text::split_csv_line(line);
    if (static_cast<int>(f.size()) <= std::max({cd, ch, cf}))
      throw DataError("short row at line " + std::to_string(line_no) + " of external forecasts");
    const YearMonth d = YearMonth::parse(text::trim(f[cd]), date_format);
    const int h = static_cast<int>(text::parse_int(f[ch]));
    if (h < 1) throw DataError("horizon below 1 at line " + std::to_string(line_no));
    if (!out.emplace(std::pair{d, h}, text::parse_double(f[cf])).second)
      throw DataError("duplicate external forecast for " + d.str() + " h=" + std::to_string(h));
  }
  return out;
}

/// Model and external metrics on the (origin, horizon) cells both cover,
/// matched by target month. Rows are `label` and `external`; rel_* give
/// model / external.
inline EvalReport compare_external(const BacktestResult& result, const Panel& actuals, const ExternalForecasts& ext,
                                   const std::string& label) {
  if (!result.forecasts.count(label)) throw DomainError("label '" + label + "' not in result");
  const auto& by = result.forecasts.at(label);
  std::map<int, std::vector<ForecastPair>> model, other;
  for (const auto& [key, f] : ext) {
    const auto& [publish, h] = key;
    const auto it = by.find(publish);
    if (it == by.end() || h > it->second.size()) continue;
    const double a = actual_at(actuals, publish + h);
    const double m = it->second(h - 1);
    if (!std::isfinite(a) || !std::isfinite(m) || !std::isfinite(f)) continue;
    model[h].emplace_back(a, m);
    other[h].emplace_back(a, f);
  }
  if (model.empty()) throw EmptyOverlapError("no (origin, horizon) cells shared by '" + label + "' and the external forecasts");
  EvalReport rep;
  rep.benchmark = "external";
  for (const auto& [h, pm] : model) {
    const auto& pe = other.at(h);
    EvalCell cm{label, h, static_cast<int>(pm.size()), rmse(pm), mape(pm)};
    EvalCell ce{"external", h, static_cast<int>(pe.size()), rmse(pe), mape(pe)};
    cm.rel_rmse = cm.rmse / ce.rmse;
    cm.rel_mape = cm.mape / ce.mape;
    ce.rel_rmse = 1.0;
    ce.rel_mape = 1.0;
    rep.cells.push_back(cm);
    rep.cells.push_back(ce);
  }
  return rep;
}

/// Total matched cells in a compare_external report (model rows).
inline int matched_cells(const EvalReport& rep) {
  int n = 0;
  for (const auto& c : rep.cells)
    if (c.label != "external") n += c.n;
  return n;
}

struct ComponentShare {
  YearMonth date;
  std::string component;
  double pct = 0.0;
};

/// Share (percent) of the top graphs of `model` whose target stage-1 set
/// contains each component, smoothed by a trailing moving average over
/// `smoothing` months (shorter at the start of the sample).
inline std::vector<ComponentShare> component_frequency(const BacktestResult& result, const std::string& model,
                                                       const std::vector<std::string>& components, int smoothing = 6) {
  if (smoothing < 1) throw DomainError("smoothing window must be at least 1");
  std::map<YearMonth, std::pair<int, std::map<std::string, int>>> raw;
  for (const auto& m : result.metadata) {
    if (m.model != model) continue;
    auto& [graphs, counts] = raw[m.origin];
    ++graphs;
    for (const auto& id : m.stage1) ++counts[id];
  }
  std::vector<YearMonth> dates;
  for (const auto& [d, _] : raw) dates.push_back(d);
  std::vector<ComponentShare> out;
  for (const auto& comp : components) {
    std::vector<double> pct;
    for (auto d : dates) {
      const auto& [graphs, counts] = raw.at(d);
      const auto it = counts.find(comp);
      pct.push_back(100.0 * (it == counts.end() ? 0 : it->second) / graphs);
    }
    for (std::size_t t = 0; t < dates.size(); ++t) {
      const std::size_t lo = t + 1 >= static_cast<std::size_t>(smoothing) ? t + 1 - smoothing : 0;
      double s = 0.0;
      for (std::size_t k = lo; k <= t; ++k) s += pct[k];
      out.push_back({dates[t], comp, s / static_cast<double>(t - lo + 1)});
    }
  }
  return out;
}

/// Mean and sample sd per cell across runs. Cells are matched by (label,
/// horizon); the count is that of the first run.
inline EvalReport aggregate_runs(const std::vector<EvalReport>& runs) {
  if (runs.empty()) throw DomainError("no runs to aggregate");
  EvalReport out;
  out.benchmark = runs.front().benchmark;
  for (const auto& proto : runs.front().cells) {
    EvalCell c = proto;
    auto stats = [&](auto get, double& mean, double& sd) {
      std::vector<double> v;
      for (const auto& r : runs) {
        const double x = get(r.at(proto.label, proto.horizon));
        if (std::isfinite(x)) v.push_back(x);
      }
      if (v.empty()) {
        mean = sd = std::numeric_limits<double>::quiet_NaN();
        return;
      }
      double s = 0.0;
      for (double x : v) s += x;
      mean = s / static_cast<double>(v.size());
      double ss = 0.0;
      for (double x : v) ss += (x - mean) * (x - mean);
      sd = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
    };
    double unused = 0.0;
    stats([](const EvalCell& e) { return e.rmse; }, c.rmse, c.sd_rmse);
    stats([](const EvalCell& e) { return e.mape; }, c.mape, c.sd_mape);
    stats([](const EvalCell& e) { return e.rel_rmse; }, c.rel_rmse, unused);
    stats([](const EvalCell& e) { return e.rel_mape; }, c.rel_mape, unused);
    out.cells.push_back(std::move(c));
  }
  return out;
}

namespace detail {
inline std::string cell_value(double v) { return std::isfinite(v) ? text::format_double(v) : ""; }
inline nlohmann::json json_value(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }
}  // namespace detail

/// CSV: label,horizon,n,rmse,mape,rel_rmse,rel_mape,sd_rmse,sd_mape. Absent
/// values are empty fields.
inline void write_report_csv(std::ostream& os, const EvalReport& rep) {
  os << "label,horizon,n,rmse,mape,rel_rmse,rel_mape,sd_rmse,sd_mape\n";
  for (const auto& c : rep.cells)
    os << text::csv_field(c.label) << ',' << c.horizon << ',' << c.n << ',' << detail::cell_value(c.rmse) << ','
       << detail::cell_value(c.mape) << ',' << detail::cell_value(c.rel_rmse) << ',' << detail::cell_value(c.rel_mape)
       << ',' << detail::cell_value(c.sd_rmse) << ',' << detail::cell_value(c.sd_mape) << '\n';
}

inline nlohmann::json report_json(const EvalReport& rep) {
  nlohmann::json j;
  j["benchmark"] = rep.benchmark;
  j["cells"] = nlohmann::json::array();
  for (const auto& c : rep.cells)
    j["cells"].push_back({{"label", c.label},
                          {"horizon", c.horizon},
                          {"n", c.n},
                          {"rmse", detail::json_value(c.rmse)},
                          {"mape", detail::json_value(c.mape)},
                          {"rel_rmse", detail::json_value(c.rel_rmse)},
                          {"rel_mape", detail::json_value(c.rel_mape)},
                          {"sd_rmse", detail::json_value(c.sd_rmse)},
                          {"sd_mape", detail::json_value(c.sd_mape)}});
  return j;
}

inline void write_components_csv(std::ostream& os, const std::vector<ComponentShare>& rows) {
  os << "date,component,pct\n";
  for (const auto& r : rows) os << r.date.str() << ',' << text::csv_field(r.component) << ',' << text::format_double(r.pct) << '\n';
}

}  // namespace ragnar
