#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "ragnar/errors.hpp"
#include "ragnar/text.hpp"
#include "ragnar/year_month.hpp"

namespace ragnar {

/// CPI aggregation level; order matters for the `max_level` filter.
enum class HierarchyLevel { overall = 0, division = 1, group = 2, class_ = 3, item = 4, unknown = 5 };

inline HierarchyLevel parse_level(std::string_view s) {
  std::string v;
  for (char c : text::trim(s)) v += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (v == "overall") return HierarchyLevel::overall;
  if (v == "division") return HierarchyLevel::division;
  if (v == "group") return HierarchyLevel::group;
  if (v == "class") return HierarchyLevel::class_;
  if (v == "item") return HierarchyLevel::item;
  return HierarchyLevel::unknown;
}

inline const char* level_name(HierarchyLevel l) {
  switch (l) {
    case HierarchyLevel::overall: return "overall";
    case HierarchyLevel::division: return "division";
    case HierarchyLevel::group: return "group";
    case HierarchyLevel::class_: return "class";
    case HierarchyLevel::item: return "item";
    default: return "";
  }
}

struct SeriesInfo {
  std::string id;
  std::string label;
  HierarchyLevel level = HierarchyLevel::unknown;
};

/// Aligned monthly panel: values(t, i) for dates[t] and series[i]; NaN where
/// a series is not observed.
struct Panel {
  std::vector<SeriesInfo> series;
  std::vector<YearMonth> dates;
  Eigen::MatrixXd values;
  int target = -1;

  int n_series() const { return static_cast<int>(series.size()); }
  int n_dates() const { return static_cast<int>(dates.size()); }

  /// Row index of `date`, or -1.
  int row_of(YearMonth date) const {
    if (dates.empty()) return -1;
    const int r = date - dates.front();
    return (r >= 0 && r < n_dates()) ? r : -1;
  }

  int series_index(std::string_view id) const {
    for (int i = 0; i < n_series(); ++i)
      if (series[i].id == id) return i;
    return -1;
  }
};

/// Index levels.
struct PricePanel : Panel {};

/// Year-on-year percentage changes of a PricePanel.
struct RatePanel : Panel {};

/// Column mapping for long-format CSV input (series, date, value rows).
struct PanelSchema {
  std::string series_col = "series_id";
  std::string date_col = "date";
  std::string value_col = "value";
  std::string label_col = "label";  // optional; ignored when absent
  std::string level_col = "level";  // optional; ignored when absent
  std::string date_format = "%Y-%m";
  std::string target_id;  // required
  std::optional<HierarchyLevel> max_level;
};

namespace detail {

struct RawSeries {
  SeriesInfo info;
  std::vector<YearMonth> dates;
  std::vector<double> values;
};

inline Panel assemble(std::vector<RawSeries> raw, const std::string& target_id) {
  std::sort(raw.begin(), raw.end(), [](const RawSeries& a, const RawSeries& b) { return a.info.id < b.info.id; });
  Panel p;
  if (raw.empty()) throw DataError("panel has no series");
  YearMonth lo = raw.front().dates.front(), hi = raw.front().dates.back();
  for (const auto& s : raw) {
    lo = std::min(lo, s.dates.front());
    hi = std::max(hi, s.dates.back());
  }
  const int t_count = (hi - lo) + 1;
  for (int t = 0; t < t_count; ++t) p.dates.push_back(lo + t);
  p.values = Eigen::MatrixXd::Constant(t_count, static_cast<Eigen::Index>(raw.size()),
                                       std::numeric_limits<double>::quiet_NaN());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    p.series.push_back(raw[i].info);
    for (std::size_t k = 0; k < raw[i].dates.size(); ++k)
      p.values(raw[i].dates[k] - lo, static_cast<Eigen::Index>(i)) = raw[i].values[k];
  }
  p.target = p.series_index(target_id);
  if (p.target < 0) throw ConfigError("data.target", "target series '" + target_id + "' not found in panel");
  return p;
}

}  // namespace detail

/// Reads a long-format CSV. Series sampled at a uniform step of 12 months or
/// more (annual series) are dropped; retained series must be monthly without
/// internal gaps. Rows of one series must appear in increasing date order.
inline PricePanel load_panel(std::istream& in, const PanelSchema& schema) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty CSV input");
  if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line.erase(0, 3);  // UTF-8 BOM
  const auto header = text::split_csv_line(line);
  auto col = [&](const std::string& name, bool required) -> int {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (text::trim(header[i]) == name) return static_cast<int>(i);
    if (required) throw DataError("CSV header lacks column '" + name + "'");
    return -1;
  };
  const int c_series = col(schema.series_col, true);
  const int c_date = col(schema.date_col, true);
  const int c_value = col(schema.value_col, true);
  const int c_label = schema.label_col.empty() ? -1 : col(schema.label_col, false);
  const int c_level = schema.level_col.empty() ? -1 : col(schema.level_col, false);

  std::map<std::string, detail::RawSeries> by_id;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    const auto f = text::split_csv_line(line);
    auto field = [&](int c) -> std::string {
      if (c < 0) return {};
      if (c >= static_cast<int>(f.size())) throw DataError("line " + std::to_string(line_no) + ": too few fields");
      return std::string(text::trim(f[c]));
    };
    const std::string id = field(c_series);
    const std::string value_text = field(c_value);
    if (value_text.empty()) continue;  // unobserved
    const YearMonth date = YearMonth::parse(field(c_date), schema.date_format);
    const double value = text::parse_double(value_text);
    auto& s = by_id[id];
    if (s.info.id.empty()) {
      s.info.id = id;
      s.info.label = field(c_label);
      s.info.level = c_level >= 0 ? parse_level(field(c_level)) : HierarchyLevel::unknown;
    }
    if (!s.dates.empty()) {
      if (date == s.dates.back())
        throw DataError("duplicate observation for series '" + id + "' at " + date.str());
      if (date < s.dates.back()) {
        if (std::find(s.dates.begin(), s.dates.end(), date) != s.dates.end())
          throw DataError("duplicate observation for series '" + id + "' at " + date.str());
        throw DataError("non-monotone dates in series '" + id + "' at " + date.str());
      }
    }
    s.dates.push_back(date);
    s.values.push_back(value);
  }

  std::vector<detail::RawSeries> kept;
  for (auto& [id, s] : by_id) {
    if (schema.max_level && s.info.level != HierarchyLevel::unknown && s.info.level > *schema.max_level) continue;
    bool monthly = true;
    bool uniform_annual = s.dates.size() >= 1;
    for (std::size_t k = 1; k < s.dates.size(); ++k) {
      const int gap = s.dates[k] - s.dates[k - 1];
      if (gap != 1) monthly = false;
      if (gap % 12 != 0) uniform_annual = false;
    }
    if (s.dates.size() < 2 || (!monthly && uniform_annual)) {
      if (id == schema.target_id) throw DataError("target series '" + id + "' is not monthly");
      continue;
    }
    if (!monthly) {
      for (std::size_t k = 1; k < s.dates.size(); ++k)
        if (s.dates[k] - s.dates[k - 1] != 1)
          throw DataError("gap in monthly series '" + id + "' after " + s.dates[k - 1].str());
    }
    kept.push_back(std::move(s));
  }
  PricePanel out;
  static_cast<Panel&>(out) = detail::assemble(std::move(kept), schema.target_id);
  return out;
}

inline PricePanel load_panel(const std::string& path, const PanelSchema& schema) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open panel file '" + path + "'");
  return load_panel(in, schema);
}

/// value(t, i) = 100 * (P(t, i) / P(t-12, i) - 1); the first 12 months drop.
inline RatePanel yoy_transform(const PricePanel& prices) {
  if (prices.n_dates() < 13) throw RangeError("year-on-year transform needs at least 13 months");
  RatePanel out;
  out.series = prices.series;
  out.target = prices.target;
  out.dates.assign(prices.dates.begin() + 12, prices.dates.end());
  const Eigen::Index t_count = prices.n_dates() - 12, n = prices.n_series();
  out.values.resize(t_count, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index t = 0; t < t_count; ++t) {
      const double now = prices.values(t + 12, i), before = prices.values(t, i);
      if (std::isnan(now) || std::isnan(before)) {
        out.values(t, i) = std::numeric_limits<double>::quiet_NaN();
        continue;
      }
      if (before == 0.0)
        throw DataError("zero index level in series '" + prices.series[i].id + "' at " + prices.dates[t].str());
      out.values(t, i) = 100.0 * (now / before - 1.0);
    }
  return out;
}

/// Keeps the rows dated >= `from` and only the series fully observed over
/// them. The target must survive.
inline RatePanel complete_series(const RatePanel& panel, YearMonth from) {
  const int r0 = panel.row_of(from);
  if (r0 < 0) throw RangeError("date " + from.str() + " outside panel span");
  const Eigen::Index rows = panel.n_dates() - r0;
  std::vector<int> keep;
  for (int i = 0; i < panel.n_series(); ++i)
    if (panel.values.col(i).tail(rows).allFinite()) keep.push_back(i);
  if (std::find(keep.begin(), keep.end(), panel.target) == keep.end())
    throw DataError("target series '" + panel.series[panel.target].id + "' incomplete from " + from.str());
  RatePanel out;
  out.dates.assign(panel.dates.begin() + r0, panel.dates.end());
  out.values.resize(rows, static_cast<Eigen::Index>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k) {
    out.series.push_back(panel.series[keep[k]]);
    out.values.col(static_cast<Eigen::Index>(k)) = panel.values.col(keep[k]).tail(rows);
    if (keep[k] == panel.target) out.target = static_cast<int>(k);
  }
  return out;
}

/// Trailing block of a panel, optionally demeaned per series. `means` always
/// holds the raw window means.
struct PanelWindow {
  YearMonth end_date;
  int length = 0;
  Eigen::MatrixXd values;
  Eigen::VectorXd means;
  bool demeaned = false;

  Eigen::MatrixXd raw() const {
    if (!demeaned) return values;
    return values.rowwise() + means.transpose();
  }
};

inline PanelWindow window(const Panel& panel, YearMonth end_date, int length, bool demean) {
  if (length < 1) throw DomainError("window length must be at least 1");
  const int end_row = panel.row_of(end_date);
  if (end_row < 0) throw RangeError("end date " + end_date.str() + " outside panel span");
  if (end_row + 1 < length) {
    const YearMonth earliest = panel.dates.front() + (length - 1);
    throw RangeError("window of length " + std::to_string(length) + " ending " + end_date.str() +
                     " needs more history; earliest feasible end date is " + earliest.str());
  }
  PanelWindow w;
  w.end_date = end_date;
  w.length = length;
  w.values = panel.values.middleRows(end_row + 1 - length, length);
  if (!w.values.allFinite()) throw DataError("window ending " + end_date.str() + " contains missing values");
  w.means = w.values.colwise().mean().transpose();
  if (demean) {
    w.values.rowwise() -= w.means.transpose();
    w.demeaned = true;
  }
  return w;
}

/// Long-format export (series_id,date,value,label,level), finite cells only.
inline void write_panel_csv(std::ostream& os, const Panel& panel) {
  os << "series_id,date,value,label,level\n";
  for (int i = 0; i < panel.n_series(); ++i)
    for (int t = 0; t < panel.n_dates(); ++t) {
      const double v = panel.values(t, i);
      if (!std::isfinite(v)) continue;
      os << text::csv_field(panel.series[i].id) << ',' << panel.dates[t].str() << ',' << text::format_double(v)
         << ',' << text::csv_field(panel.series[i].label) << ',' << level_name(panel.series[i].level) << '\n';
    }
}

/// Reads a file written by write_panel_csv back as a rate panel.
inline RatePanel load_rate_panel(const std::string& path, const std::string& target_id) {
  PanelSchema schema;
  schema.target_id = target_id;
  RatePanel out;
  static_cast<Panel&>(out) = load_panel(path, schema);
  return out;
}

}  // namespace ragnar
