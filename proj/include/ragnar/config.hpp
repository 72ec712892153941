#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "ragnar/backtest.hpp"
#include "ragnar/errors.hpp"
#include "ragnar/gnar.hpp"
#include "ragnar/panel.hpp"
#include "ragnar/text.hpp"

namespace ragnar {

// Config files are sectioned key=value text:
//
//   col.series = series_id        # keys before any section are top-level
//   [graphs]
//   pi = 0.03                     # full path: graphs.pi
//
// Any key can be overridden from the environment as RAGNAR_<PATH>, where
// the path is upper-cased and '.' becomes "__" (RAGNAR_GRAPHS__PI).

inline const std::set<std::string>& known_config_keys() {
  static const std::set<std::string> keys{
      "col.series",          "col.date",           "col.value",           "col.label",
      "col.level",           "date.format",        "data.path",           "data.target",
      "data.max_level",      "graphs.count",       "graphs.pi",           "graphs.seed",
      "backtest.n_train",    "backtest.n_val",     "backtest.top_n",      "backtest.k_fraction",
      "backtest.horizon",    "backtest.cadence",   "backtest.start",      "backtest.end",
      "backtest.bic_max_p",  "backtest.bic_stages", "models.classes",     "models.labels",
      "evaluation.benchmark", "evaluation.smoothing", "evaluation.component_model",
      "evaluation.external", "evaluation.external_label", "run.seeds",    "run.threads",
      "run.out"};
  return keys;
}

inline bool is_set_key(const std::string& key) {
  return key.rfind("backtest.order_set.", 0) == 0 || key.rfind("backtest.stage_set.", 0) == 0;
}

inline std::string env_name(const std::string& key) {
  std::string out = "RAGNAR_";
  for (char ch : key) {
    if (ch == '.') out += "__";
    else out += static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  }
  return out;
}

/// Flat key -> value map with typed accessors; errors name the key path.
class Config {
 public:
  static Config parse(std::istream& in, const std::string& source = "config") {
    Config c;
    std::string line, section;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      const auto t = text::trim(line);
      if (t.empty()) continue;
      if (t.front() == '[') {
        if (t.back() != ']') throw ConfigError("", source + ":" + std::to_string(line_no) + ": bad section header");
        section = std::string(text::trim(t.substr(1, t.size() - 2)));
        continue;
      }
      const auto eq = t.find('=');
      if (eq == std::string_view::npos)
        throw ConfigError("", source + ":" + std::to_string(line_no) + ": expected key = value");
      std::string key(text::trim(t.substr(0, eq)));
      if (!section.empty()) key = section + "." + key;
      if (!known_config_keys().count(key) && !is_set_key(key)) throw ConfigError(key, "unknown configuration key");
      c.values_[key] = std::string(text::trim(t.substr(eq + 1)));
    }
    return c;
  }

  static Config load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("", "cannot open config file " + path);
    return parse(in, path);
  }

  /// Applies RAGNAR_* environment overrides for every known key and any
  /// set key already present.
  void apply_env() {
    std::vector<std::string> keys(known_config_keys().begin(), known_config_keys().end());
    for (const auto& [k, _] : values_)
      if (is_set_key(k)) keys.push_back(k);
    for (const auto& k : keys)
      if (const char* v = std::getenv(env_name(k).c_str())) values_[k] = std::string(text::trim(v));
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  void set(const std::string& key, std::string value) { values_[key] = std::move(value); }
  const std::map<std::string, std::string>& values() const { return values_; }

  std::string str(const std::string& key, const std::string& fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }

  std::string required(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end() || it->second.empty()) throw ConfigError(key, "required key is missing");
    return it->second;
  }

  long integer(const std::string& key, long fallback) const {
    if (!has(key)) return fallback;
    try {
      return static_cast<long>(text::parse_int(values_.at(key)));
    } catch (const DataError&) {
      throw ConfigError(key, "expected an integer, got '" + values_.at(key) + "'");
    }
  }

  std::uint64_t unsigned_integer(const std::string& key, std::uint64_t fallback) const {
    if (!has(key)) return fallback;
    try {
      return text::parse_uint(values_.at(key));
    } catch (const DataError&) {
      throw ConfigError(key, "expected a non-negative integer, got '" + values_.at(key) + "'");
    }
  }

  double real(const std::string& key, double fallback) const {
    if (!has(key)) return fallback;
    try {
      return text::parse_double(values_.at(key));
    } catch (const DataError&) {
      throw ConfigError(key, "expected a number, got '" + values_.at(key) + "'");
    }
  }

  std::vector<int> int_list(const std::string& key, std::vector<int> fallback) const {
    if (!has(key)) return fallback;
    std::vector<int> out;
    try {
      for (const auto& v : text::split_list(values_.at(key))) out.push_back(static_cast<int>(text::parse_int(v)));
    } catch (const DataError&) {
      throw ConfigError(key, "expected a comma-separated integer list, got '" + values_.at(key) + "'");
    }
    return out;
  }

  std::vector<std::uint64_t> uint_list(const std::string& key, std::vector<std::uint64_t> fallback) const {
    if (!has(key)) return fallback;
    std::vector<std::uint64_t> out;
    try {
      for (const auto& v : text::split_list(values_.at(key))) out.push_back(text::parse_uint(v));
    } catch (const DataError&) {
      throw ConfigError(key, "expected a comma-separated list of non-negative integers");
    }
    return out;
  }

  /// Comma-separated items; commas inside parentheses do not split, so
  /// "RW(1), GNAR(bic,1)" has two items.
  std::vector<std::string> list(const std::string& key, std::vector<std::string> fallback) const {
    if (!has(key)) return fallback;
    std::vector<std::string> out;
    std::string item;
    int depth = 0;
    auto flush = [&] {
      const auto t = text::trim(item);
      if (!t.empty()) out.emplace_back(t);
      item.clear();
    };
    for (char ch : values_.at(key)) {
      if (ch == '(') ++depth;
      if (ch == ')') --depth;
      if (ch == ',' && depth == 0) flush();
      else item += ch;
    }
    flush();
    return out;
  }

  std::optional<YearMonth> month(const std::string& key) const {
    if (!has(key) || values_.at(key).empty()) return std::nullopt;
    try {
      return YearMonth::parse(values_.at(key));
    } catch (const DataError&) {
      throw ConfigError(key, "expected YYYY-MM, got '" + values_.at(key) + "'");
    }
  }

  /// key = value lines grouped by section, in key order.
  void write(std::ostream& os) const {
    std::string section;
    for (const auto& [k, v] : values_)
      if (k.find('.') != std::string::npos && (k.rfind("col.", 0) == 0 || k.rfind("date.", 0) == 0))
        os << k << " = " << v << '\n';
    for (const auto& [k, v] : values_) {
      if (k.rfind("col.", 0) == 0 || k.rfind("date.", 0) == 0) continue;
      const auto dot = k.find('.');
      const std::string sec = k.substr(0, dot);
      if (sec != section) {
        os << '[' << sec << "]\n";
        section = sec;
      }
      os << k.substr(dot + 1) << " = " << v << '\n';
    }
  }

 private:
  std::map<std::string, std::string> values_;
};

inline PanelSchema panel_schema(const Config& c) {
  PanelSchema s;
  s.series_col = c.str("col.series", s.series_col);
  s.date_col = c.str("col.date", s.date_col);
  s.value_col = c.str("col.value", s.value_col);
  s.label_col = c.str("col.label", s.label_col);
  s.level_col = c.str("col.level", s.level_col);
  s.date_format = c.str("date.format", s.date_format);
  s.target_id = c.required("data.target");
  if (c.has("data.max_level")) {
    s.max_level = parse_level(c.str("data.max_level", ""));
    if (s.max_level == HierarchyLevel::unknown)
      throw ConfigError("data.max_level", "expected overall, division, group, class or item");
  }
  return s;
}

inline BacktestConfig backtest_config(const Config& c) {
  BacktestConfig b;
  b.n_train = static_cast<int>(c.integer("backtest.n_train", b.n_train));
  b.n_val = static_cast<int>(c.integer("backtest.n_val", b.n_val));
  b.n_graphs = static_cast<int>(c.integer("graphs.count", b.n_graphs));
  b.edge_prob = c.real("graphs.pi", b.edge_prob);
  b.top_n = c.int_list("backtest.top_n", b.top_n);
  b.k_fraction = c.real("backtest.k_fraction", b.k_fraction);
  b.horizon = static_cast<int>(c.integer("backtest.horizon", b.horizon));
  try {
    b.cadence = parse_cadence(c.str("backtest.cadence", "monthly"));
  } catch (const DomainError& e) {
    throw ConfigError("backtest.cadence", e.what());
  }
  b.bic_max_p = static_cast<int>(c.integer("backtest.bic_max_p", b.bic_max_p));
  b.bic_stages = c.int_list("backtest.bic_stages", b.bic_stages);
  for (const auto& [k, v] : c.values()) {
    if (k.rfind("backtest.order_set.", 0) == 0) b.order_sets[k.substr(19)] = c.int_list(k, {});
    if (k.rfind("backtest.stage_set.", 0) == 0) b.stage_sets[k.substr(19)] = c.int_list(k, {});
  }
  if (c.has("models.classes")) {
    b.classes.clear();
    for (const auto& name : c.list("models.classes", {})) {
      try {
        b.classes.push_back(parse_class(name));
      } catch (const DomainError& e) {
        throw ConfigError("models.classes", e.what());
      }
    }
  }
  if (c.has("models.labels")) b.models = c.list("models.labels", {});
  b.start = c.month("backtest.start");
  b.end = c.month("backtest.end");
  const long threads = c.integer("run.threads", 1);
  if (threads < 0) throw ConfigError("run.threads", "must be non-negative");
  b.threads = static_cast<unsigned>(threads);
  b.validate();
  return b;
}

}  // namespace ragnar
