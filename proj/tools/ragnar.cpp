// Command-line driver: staged subcommands sharing one result directory, plus
// `run` for the full multi-seed pipeline.
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "ragnar/ragnar.hpp"

namespace fs = std::filesystem;
using namespace ragnar;

#ifndef RAGNAR_VERSION
#define RAGNAR_VERSION "dev"
#endif

namespace {

struct Globals {
  std::string config;
  unsigned threads = 0;
  bool threads_set = false;
  std::string seed_list;
  std::string out;
  bool resume = false;
};

struct Loaded {
  Config raw;
  fs::path base;  // config directory, for relative data paths
  BacktestConfig bt;
  fs::path out;
};

Loaded load(const Globals& g) {
  Loaded l;
  if (g.config.empty()) throw ConfigError("", "--config is required");
  l.raw = Config::load(g.config);
  l.raw.apply_env();
  if (g.threads_set) l.raw.set("run.threads", std::to_string(g.threads));
  if (!g.seed_list.empty()) l.raw.set("run.seeds", g.seed_list);
  l.base = fs::path(g.config).parent_path();
  l.bt = backtest_config(l.raw);
  l.out = !g.out.empty() ? fs::path(g.out) : fs::path(l.raw.str("run.out", "results"));
  return l;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void require(const fs::path& p, const std::string& stage) {
  if (!fs::exists(p))
    throw StageOrderError("missing " + p.string() + "; run `" + stage + "` first");
}

std::vector<std::uint64_t> seeds_of(const Loaded& l) {
  auto s = l.raw.uint_list("run.seeds", {l.raw.unsigned_integer("graphs.seed", 1)});
  if (s.empty()) throw ConfigError("run.seeds", "needs at least one seed");
  return s;
}

// --- stages -----------------------------------------------------------------

RatePanel ingest(const Loaded& l, const fs::path& dir) {
  fs::path data = l.raw.required("data.path");
  if (data.is_relative()) data = l.base / data;
  const PricePanel prices = load_panel(data.string(), panel_schema(l.raw));
  RatePanel rates = yoy_transform(prices);
  const YearMonth from = l.bt.start ? *l.bt.start - (l.bt.n_train + l.bt.n_val - 1) : rates.dates.front();
  rates = complete_series(rates, std::max(from, rates.dates.front()));
  fs::create_directories(dir);
  std::ofstream os(dir / "panel.csv");
  write_panel_csv(os, rates);
  os.close();
  std::ofstream info(dir / "ingest.txt");
  info << "series=" << rates.n_series() << "\nfirst=" << rates.dates.front().str()
       << "\nlast=" << rates.dates.back().str() << "\ntarget=" << rates.series[rates.target].id
       << "\nfingerprint=" << text::hex64(text::fnv1a64(slurp(dir / "panel.csv"))) << '\n';
  return rates;
}

RatePanel read_panel(const Loaded& l, const fs::path& dir) {
  require(dir / "panel.csv", "ingest");
  return load_rate_panel((dir / "panel.csv").string(), l.raw.required("data.target"));
}

std::vector<Graph> gen_graphs(int n_nodes, int count, double pi, std::uint64_t seed, unsigned threads,
                              const fs::path& dir) {
  const auto graphs = generate_ensemble(n_nodes, pi, seed, static_cast<std::size_t>(count), threads);
  fs::create_directories(dir);
  std::ofstream os(dir / "graphs.txt");
  write_graphs(os, graphs);
  return graphs;
}

std::vector<Graph> read_ensemble(const fs::path& dir) {
  require(dir / "graphs.txt", "gen-graphs");
  std::ifstream in(dir / "graphs.txt");
  return read_graphs(in);
}

void rank(const Loaded& l, const RatePanel& panel, const std::vector<Graph>& graphs, const fs::path& dir) {
  const auto origins = backtest_origins(l.bt, panel);
  const YearMonth as_of = origins.front();
  RankingEngine engine(panel, graphs, l.bt.n_train, l.bt.n_val, l.bt.threads);
  const int k = top_k(static_cast<int>(graphs.size()), l.bt.k_fraction);
  std::ofstream os(dir / "ranking.csv");
  os << "as_of,model,selected_p,selected_s,graph_id,rmse,rank\n";
  for (const auto& m : l.bt.menu()) {
    if (!m.is_network() || m.kind == ModelEntry::Kind::directed) continue;
    RankingTable t;
    if (m.kind == ModelEntry::Kind::gnar_bic) {
      std::vector<MemberSpec> cands;
      const std::vector<int> stages = m.bic_stage > 0 ? std::vector<int>{m.bic_stage} : l.bt.bic_stages;
      for (int p = 1; p <= l.bt.bic_max_p; ++p)
        for (int s : stages) cands.push_back({p, s});
      t = select_spec(engine, cands, as_of, panel.target, k).ranking;
    } else {
      const ModelMembers members = m.kind == ModelEntry::Kind::gnar_fixed
                                       ? ModelMembers{m.fixed}
                                       : member_grid(l.bt.order_sets.at(m.order_set), l.bt.stage_sets.at(m.stage_set));
      t = engine.rank(members, as_of, panel.target);
    }
    const bool single = t.members.size() == 1;
    for (int r = 0; r < t.n_graphs(); ++r) {
      const int id = t.order[r];
      os << as_of.str() << ',' << text::csv_field(m.text) << ',' << (single ? std::to_string(t.members[0].p) : "")
         << ',' << (single ? std::to_string(t.members[0].s) : "") << ',' << id << ','
         << text::format_double(t.rmse[id]) << ',' << r + 1 << '\n';
    }
  }
}

BacktestResult backtest(const Loaded& l, const RatePanel& panel, const std::vector<Graph>& graphs, const fs::path& dir,
                        bool resume, bool staged) {
  if (staged) {
    require(dir / "ranking.csv", "rank");
    std::ifstream in(dir / "ranking.csv");
    std::string line;
    std::getline(in, line);
    const std::string first = backtest_origins(l.bt, panel).front().str();
    if (std::getline(in, line) && line.rfind(first, 0) != 0)
      throw StageOrderError("ranking.csv does not match the configured backtest start; rerun `rank`");
  }
  BacktestOptions opt;
  opt.checkpoint = (dir / "checkpoint.json").string();
  opt.resume = resume;
  const BacktestResult r = run_backtest(l.bt, panel, graphs, opt);
  write_backtest(dir, r);
  return r;
}

EvalReport evaluate(const Loaded& l, const RatePanel& panel, const fs::path& dir) {
  require(dir / "forecasts" / "index.csv", "backtest");
  const BacktestResult r = read_backtest(dir);
  const std::string bench = l.raw.str("evaluation.benchmark", "AvAR(P2)");
  const EvalReport rep = horizon_table(r, panel, bench);
  {
    std::ofstream os(dir / "report.csv");
    write_report_csv(os, rep);
    std::ofstream js(dir / "report.json");
    js << report_json(rep).dump(2) << '\n';
  }
  std::string comp_model = l.raw.str("evaluation.component_model", "");
  if (comp_model.empty())
    for (const auto& m : l.bt.menu())
      if (m.is_network() && m.kind != ModelEntry::Kind::directed) {
        comp_model = m.text;
        break;
      }
  if (!comp_model.empty()) {
    std::vector<std::string> comps;
    for (int i = 0; i < panel.n_series(); ++i)
      if (i != panel.target) comps.push_back(panel.series[i].id);
    const int smoothing = static_cast<int>(l.raw.integer("evaluation.smoothing", 6));
    std::ofstream os(dir / "components.csv");
    write_components_csv(os, component_frequency(r, comp_model, comps, smoothing));
  }
  if (l.raw.has("evaluation.external")) {
    fs::path ext = l.raw.str("evaluation.external", "");
    if (ext.is_relative()) ext = l.base / ext;
    std::ifstream in(ext);
    if (!in) throw ConfigError("evaluation.external", "cannot open " + ext.string());
    const auto external = read_external(in);
    const auto cmp = compare_external(r, panel, external, l.raw.str("evaluation.external_label", bench));
    std::ofstream os(dir / "external.csv");
    write_report_csv(os, cmp);
  }
  return rep;
}

int analytic_pmf(int n, double pi, int stage, std::size_t samples, std::uint64_t seed, unsigned threads) {
  std::cout << "# N=" << n << " pi=" << text::format_double(pi) << " stage=" << stage << '\n';
  std::map<int, double> empirical;
  if (samples > 0) empirical = empirical_neighbour_pmf(n, pi, stage, samples, seed, threads);
  if (stage <= kMaxExactStage) {
    const auto dist = neighbour_size_distribution(n, pi, stage);
    std::cout << "membership_prob=" << text::format_fixed(membership_prob(n, pi, stage), 10) << '\n';
    std::cout << "size,pmf" << (samples > 0 ? ",empirical" : "") << '\n';
    double max_dev = 0.0;
    for (int k = 0; k < static_cast<int>(dist.size()); ++k) {
      const double e = empirical.count(k) ? empirical.at(k) : 0.0;
      if (dist[k] < 1e-12 && e == 0.0) continue;
      std::cout << k << ',' << text::format_fixed(dist[k], 10);
      if (samples > 0) std::cout << ',' << text::format_fixed(e, 6);
      std::cout << '\n';
      max_dev = std::max(max_dev, std::abs(e - dist[k]));
    }
    if (samples > 0) std::cout << "max_abs_deviation=" << text::format_fixed(max_dev, 6) << '\n';
  } else {
    if (samples == 0) throw UnsupportedStageError("stage > 3 needs --samples for the Monte-Carlo estimate");
    std::cout << "size,empirical\n";
    for (const auto& [k, e] : empirical) std::cout << k << ',' << text::format_fixed(e, 6) << '\n';
  }
  return 0;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int run(const Globals& g) {
  const Loaded l = load(g);
  const auto seeds = seeds_of(l);
  fs::create_directories(l.out);
  nlohmann::json manifest;
  std::ostringstream snapshot;
  l.raw.write(snapshot);
  manifest["config"] = snapshot.str();
  manifest["prng"] = kPrngAlgorithm;
  manifest["seeds"] = seeds;
  manifest["version"] = RAGNAR_VERSION;
  manifest["timings"] = nlohmann::json::object();

  auto t0 = std::chrono::steady_clock::now();
  const RatePanel panel = ingest(l, l.out);
  manifest["panel_fingerprint"] = text::hex64(text::fnv1a64(slurp(l.out / "panel.csv")));
  manifest["timings"]["ingest"] = seconds_since(t0);
  auto write_manifest = [&] {
    std::ofstream os(l.out / "manifest.json");
    os << manifest.dump(2) << '\n';
  };
  write_manifest();

  std::vector<EvalReport> reports;
  for (auto seed : seeds) {
    const fs::path dir = l.out / ("seed_" + std::to_string(seed));
    fs::create_directories(dir);
    fs::copy_file(l.out / "panel.csv", dir / "panel.csv", fs::copy_options::overwrite_existing);
    const std::string key = "seed_" + std::to_string(seed);
    t0 = std::chrono::steady_clock::now();
    const auto graphs = gen_graphs(panel.n_series(), l.bt.n_graphs, l.bt.edge_prob, seed, l.bt.threads, dir);
    manifest["timings"][key]["gen_graphs"] = seconds_since(t0);
    t0 = std::chrono::steady_clock::now();
    rank(l, panel, graphs, dir);
    manifest["timings"][key]["rank"] = seconds_since(t0);
    t0 = std::chrono::steady_clock::now();
    backtest(l, panel, graphs, dir, g.resume, false);
    manifest["timings"][key]["backtest"] = seconds_since(t0);
    t0 = std::chrono::steady_clock::now();
    reports.push_back(evaluate(l, panel, dir));
    manifest["timings"][key]["evaluate"] = seconds_since(t0);
    write_manifest();
    std::cerr << "seed " << seed << " done\n";
  }
  const EvalReport agg = aggregate_runs(reports);
  std::ofstream os(l.out / "report.csv");
  write_report_csv(os, agg);
  std::ofstream js(l.out / "report.json");
  js << report_json(agg).dump(2) << '\n';
  write_manifest();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Random-graph GNAR inflation forecasting"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config, "Config file");
  app.add_option("--threads", g.threads, "Worker threads (0 = all cores)")->each([&](const std::string&) { g.threads_set = true; });
  app.add_option("--seed-list", g.seed_list, "Comma-separated run seeds");
  app.add_option("--out", g.out, "Result directory");
  app.add_flag("--resume", g.resume, "Resume a backtest from its checkpoint");

  auto* c_ingest = app.add_subcommand("ingest", "Load the price CSV and write the YoY rate panel");
  int n_graphs = 0, n_nodes = 0;
  double pi = -1.0;
  std::uint64_t seed = 0;
  bool seed_set = false;
  auto* c_gen = app.add_subcommand("gen-graphs", "Generate the random graph ensemble");
  c_gen->add_option("--g", n_graphs, "Number of graphs");
  c_gen->add_option("--n", n_nodes, "Node count (default: panel series)");
  c_gen->add_option("--pi", pi, "Edge probability");
  c_gen->add_option("--seed", seed, "Base seed")->each([&](const std::string&) { seed_set = true; });
  auto* c_rank = app.add_subcommand("rank", "Rank the ensemble at the first backtest origin");
  auto* c_bt = app.add_subcommand("backtest", "Run the rolling-origin backtest");
  auto* c_eval = app.add_subcommand("evaluate", "Write RMSE/MAPE reports and component frequencies");
  auto* c_run = app.add_subcommand("run", "Full pipeline for every seed plus an aggregate report");
  int pmf_n = 114, pmf_stage = 1;
  double pmf_pi = 0.03;
  std::size_t samples = 0;
  std::uint64_t pmf_seed = 1;
  auto* c_pmf = app.add_subcommand("analytic-pmf", "Neighbour-set size distribution and membership probability");
  c_pmf->add_option("--n", pmf_n, "Number of nodes");
  c_pmf->add_option("--pi", pmf_pi, "Edge probability");
  c_pmf->add_option("--stage", pmf_stage, "Neighbour stage");
  c_pmf->add_option("--samples", samples, "Monte-Carlo graphs (0 = none)");
  c_pmf->add_option("--seed", pmf_seed, "Monte-Carlo base seed");

  CLI11_PARSE(app, argc, argv);
  try {
    if (c_pmf->parsed()) return analytic_pmf(pmf_n, pmf_pi, pmf_stage, samples, pmf_seed, g.threads_set ? g.threads : 1);
    if (c_run->parsed()) return run(g);
    if (c_gen->parsed() && g.config.empty()) {
      // Standalone ensemble generation without a config.
      if (n_nodes < 1) throw ConfigError("--n", "needed without --config");
      gen_graphs(n_nodes, n_graphs > 0 ? n_graphs : 10000, pi >= 0 ? pi : 0.03, seed_set ? seed : 1,
                 g.threads_set ? g.threads : 1, g.out.empty() ? fs::path(".") : fs::path(g.out));
      return 0;
    }
    const Loaded l = load(g);
    if (c_ingest->parsed()) {
      ingest(l, l.out);
    } else if (c_gen->parsed()) {
      const int nodes = n_nodes > 0 ? n_nodes : read_panel(l, l.out).n_series();
      const double p = pi >= 0 ? pi : l.bt.edge_prob;
      if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("graphs.pi", "edge probability must lie in [0,1]");
      gen_graphs(nodes, n_graphs > 0 ? n_graphs : l.bt.n_graphs, p, seed_set ? seed : seeds_of(l).front(),
                 l.bt.threads, l.out);
    } else if (c_rank->parsed()) {
      const RatePanel panel = read_panel(l, l.out);
      rank(l, panel, read_ensemble(l.out), l.out);
    } else if (c_bt->parsed()) {
      const RatePanel panel = read_panel(l, l.out);
      const auto graphs = read_ensemble(l.out);
      backtest(l, panel, graphs, l.out, g.resume, true);
    } else if (c_eval->parsed()) {
      evaluate(l, read_panel(l, l.out), l.out);
    }
    return 0;
  } catch (const StageOrderError& e) {
    std::cerr << "stage-order error: " << e.what() << '\n';
    return 3;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
