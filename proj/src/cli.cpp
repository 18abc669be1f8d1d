#include "annealfolio/cli.hpp"

#include "annealfolio/config.hpp"
#include "annealfolio/error.hpp"
#include "annealfolio/report.hpp"
#include "annealfolio/synthetic.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <ostream>

namespace annealfolio {

namespace fs = std::filesystem;

namespace {

// Flag values as given; anything unset stays out of the config document.
struct RunFlags {
  std::string config;
  std::string prices;
  std::string sectors;
  std::string out_dir;
  std::string budget;
  std::string strategy;
  std::string seed;
  std::string cardinality;
  std::string q;
  std::string lambda;
  std::string period_months;
  std::string benchmark;
  std::vector<std::string> sets;
};

void add_run_flags(CLI::App* cmd, RunFlags& f) {
  cmd->add_option("--config", f.config, "JSON config file");
  cmd->add_option("--prices", f.prices, "price CSV (date,ticker,close)");
  cmd->add_option("--sectors", f.sectors, "sector CSV (ticker,sector)");
  cmd->add_option("--out-dir", f.out_dir, "output directory (default $ANNEALFOLIO_OUT_DIR or ./out)");
  cmd->add_option("--budget", f.budget, "budget in currency units");
  cmd->add_option("--strategy", f.strategy, "hybrid or fully_quantum");
  cmd->add_option("--seed", f.seed, "64-bit seed (required here or in the config)");
  cmd->add_option("--cardinality", f.cardinality, "number of assets, or auto");
  cmd->add_option("--q", f.q, "risk aversion");
  cmd->add_option("--lambda", f.lambda, "selection penalty weight, or auto");
  cmd->add_option("--period-months", f.period_months, "rebalance period in months");
  cmd->add_option("--benchmark", f.benchmark, "equal, a ticker, or a weights JSON file");
  cmd->add_option("--set", f.sets, "key.path=value override (repeatable)");
}

Json read_json_file(const fs::path& p, const char* what) {
  std::ifstream in(p);
  if (!in) throw InputError(std::string("cannot open ") + what + ": " + p.string());
  Json doc = Json::parse(in, nullptr, false);
  if (doc.is_discarded()) throw InputError(std::string(what) + " is not valid JSON: " + p.string());
  return doc;
}

void set_path(Json& doc, const std::string& key, const std::string& value) {
  doc[key] = fs::absolute(value).lexically_normal().string();
}

RunConfig load_run_config(const RunFlags& f) {
  Json doc = default_config_json();
  fs::path base = fs::current_path();
  if (!f.config.empty()) {
    const fs::path cfg_path = fs::absolute(f.config);
    if (!fs::exists(cfg_path)) throw InputError("config file not found: " + f.config);
    const Json user = read_json_file(cfg_path, "config file");
    if (!user.is_object()) throw InputError("config file must hold a JSON object: " + f.config);
    doc.merge_patch(user);
    base = cfg_path.parent_path();
  }
  if (!doc.contains("out_dir") || doc["out_dir"] == "out") {
    if (const char* env = std::getenv("ANNEALFOLIO_OUT_DIR"); env && *env) set_path(doc, "out_dir", env);
  }

  if (!f.prices.empty()) set_path(doc, "prices", f.prices);
  if (!f.sectors.empty()) set_path(doc, "sectors", f.sectors);
  if (!f.out_dir.empty()) set_path(doc, "out_dir", f.out_dir);
  auto over = [&](const char* key, const std::string& v) {
    if (!v.empty()) apply_override(doc, std::string(key) + "=" + v);
  };
  over("pipeline.budget", f.budget);
  over("pipeline.strategy", f.strategy);
  over("seed", f.seed);
  over("pipeline.cardinality", f.cardinality);
  over("pipeline.q", f.q);
  over("pipeline.lambda", f.lambda);
  over("rebalance.period_months", f.period_months);
  if (!f.benchmark.empty()) {
    if (f.benchmark == "equal") {
      doc["benchmark"] = "equal";
    } else if (fs::is_regular_file(f.benchmark)) {
      doc["benchmark"] = Json{{"weights_file", fs::absolute(f.benchmark).string()}};
    } else {
      doc["benchmark"] = Json{{"ticker", f.benchmark}};
    }
  }
  for (const auto& s : f.sets) apply_override(doc, s);
  return parse_run_config(doc, base);
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw InputError("cannot write " + p.string());
  out << text;
  if (!out) throw SolverError("failed writing " + p.string());
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw InputError("cannot create output directory " + dir.string() + ": " + ec.message());
}

int cmd_optimize(const RunFlags& f, std::ostream& out) {
  const RunConfig rc = load_run_config(f);
  const PriceMatrix prices = load_prices(rc.prices);
  const PipelineResult result = run_pipeline(prices, rc.pipeline);

  Json doc = to_json(result);
  const AssetStats stats = stats_from_prices(prices, rc.pipeline);
  const WeightVector bench = resolve_benchmark(rc.benchmark, prices.tickers, rc.prices.parent_path()).resolve();
  doc["benchmark"] = metrics_json(compute_metrics(bench, stats, rc.pipeline.allocator), bench);
  doc["config"] = config_echo(rc.pipeline);
  const std::string table = render_report(doc);

  ensure_dir(rc.out_dir);
  write_text(rc.out_dir / "optimize_result.json", doc.dump(2) + "\n");
  write_text(rc.out_dir / "optimize_table.txt", table);
  out << table;
  char cash[64];
  std::snprintf(cash, sizeof(cash), "cash left: %.2f\n", result.holdings.cash);
  out << cash;
  out << "wrote " << (rc.out_dir / "optimize_result.json").string() << '\n';
  return kExitOk;
}

int cmd_backtest(const RunFlags& f, std::ostream& out, std::ostream& err) {
  const RunConfig rc = load_run_config(f);
  if (!rc.sectors) throw InputError("backtest needs a sector file (set \"sectors\" or pass --sectors)");
  const PriceMatrix prices = load_prices(rc.prices);
  const SectorMap sectors = load_sectors(*rc.sectors);
  const BenchmarkSpec bench = resolve_benchmark(rc.benchmark, prices.tickers, rc.prices.parent_path());
  const BacktestReport rep = run_backtest(prices, sectors, rc.pipeline.budget, rc.pipeline, rc.rebalance, bench);

  ensure_dir(rc.out_dir);
  write_text(rc.out_dir / "backtest_report.json", to_json(rep, rc.pipeline, rc.rebalance).dump(2) + "\n");
  std::ostringstream csv;
  write_plot_csv(csv, rep);
  write_text(rc.out_dir / "backtest_plot.csv", csv.str());

  for (const auto& w : rep.warnings) err << "warning: " << w << '\n';
  char buf[160];
  std::snprintf(buf, sizeof(buf), "events: %zu\ninitial: %.2f\nfinal algorithm: %.2f\nfinal benchmark: %.2f\n",
                rep.events.size(), rep.initial_budget, rep.final_algo, rep.final_bench);
  out << buf;
  out << "wrote " << (rc.out_dir / "backtest_report.json").string() << '\n';
  return kExitOk;
}

int cmd_report(const std::string& path, const std::string& out_path, std::ostream& out) {
  if (!fs::exists(path)) throw InputError("result file not found: " + path);
  const Json doc = read_json_file(path, "result file");
  const std::string table = render_report(doc);
  if (!out_path.empty()) write_text(out_path, table);
  out << table;
  return kExitOk;
}

int cmd_gen_data(const std::string& out_dir, std::uint64_t seed, std::ostream& out) {
  const SyntheticSpec spec = default_synthetic_spec(seed);
  const PriceMatrix prices = generate_prices(spec);
  const fs::path dir(out_dir);
  ensure_dir(dir);
  std::ostringstream p, s;
  write_prices_csv(p, prices);
  write_sectors_csv(s, spec);
  write_text(dir / "synthetic_prices.csv", p.str());
  write_text(dir / "synthetic_sectors.csv", s.str());
  out << "wrote " << prices.dates.size() << " dates x " << prices.tickers.size() << " tickers to "
      << dir.string() << '\n';
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Annealing-based portfolio selection, allocation and rebalancing backtests"};
  app.name(args.empty() ? "annealfolio" : args.front());
  app.require_subcommand(1);

  RunFlags opt_flags, bt_flags;
  auto* optimize = app.add_subcommand("optimize", "select assets and allocate a budget");
  add_run_flags(optimize, opt_flags);
  auto* backtest = app.add_subcommand("backtest", "run the periodic rebalancing backtest");
  add_run_flags(backtest, bt_flags);

  std::string report_path, report_out;
  auto* report = app.add_subcommand("report", "render a weights and metrics table from a result JSON");
  report->add_option("result", report_path, "result JSON")->required();
  report->add_option("--out", report_out, "also write the table to this file");

  std::string gen_dir = "data";
  std::uint64_t gen_seed = default_synthetic_spec().seed;
  auto* gen = app.add_subcommand("gen-data", "regenerate the bundled synthetic dataset");
  gen->add_option("--out-dir", gen_dir, "output directory")->capture_default_str();
  gen->add_option("--seed", gen_seed, "generator seed")->capture_default_str();

  try {
    std::vector<std::string> rest(args.size() > 1 ? args.begin() + 1 : args.end(), args.end());
    std::reverse(rest.begin(), rest.end());
    app.parse(rest);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*optimize) return cmd_optimize(opt_flags, out);
    if (*backtest) return cmd_backtest(bt_flags, out, err);
    if (*report) return cmd_report(report_path, report_out, out);
    if (*gen) return cmd_gen_data(gen_dir, gen_seed, out);
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const SolverError& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitInput;
}

}  // namespace annealfolio
