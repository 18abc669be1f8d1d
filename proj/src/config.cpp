#include "annealfolio/config.hpp"

#include "annealfolio/error.hpp"

#include <fstream>
#include <set>

namespace annealfolio {

namespace fs = std::filesystem;

void apply_override(Json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw InputError("override '" + assignment + "' is not key=value");
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);

  Json* node = &doc;
  std::size_t pos = 0;
  while (true) {
    const auto dot = key.find('.', pos);
    const std::string part = key.substr(pos, dot == std::string::npos ? std::string::npos : dot - pos);
    if (part.empty()) throw InputError("override key '" + key + "' has an empty component");
    if (node->is_null()) *node = Json::object();
    if (!node->is_object()) throw InputError("override key '" + key + "' descends into a non-object");
    node = &(*node)[part];
    if (dot == std::string::npos) break;
    pos = dot + 1;
  }
  Json value = Json::parse(raw, nullptr, false);
  *node = value.is_discarded() ? Json(raw) : std::move(value);
}

Json default_config_json() {
  return Json{
      {"out_dir", "out"},
      {"benchmark", "equal"},
      {"pipeline",
       {{"strategy", "hybrid"},
        {"budget", 1600000.0},
        {"cardinality", "auto"},
        {"q", 1.0},
        {"lambda", "auto"},
        {"allocator_mode", "max_sharpe"},
        {"slack_granularity", 1.0},
        {"polish_shares", true},
        {"return_method", "simple"},
        {"period", "daily"},
        {"annualization_factor", "auto"},
        {"sampler", "auto"}}},
      {"allocator",
       {{"risk_free_rate", 0.0},
        {"kkt_tolerance", 1e-8},
        {"max_iterations", 0},
        {"zero_weight_threshold", 1e-6},
        {"cardinality_mode", "support"}}},
      {"rebalance",
       {{"period_months", 3},
        {"risk_return_threshold", 0.0},
        {"risk_vol_quantile", 0.8},
        {"lookback_days", 63},
        {"min_candidates_per_sector", 1}}},
  };
}

namespace {

// Reads typed fields from one config object and rejects keys nobody asked for.
class Section {
 public:
  Section(const Json& j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j_.is_object()) throw InputError("config '" + name_ + "' must be an object");
  }

  const Json* find(const std::string& key) {
    seen_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() || it->is_null() ? nullptr : &*it;
  }

  template <class T>
  void get(const std::string& key, T& out) {
    if (const Json* v = find(key)) out = as<T>(*v, key);
  }

  template <class T>
  T as(const Json& v, const std::string& key) const {
    try {
      if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) throw InputError(where(key) + " must be true or false");
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!v.is_number()) throw InputError(where(key) + " must be a number");
      } else if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer()) throw InputError(where(key) + " must be an integer");
        if constexpr (std::is_unsigned_v<T>) {
          if (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0) {
            throw InputError(where(key) + " must not be negative");
          }
        }
      } else {
        if (!v.is_string()) throw InputError(where(key) + " must be a string");
      }
      return v.get<T>();
    } catch (const Json::exception& e) {
      throw InputError(where(key) + ": " + e.what());
    }
  }

  std::string where(const std::string& key) const { return name_.empty() ? key : name_ + "." + key; }

  void finish() const {
    for (const auto& [k, v] : j_.items()) {
      if (!seen_.count(k)) throw InputError("unknown config key '" + where(k) + "'");
    }
  }

 private:
  const Json& j_;
  std::string name_;
  std::set<std::string> seen_;
};

template <class E>
E parse_enum(const std::string& value, const std::string& key,
             std::initializer_list<std::pair<const char*, E>> options) {
  std::string names;
  for (const auto& [name, e] : options) {
    if (value == name) return e;
    names += names.empty() ? name : std::string(", ") + name;
  }
  throw InputError("config '" + key + "' must be one of " + names + " (got '" + value + "')");
}

fs::path resolve_path(const std::string& p, const fs::path& base) {
  const fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

AnnealSchedule parse_schedule(const Json& j) {
  Section s(j, "pipeline.sampler");
  AnnealSchedule out;
  s.get("t_initial", out.t_initial);
  s.get("t_final", out.t_final);
  s.get("sweeps", out.sweeps);
  s.get("restarts", out.restarts);
  std::string interp = "geometric";
  s.get("interpolation", interp);
  out.interpolation = parse_enum<Interpolation>(interp, "pipeline.sampler.interpolation",
                                                {{"geometric", Interpolation::geometric},
                                                 {"linear", Interpolation::linear}});
  s.finish();
  out.validate();
  return out;
}

void parse_pipeline(const Json& j, PipelineConfig& cfg) {
  Section s(j, "pipeline");
  std::string text;
  if (const Json* v = s.find("strategy")) {
    cfg.strategy = parse_enum<Strategy>(s.as<std::string>(*v, "strategy"), "pipeline.strategy",
                                        {{"hybrid", Strategy::hybrid}, {"fully_quantum", Strategy::fully_quantum}});
  }
  s.get("budget", cfg.budget);
  if (const Json* v = s.find("cardinality")) {
    if (v->is_string() && *v == "auto") {
      cfg.cardinality.reset();
    } else {
      const auto k = s.as<std::size_t>(*v, "cardinality");
      if (k == 0) throw InputError("pipeline.cardinality must be positive or \"auto\"");
      cfg.cardinality = k;
    }
  }
  s.get("q", cfg.q);
  if (const Json* v = s.find("lambda")) {
    if (v->is_string() && *v == "auto") {
      cfg.lambda.reset();
    } else {
      cfg.lambda = s.as<double>(*v, "lambda");
    }
  }
  if (const Json* v = s.find("allocator_mode")) {
    cfg.allocator_mode = parse_enum<AllocatorMode>(s.as<std::string>(*v, "allocator_mode"), "pipeline.allocator_mode",
                                                   {{"max_sharpe", AllocatorMode::max_sharpe},
                                                    {"mvo", AllocatorMode::mvo}});
  }
  s.get("slack_granularity", cfg.slack_granularity);
  s.get("polish_shares", cfg.polish_shares);
  if (const Json* v = s.find("return_method")) {
    cfg.return_method = parse_enum<ReturnMethod>(s.as<std::string>(*v, "return_method"), "pipeline.return_method",
                                                 {{"simple", ReturnMethod::simple}, {"log", ReturnMethod::log}});
  }
  if (const Json* v = s.find("period")) {
    cfg.period = parse_enum<Period>(s.as<std::string>(*v, "period"), "pipeline.period",
                                    {{"daily", Period::daily}, {"monthly", Period::monthly}});
  }
  cfg.annualization_factor = default_annualization(cfg.period);
  if (const Json* v = s.find("annualization_factor"); v && !(v->is_string() && *v == "auto")) {
    cfg.annualization_factor = s.as<double>(*v, "annualization_factor");
  }
  if (const Json* v = s.find("sampler"); v && !(v->is_string() && *v == "auto")) {
    cfg.sampler = parse_schedule(*v);
  } else {
    cfg.sampler.reset();
  }
  s.finish();
}

void parse_allocator(const Json& j, AllocatorConfig& cfg) {
  Section s(j, "allocator");
  s.get("risk_free_rate", cfg.risk_free_rate);
  s.get("kkt_tolerance", cfg.kkt_tolerance);
  s.get("max_iterations", cfg.max_iterations);
  s.get("zero_weight_threshold", cfg.zero_weight_threshold);
  if (const Json* v = s.find("cardinality_mode")) {
    cfg.cardinality_mode = parse_enum<CardinalityMode>(s.as<std::string>(*v, "cardinality_mode"),
                                                       "allocator.cardinality_mode",
                                                       {{"support", CardinalityMode::support},
                                                        {"rounded_sum", CardinalityMode::rounded_sum}});
  }
  s.finish();
}

void parse_rebalance(const Json& j, RebalancePolicy& p) {
  Section s(j, "rebalance");
  s.get("period_months", p.period_months);
  s.get("risk_return_threshold", p.risk_return_threshold);
  s.get("risk_vol_quantile", p.risk_vol_quantile);
  s.get("lookback_days", p.lookback_days);
  s.get("min_candidates_per_sector", p.min_candidates_per_sector);
  s.finish();
}

}  // namespace

RunConfig parse_run_config(const Json& doc, const fs::path& base_dir) {
  Section top(doc, "");
  RunConfig rc;

  const Json* prices = top.find("prices");
  if (!prices) throw InputError("no price file given (set \"prices\" in the config or pass --prices)");
  rc.prices = resolve_path(top.as<std::string>(*prices, "prices"), base_dir);
  if (!fs::exists(rc.prices)) throw InputError("price file not found: " + rc.prices.string());
  if (const Json* v = top.find("sectors")) {
    rc.sectors = resolve_path(top.as<std::string>(*v, "sectors"), base_dir);
    if (!fs::exists(*rc.sectors)) throw InputError("sector file not found: " + rc.sectors->string());
  }
  if (const Json* v = top.find("out_dir")) rc.out_dir = resolve_path(top.as<std::string>(*v, "out_dir"), base_dir);
  if (const Json* v = top.find("seed")) rc.seed = top.as<std::uint64_t>(*v, "seed");
  if (const Json* v = top.find("benchmark")) {
    rc.benchmark = *v;
  } else {
    rc.benchmark = "equal";
  }
  if (const Json* v = top.find("pipeline")) parse_pipeline(*v, rc.pipeline);
  if (const Json* v = top.find("allocator")) parse_allocator(*v, rc.pipeline.allocator);
  if (const Json* v = top.find("rebalance")) parse_rebalance(*v, rc.rebalance);
  top.finish();

  if (!rc.seed) throw InputError("a seed is required (set \"seed\" in the config or pass --seed)");
  rc.pipeline.seed = *rc.seed;
  rc.pipeline.allocator.risk_aversion_q = rc.pipeline.q;
  rc.pipeline.validate();
  rc.rebalance.validate();

  // Weight files are resolved relative to the config, like the other paths.
  if (rc.benchmark.is_object() && rc.benchmark.contains("weights_file")) {
    const auto& f = rc.benchmark["weights_file"];
    if (!f.is_string()) throw InputError("benchmark.weights_file must be a string");
    const fs::path p = resolve_path(f.get<std::string>(), base_dir);
    if (!fs::exists(p)) throw InputError("benchmark weights file not found: " + p.string());
    rc.benchmark["weights_file"] = p.string();
  }
  return rc;
}

BenchmarkSpec resolve_benchmark(const Json& spec, const std::vector<std::string>& universe, const fs::path& base_dir) {
  if (spec.is_null() || (spec.is_string() && spec == "equal")) return BenchmarkSpec::equal(universe);
  if (spec.is_string()) {
    BenchmarkSpec b;
    b.ticker = spec.get<std::string>();
    return b;
  }
  if (!spec.is_object()) throw InputError("benchmark must be \"equal\", a ticker, or an object");

  BenchmarkSpec b;
  if (spec.contains("ticker")) {
    if (!spec["ticker"].is_string()) throw InputError("benchmark.ticker must be a string");
    b.ticker = spec["ticker"].get<std::string>();
    return b;
  }
  Json weights;
  if (spec.contains("weights")) {
    weights = spec["weights"];
  } else if (spec.contains("weights_file")) {
    const fs::path p = resolve_path(spec["weights_file"].get<std::string>(), base_dir);
    std::ifstream in(p);
    if (!in) throw InputError("cannot open benchmark weights file: " + p.string());
    weights = Json::parse(in, nullptr, false);
    if (weights.is_discarded()) throw InputError("benchmark weights file is not valid JSON: " + p.string());
    if (weights.is_object() && weights.contains("weights")) weights = Json(weights["weights"]);
  } else {
    throw InputError("benchmark object needs \"ticker\", \"weights\" or \"weights_file\"");
  }
  if (!weights.is_object() || weights.empty()) throw InputError("benchmark weights must be a non-empty object");

  WeightVector w;
  w.weights.resize(static_cast<Eigen::Index>(weights.size()));
  Eigen::Index i = 0;
  for (const auto& [t, v] : weights.items()) {
    if (!v.is_number()) throw InputError("benchmark weight for '" + t + "' must be a number");
    w.tickers.push_back(t);
    w.weights(i++) = v.get<double>();
  }
  // Weights may be given in percent; normalize whatever scale was used.
  const double total = w.weights.sum();
  if (!(total > 0.0) || (w.weights.array() < 0.0).any()) {
    throw InputError("benchmark weights must be non-negative with a positive sum");
  }
  w.weights /= total;
  b.weights = std::move(w);
  return b;
}

}  // namespace annealfolio
