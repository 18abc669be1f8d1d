#include "annealfolio/serialize.hpp"

#include "annealfolio/error.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

namespace annealfolio {

std::string bits_to_string(std::span<const std::uint8_t> x) {
  std::string s(x.size(), '0');
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i]) s[i] = '1';
  }
  return s;
}

Bits bits_from_string(std::string_view s) {
  Bits x(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '0' && s[i] != '1') throw InputError("state strings may only contain 0 and 1");
    x[i] = static_cast<std::uint8_t>(s[i] == '1');
  }
  return x;
}

std::string to_string(Strategy s) { return s == Strategy::hybrid ? "hybrid" : "fully_quantum"; }
std::string to_string(CardinalityMode m) { return m == CardinalityMode::support ? "support" : "rounded_sum"; }
std::string to_string(AllocatorMode m) { return m == AllocatorMode::max_sharpe ? "max_sharpe" : "mvo"; }
std::string to_string(ReturnMethod m) { return m == ReturnMethod::simple ? "simple" : "log"; }
std::string to_string(Period p) { return p == Period::daily ? "daily" : "monthly"; }
std::string to_string(Interpolation i) { return i == Interpolation::geometric ? "geometric" : "linear"; }

Json to_json(const QuboModel& m) {
  Json quad = Json::array();
  for (const auto& [key, b] : m.quadratic) quad.push_back(Json::array({key.first, key.second, b}));
  return Json{{"n", m.n}, {"linear", m.linear}, {"quadratic", std::move(quad)}, {"offset", m.offset}};
}

QuboModel qubo_from_json(const Json& j) {
  try {
    QuboModel m(j.at("n").get<std::size_t>());
    const auto linear = j.at("linear").get<std::vector<double>>();
    if (linear.size() != m.n) throw InputError("linear array length differs from n");
    m.linear = linear;
    for (const auto& e : j.at("quadratic")) {
      m.add_quadratic(e.at(0).get<std::size_t>(), e.at(1).get<std::size_t>(), e.at(2).get<double>());
    }
    m.offset = j.value("offset", 0.0);
    return m;
  } catch (const Json::exception& e) {
    throw InputError(std::string("bad model JSON: ") + e.what());
  }
}

Json to_json(const ConstrainedModel& cm) {
  Json out = to_json(cm.objective);
  Json cons = Json::array();
  for (const auto& c : cm.constraints) {
    cons.push_back(Json{{"coeffs", c.coeffs}, {"relation", c.relation == Relation::eq ? "eq" : "le"}, {"rhs", c.rhs}});
  }
  Json encs = Json::array();
  for (const auto& e : cm.encodings) {
    encs.push_back(Json{{"variable", e.variable},
                        {"lower", 0},
                        {"upper", e.upper},
                        {"bit_weights", e.bit_weights},
                        {"first_bit", e.first_bit}});
  }
  out["constraints"] = std::move(cons);
  out["encodings"] = std::move(encs);
  out["variable_names"] = cm.variable_names;
  return out;
}

Json to_json(const SampleSet& s) {
  Json samples = Json::array();
  for (const auto& r : s.records) {
    samples.push_back(Json{{"state", bits_to_string(r.state)}, {"energy", r.energy}, {"count", r.count}});
  }
  return Json{{"samples", std::move(samples)}, {"seed", s.seed}, {"n", s.model_n}};
}

Json metrics_json(const PortfolioMetrics& m, const WeightVector& w) {
  Json weights = Json::object();
  for (std::size_t i = 0; i < w.tickers.size(); ++i) {
    weights[w.tickers[i]] = 100.0 * w.weights(static_cast<Eigen::Index>(i));
  }
  Json out{{"return_pct", 100.0 * m.expected_return},
           {"risk_pct", 100.0 * m.risk},
           {"diversification_ratio", m.diversification_ratio},
           {"weights", std::move(weights)}};
  // JSON has no infinity; zero-risk portfolios carry a flag and a null Sharpe.
  out["sharpe"] = std::isfinite(m.sharpe) ? Json(m.sharpe) : Json(nullptr);
  if (m.zero_risk) out["zero_risk"] = true;
  return out;
}

namespace {

Json weights_object(const WeightVector& w) {
  Json out = Json::object();
  for (std::size_t i = 0; i < w.tickers.size(); ++i) out[w.tickers[i]] = w.weights(static_cast<Eigen::Index>(i));
  return out;
}

Json shares_object(const std::map<std::string, std::int64_t>& shares) {
  Json out = Json::object();
  for (const auto& [t, n] : shares) out[t] = n;
  return out;
}

Json trades_object(const std::map<std::string, Trade>& trades, const char* amount_key) {
  Json out = Json::object();
  for (const auto& [t, tr] : trades) out[t] = Json{{"shares", tr.shares}, {amount_key, tr.amount}};
  return out;
}

Json holdings_or_null(const Holdings& h) { return to_json(h); }

}  // namespace

Json to_json(const Holdings& h) {
  return Json{{"shares", shares_object(h.shares)}, {"cash", h.cash}, {"as_of", format_date(h.as_of)}};
}

Json to_json(const PipelineResult& r) {
  Json out{{"strategy", to_string(r.strategy)},
           {"selected", r.selected},
           {"cardinality", r.cardinality},
           {"cardinality_mode", r.cardinality_auto ? to_string(r.cardinality_mode) : "explicit"},
           {"weights_target", weights_object(r.weights_target)},
           {"weights_realized", weights_object(r.weights_realized)},
           {"shares", shares_object(r.holdings.shares)},
           {"cash", r.holdings.cash},
           {"as_of", format_date(r.holdings.as_of)},
           {"budget", r.budget},
           {"seed", r.seed}};
  out["metrics"] = r.metrics ? metrics_json(*r.metrics, r.weights_realized) : Json(nullptr);
  out["target_metrics"] = r.target_metrics ? metrics_json(*r.target_metrics, r.weights_target) : Json(nullptr);
  return out;
}

Json to_json(const RebalanceEvent& e) {
  return Json{{"date", format_date(e.date)},
              {"flagged", e.flagged},
              {"sold", trades_object(e.sold, "proceeds")},
              {"bought", trades_object(e.bought, "cost")},
              {"pre_cash", e.pre_cash},
              {"new_budget", e.new_budget},
              {"post_cash", e.post_cash},
              {"universe_used", e.universe_used},
              {"widened", e.widened},
              {"degenerate", e.degenerate},
              {"note", e.note}};
}

Json to_json(const HealthReport& h) {
  Json assets = Json::object();
  for (const auto& [t, a] : h.assets) assets[t] = Json{{"mean_return", a.mean_return}, {"volatility", a.volatility}};
  return Json{{"as_of", format_date(h.as_of)},
              {"assets", std::move(assets)},
              {"flagged", std::vector<std::string>(h.flagged.begin(), h.flagged.end())},
              {"portfolio_value", h.portfolio_value},
              {"profit", h.profit}};
}

Json to_json(const AnnealSchedule& s) {
  return Json{{"t_initial", s.t_initial},
              {"t_final", s.t_final},
              {"sweeps", s.sweeps},
              {"restarts", s.restarts},
              {"interpolation", to_string(s.interpolation)}};
}

Json to_json(const AllocatorConfig& c) {
  return Json{{"risk_free_rate", c.risk_free_rate},
              {"risk_aversion_q", c.risk_aversion_q},
              {"kkt_tolerance", c.kkt_tolerance},
              {"max_iterations", c.max_iterations},
              {"zero_weight_threshold", c.zero_weight_threshold},
              {"cardinality_mode", to_string(c.cardinality_mode)}};
}

Json to_json(const RebalancePolicy& p) {
  return Json{{"period_months", p.period_months},
              {"risk_return_threshold", p.risk_return_threshold},
              {"risk_vol_quantile", p.risk_vol_quantile},
              {"lookback_days", p.lookback_days},
              {"min_candidates_per_sector", p.min_candidates_per_sector}};
}

Json config_echo(const PipelineConfig& cfg, const RebalancePolicy* policy) {
  Json pipeline{{"strategy", to_string(cfg.strategy)},
                {"budget", cfg.budget},
                {"q", cfg.q},
                {"allocator_mode", to_string(cfg.allocator_mode)},
                {"slack_granularity", cfg.slack_granularity},
                {"polish_shares", cfg.polish_shares},
                {"return_method", to_string(cfg.return_method)},
                {"period", to_string(cfg.period)},
                {"annualization_factor", cfg.annualization_factor}};
  pipeline["cardinality"] = cfg.cardinality ? Json(*cfg.cardinality) : Json("auto");
  pipeline["lambda"] = cfg.lambda ? Json(*cfg.lambda) : Json("auto");
  pipeline["sampler"] = cfg.sampler ? to_json(*cfg.sampler) : Json("auto");
  Json out{{"pipeline", std::move(pipeline)}, {"allocator", to_json(cfg.allocator)}, {"seed", cfg.seed}};
  if (policy) out["rebalance"] = to_json(*policy);
  return out;
}

Json to_json(const BacktestReport& r, const PipelineConfig& cfg, const RebalancePolicy& policy) {
  Json dates = Json::array();
  for (const auto& d : r.dates) dates.push_back(format_date(d));
  Json events = Json::array();
  for (const auto& e : r.events) events.push_back(to_json(e));
  Json health = Json::array();
  for (const auto& h : r.health) health.push_back(to_json(h));
  return Json{{"dates", std::move(dates)},
              {"algo", r.algo_values},
              {"bench", r.bench_values},
              {"events", std::move(events)},
              {"health", std::move(health)},
              {"final", Json{{"algo", r.final_algo}, {"bench", r.final_bench}}},
              {"initial_budget", r.initial_budget},
              {"initial_holdings", holdings_or_null(r.initial_holdings)},
              {"final_holdings", holdings_or_null(r.final_holdings)},
              {"bench_holdings", holdings_or_null(r.bench_holdings)},
              {"warnings", r.warnings},
              {"config", config_echo(cfg, &policy)}};
}

void write_plot_csv(std::ostream& out, const BacktestReport& r) {
  out << "date,algo_value,bench_value\n";
  char buf[96];
  for (std::size_t i = 0; i < r.dates.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%s,%.2f,%.2f\n", format_date(r.dates[i]).c_str(), r.algo_values[i],
                  r.bench_values[i]);
    out << buf;
  }
}

}  // namespace annealfolio
