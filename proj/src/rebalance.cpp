#include "annealfolio/rebalance.hpp"

#include "annealfolio/error.hpp"

#include <algorithm>
#include <cmath>

namespace annealfolio {

void RebalancePolicy::validate() const {
  if (period_months < 1) throw InputError("period_months must be at least 1");
  if (!(risk_vol_quantile > 0.0 && risk_vol_quantile <= 1.0)) throw InputError("risk_vol_quantile must be in (0, 1]");
  if (lookback_days < 2) throw InputError("lookback_days must be at least 2");
  if (!std::isfinite(risk_return_threshold)) throw InputError("risk_return_threshold must be finite");
}

namespace {

std::size_t returns_row(const ReturnsMatrix& returns, const Date& as_of) {
  const auto it = std::lower_bound(returns.dates.begin(), returns.dates.end(), as_of);
  if (it == returns.dates.end() || *it != as_of) {
    throw InputError("no return observation on " + format_date(as_of));
  }
  return static_cast<std::size_t>(it - returns.dates.begin());
}

/// Linear-interpolation sample quantile (the common "type 7" definition).
double quantile(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  const double h = (static_cast<double>(v.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

Date add_months(const Date& d, int months) {
  Date out = d + std::chrono::months{months};
  if (!out.ok()) out = std::chrono::year_month_day_last{out.year(), std::chrono::month_day_last{out.month()}};
  return out;
}

}  // namespace

std::map<std::string, AssetHealth> trailing_health(const ReturnsMatrix& returns, const Holdings& holdings,
                                                   const RebalancePolicy& policy, const Date& as_of) {
  const std::size_t row = returns_row(returns, as_of);
  if (row + 1 < policy.lookback_days) {
    throw InputError("insufficient history for a " + std::to_string(policy.lookback_days) + "-day lookback at " +
                     format_date(as_of));
  }
  const ReturnsMatrix window = returns.window(row, policy.lookback_days);
  std::map<std::string, AssetHealth> out;
  for (const auto& ticker : holdings.held()) {
    const auto it = std::find(window.tickers.begin(), window.tickers.end(), ticker);
    if (it == window.tickers.end()) throw InputError("no returns for held ticker '" + ticker + "'");
    const Eigen::VectorXd col = window.values.col(it - window.tickers.begin());
    const double mean = col.mean();
    const double var = (col.array() - mean).square().sum() / static_cast<double>(col.size() - 1);
    out.emplace(ticker, AssetHealth{mean, std::sqrt(var)});
  }
  return out;
}

std::set<std::string> identify_risky(const ReturnsMatrix& returns, const Holdings& holdings,
                                     const RebalancePolicy& policy, const Date& as_of) {
  const auto health = trailing_health(returns, holdings, policy, as_of);
  std::set<std::string> flagged;
  for (const auto& [ticker, h] : health) {
    if (h.mean_return <= policy.risk_return_threshold) flagged.insert(ticker);
  }
  if (policy.risk_vol_quantile < 1.0 && !health.empty()) {
    std::vector<double> vols;
    for (const auto& [ticker, h] : health) vols.push_back(h.volatility);
    const auto [lo, hi] = std::minmax_element(vols.begin(), vols.end());
    // Identical volatilities leave no asset with elevated risk.
    if (*hi > *lo) {
      const double cut = quantile(vols, policy.risk_vol_quantile);
      for (const auto& [ticker, h] : health) {
        if (h.volatility >= cut) flagged.insert(ticker);
      }
    }
  }
  return flagged;
}

HealthReport health_check(const Holdings& holdings, const PriceMatrix& prices, const ReturnsMatrix& returns,
                          const RebalancePolicy& policy, const Date& as_of, double initial_value) {
  HealthReport r;
  r.as_of = as_of;
  const auto row = prices.date_index(as_of);
  if (!row) throw InputError("no prices on " + format_date(as_of));
  r.portfolio_value = portfolio_value(holdings, prices.row_prices(*row));
  r.profit = r.portfolio_value - initial_value;
  if (holdings.held().empty()) return r;
  r.assets = trailing_health(returns, holdings, policy, as_of);
  r.flagged = identify_risky(returns, holdings, policy, as_of);
  return r;
}

TrailingStats::TrailingStats(const PriceMatrix& prices, const PipelineConfig& cfg, std::size_t lookback_days)
    : returns_(compute_returns(prices, cfg.return_method)),
      annualization_(cfg.annualization_factor),
      period_(cfg.period),
      lookback_(lookback_days) {}

AssetStats TrailingStats::at(std::size_t price_row, std::span<const std::string> tickers) const {
  if (price_row < lookback_) {
    throw InputError("price row " + std::to_string(price_row) + " has fewer than " + std::to_string(lookback_) +
                     " returns behind it");
  }
  const ReturnsMatrix window = returns_.window(price_row - 1, lookback_).columns(tickers);
  return estimate_stats(window, annualization_, period_);
}

std::pair<Holdings, RebalanceEvent> rebalance_step(const Holdings& holdings, const std::set<std::string>& flagged,
                                                   const PriceRow& prices, const SectorMap& sectors,
                                                   const TrailingStats& stats, std::size_t price_row,
                                                   const PipelineConfig& cfg, const RebalancePolicy& policy,
                                                   const Date& as_of) {
  Holdings next = holdings;
  next.as_of = as_of;
  RebalanceEvent ev;
  ev.date = as_of;
  ev.pre_cash = holdings.cash;
  ev.flagged.assign(flagged.begin(), flagged.end());

  if (flagged.empty()) {
    ev.new_budget = holdings.cash;
    ev.post_cash = holdings.cash;
    return {next, ev};
  }

  std::set<std::string> sold_sectors;
  double proceeds = 0.0;
  for (const auto& t : flagged) {
    const auto it = next.shares.find(t);
    if (it == next.shares.end() || it->second <= 0) throw InputError("flagged ticker '" + t + "' is not held");
    const auto p = prices.find(t);
    if (p == prices.end()) throw InputError("no price for '" + t + "'");
    const auto sec = sectors.find(t);
    if (sec == sectors.end()) throw InputError("no sector for '" + t + "'");
    sold_sectors.insert(sec->second);
    const Trade trade{it->second, static_cast<double>(it->second) * p->second};
    proceeds += trade.amount;
    ev.sold.emplace(t, trade);
    next.shares.erase(it);
  }
  const double budget = holdings.cash + proceeds;
  ev.new_budget = budget;
  const std::size_t wanted = flagged.size();
  const auto still_held = next.held();
  auto eligible = [&](const std::string& t) {
    return !flagged.contains(t) && std::find(still_held.begin(), still_held.end(), t) == still_held.end();
  };

  std::vector<std::string> in_sector, everywhere;
  for (const auto& [t, p] : prices) {
    if (!eligible(t)) continue;
    everywhere.push_back(t);
    const auto sec = sectors.find(t);
    if (sec != sectors.end() && sold_sectors.contains(sec->second)) in_sector.push_back(t);
  }
  // Universes to try in order. A sector universe whose optimizer fails (say,
  // no name beats the risk-free rate) also falls through to all sectors.
  std::vector<std::vector<std::string>> universes;
  if (in_sector.size() >= std::max(wanted, policy.min_candidates_per_sector)) universes.push_back(in_sector);
  if (everywhere.size() > in_sector.size() || universes.empty()) universes.push_back(everywhere);

  next.cash = budget;
  ev.post_cash = budget;
  ev.degenerate = true;
  PipelineConfig sub = cfg;
  sub.budget = budget;
  sub.cardinality = wanted;
  std::string failure;
  for (std::size_t u = 0; u < universes.size(); ++u) {
    const auto& candidates = universes[u];
    ev.universe_used = candidates;
    ev.widened = candidates.size() != in_sector.size() || u > 0;
    if (candidates.size() < wanted) {
      failure = "only " + std::to_string(candidates.size()) + " candidates for " + std::to_string(wanted) +
                " replacements";
      continue;
    }
    try {
      const AssetStats st = stats.at(price_row, candidates);
      const PipelineResult res = cfg.strategy == Strategy::hybrid ? hybrid_optimize(st, prices, sub, as_of)
                                                                  : fully_quantum_optimize(st, prices, sub, as_of);
      for (const auto& [t, n] : res.holdings.shares) {
        if (n <= 0) continue;
        ev.bought.emplace(t, Trade{n, static_cast<double>(n) * prices.at(t)});
        next.shares[t] += n;
      }
      next.cash = res.holdings.cash;
      ev.degenerate = false;
      if (ev.widened) {
        ev.note = failure.empty() ? "sold sectors too thin; widened to all sectors"
                                  : "widened to all sectors after: " + failure;
      }
      break;
    } catch (const SolverError& e) {
      failure = std::string("optimizer failed: ") + e.what();
    }
  }
  if (ev.degenerate) ev.note = failure + "; holding cash";
  ev.post_cash = next.cash;
  return {next, ev};
}

BenchmarkSpec BenchmarkSpec::equal(std::span<const std::string> tickers) {
  BenchmarkSpec b;
  b.weights = equal_weights(tickers);
  return b;
}

WeightVector BenchmarkSpec::resolve() const {
  if (weights) {
    weights->validate();
    return *weights;
  }
  if (ticker) {
    WeightVector w;
    w.tickers = {*ticker};
    w.weights = Eigen::VectorXd::Ones(1);
    return w;
  }
  throw InputError("benchmark needs weights or a ticker");
}

std::vector<std::size_t> boundary_rows(const PriceMatrix& prices, std::size_t start_row, int period_months) {
  std::vector<std::size_t> rows;
  if (start_row >= prices.dates.size() || period_months < 1) return rows;
  const Date start = prices.dates[start_row];
  for (int k = 1;; ++k) {
    const auto row = prices.first_on_or_after(add_months(start, k * period_months));
    if (!row) break;
    if (rows.empty() || *row > rows.back()) rows.push_back(*row);
  }
  return rows;
}

std::size_t backtest_start_row(const PriceMatrix& prices, const RebalancePolicy& policy) {
  if (prices.dates.size() <= policy.lookback_days) {
    throw InputError("price history of " + std::to_string(prices.dates.size()) + " dates is too short for a " +
                     std::to_string(policy.lookback_days) + "-day lookback");
  }
  return policy.lookback_days;
}

BacktestReport run_backtest(const PriceMatrix& prices, const SectorMap& sectors, double initial_budget,
                            const PipelineConfig& cfg, const RebalancePolicy& policy,
                            const BenchmarkSpec& benchmark) {
  policy.validate();
  PipelineConfig base = cfg;
  base.budget = initial_budget;
  base.validate();
  for (const auto& t : prices.tickers) {
    if (!sectors.contains(t)) throw InputError("no sector for '" + t + "'");
  }

  BacktestReport rep;
  rep.initial_budget = initial_budget;
  const std::size_t start = backtest_start_row(prices, policy);
  const TrailingStats stats(prices, base, policy.lookback_days);
  const Date start_date = prices.dates[start];

  const PriceRow start_prices = prices.row_prices(start);
  const AssetStats initial_stats = stats.at(start, prices.tickers);
  const PipelineResult initial = base.strategy == Strategy::hybrid
                                     ? hybrid_optimize(initial_stats, start_prices, base, start_date)
                                     : fully_quantum_optimize(initial_stats, start_prices, base, start_date);
  Holdings algo = initial.holdings;
  rep.initial_holdings = algo;

  const WeightVector bench_w = benchmark.resolve();
  for (const auto& t : bench_w.tickers) {
    if (!prices.ticker_index(t)) throw InputError("benchmark ticker '" + t + "' has no prices");
  }
  const Holdings bench = to_shares(bench_w, start_prices, initial_budget, start_date);
  rep.bench_holdings = bench;

  const auto boundaries = boundary_rows(prices, start, policy.period_months);
  if (boundaries.empty()) {
    rep.warnings.push_back("no rebalance boundary within the data range for period_months = " +
                           std::to_string(policy.period_months));
  }
  std::size_t next_boundary = 0;
  for (std::size_t row = start; row < prices.dates.size(); ++row) {
    const Date d = prices.dates[row];
    const PriceRow px = prices.row_prices(row);
    if (next_boundary < boundaries.size() && boundaries[next_boundary] == row) {
      ++next_boundary;
      HealthReport health = health_check(algo, prices, stats.returns(), policy, d, initial_budget);
      auto [updated, ev] = rebalance_step(algo, health.flagged, px, sectors, stats, row, base, policy, d);
      algo = std::move(updated);
      rep.health.push_back(std::move(health));
      rep.events.push_back(std::move(ev));
    }
    algo.as_of = d;
    rep.dates.push_back(d);
    rep.algo_values.push_back(portfolio_value(algo, px));
    rep.bench_values.push_back(portfolio_value(bench, px));
  }
  rep.final_holdings = algo;
  rep.final_algo = rep.algo_values.back();
  rep.final_bench = rep.bench_values.back();
  return rep;
}

}  // namespace annealfolio
