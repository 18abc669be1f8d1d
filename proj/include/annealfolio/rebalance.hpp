#pragma once

#include "annealfolio/marketdata.hpp"
#include "annealfolio/pipeline.hpp"

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace annealfolio {

struct RebalancePolicy {
  int period_months = 3;
  /// Trailing mean daily return at or below this flags an asset.
  double risk_return_threshold = 0.0;
  /// Trailing volatility at or above this quantile of held volatilities flags
  /// an asset. 1.0 disables the volatility test.
  double risk_vol_quantile = 0.8;
  std::size_t lookback_days = 63;
  std::size_t min_candidates_per_sector = 1;

  void validate() const;
};

struct Trade {
  std::int64_t shares = 0;
  double amount = 0.0;  ///< proceeds for sells, cost for buys
  bool operator==(const Trade&) const = default;
};

struct RebalanceEvent {
  Date date{};
  std::map<std::string, Trade> sold;
  std::map<std::string, Trade> bought;
  double pre_cash = 0.0;
  double new_budget = 0.0;
  double post_cash = 0.0;
  std::vector<std::string> universe_used;
  std::vector<std::string> flagged;
  bool widened = false;
  bool degenerate = false;
  std::string note;
};

struct AssetHealth {
  double mean_return = 0.0;
  double volatility = 0.0;
};

struct HealthReport {
  Date as_of{};
  std::map<std::string, AssetHealth> assets;
  std::set<std::string> flagged;
  double portfolio_value = 0.0;
  double profit = 0.0;
};

/// Trailing mean/volatility of each held ticker over the lookback window
/// ending at `as_of` (a returns row date). Throws InputError on short history.
std::map<std::string, AssetHealth> trailing_health(const ReturnsMatrix& returns, const Holdings& holdings,
                                                   const RebalancePolicy& policy, const Date& as_of);

/// Held tickers with mean <= threshold, or volatility >= the policy quantile of
/// held volatilities (only when the quantile is below 1 and volatilities differ).
std::set<std::string> identify_risky(const ReturnsMatrix& returns, const Holdings& holdings,
                                     const RebalancePolicy& policy, const Date& as_of);

HealthReport health_check(const Holdings& holdings, const PriceMatrix& prices, const ReturnsMatrix& returns,
                          const RebalancePolicy& policy, const Date& as_of, double initial_value);

/// Annualized stats of `tickers` over the lookback window ending at a price row.
class TrailingStats {
 public:
  TrailingStats(const PriceMatrix& prices, const PipelineConfig& cfg, std::size_t lookback_days);

  /// Window of `lookback_days` returns ending at price row `price_row`.
  AssetStats at(std::size_t price_row, std::span<const std::string> tickers) const;
  const ReturnsMatrix& returns() const { return returns_; }

 private:
  ReturnsMatrix returns_;
  double annualization_;
  Period period_;
  std::size_t lookback_;
};

/// Sells every flagged position and reinvests proceeds plus cash into |flagged|
/// names drawn from the sold sectors (widening to all sectors when thin).
std::pair<Holdings, RebalanceEvent> rebalance_step(const Holdings& holdings, const std::set<std::string>& flagged,
                                                   const PriceRow& prices, const SectorMap& sectors,
                                                   const TrailingStats& stats, std::size_t price_row,
                                                   const PipelineConfig& cfg, const RebalancePolicy& policy,
                                                   const Date& as_of);

/// Benchmark held buy-and-hold from the start: explicit weights or one ticker.
struct BenchmarkSpec {
  std::optional<WeightVector> weights;
  std::optional<std::string> ticker;

  static BenchmarkSpec equal(std::span<const std::string> tickers);
  WeightVector resolve() const;
};

struct BacktestReport {
  std::vector<Date> dates;
  std::vector<double> algo_values;
  std::vector<double> bench_values;
  std::vector<RebalanceEvent> events;
  std::vector<HealthReport> health;
  Holdings initial_holdings;
  Holdings final_holdings;
  Holdings bench_holdings;
  double final_algo = 0.0;
  double final_bench = 0.0;
  double initial_budget = 0.0;
  std::vector<std::string> warnings;
};

/// Rebalance dates: start + k * period_months for k >= 1, rolled forward to
/// the next trading date, stopping at the end of data. Returns price rows.
std::vector<std::size_t> boundary_rows(const PriceMatrix& prices, std::size_t start_row, int period_months);

/// First price row with a full lookback window behind it.
std::size_t backtest_start_row(const PriceMatrix& prices, const RebalancePolicy& policy);

BacktestReport run_backtest(const PriceMatrix& prices, const SectorMap& sectors, double initial_budget,
                            const PipelineConfig& cfg, const RebalancePolicy& policy,
                            const BenchmarkSpec& benchmark);

}  // namespace annealfolio
