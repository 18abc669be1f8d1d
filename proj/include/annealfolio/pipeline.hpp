#pragma once

#include "annealfolio/allocator.hpp"
#include "annealfolio/marketdata.hpp"
#include "annealfolio/model.hpp"
#include "annealfolio/sampler.hpp"

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace annealfolio {

enum class Strategy { hybrid, fully_quantum };
enum class AllocatorMode { max_sharpe, mvo };

/// ticker -> close on one date.
using PriceRow = std::map<std::string, double>;

struct PipelineConfig {
  Strategy strategy = Strategy::hybrid;
  double budget = 0.0;
  /// Empty means derive k from the full-universe convex solve.
  std::optional<std::size_t> cardinality;
  double q = 1.0;
  /// Empty means the model's default penalty weight.
  std::optional<double> lambda;
  /// Empty means default_schedule() of the model being sampled.
  std::optional<AnnealSchedule> sampler;
  std::uint64_t seed = 0;
  AllocatorConfig allocator;
  AllocatorMode allocator_mode = AllocatorMode::max_sharpe;
  double slack_granularity = 1.0;
  /// Classical clean-up of sampled share vectors in the integer path.
  bool polish_shares = true;
  ReturnMethod return_method = ReturnMethod::simple;
  Period period = Period::daily;
  double annualization_factor = 252.0;

  void validate() const;
};

struct Holdings {
  std::map<std::string, std::int64_t> shares;
  double cash = 0.0;
  Date as_of{};

  /// Tickers with a positive share count.
  std::vector<std::string> held() const;
  bool operator==(const Holdings&) const = default;
};

inline constexpr std::size_t kMaxEncodedBits = 64;

struct Selection {
  std::vector<std::size_t> indices;  ///< ascending
  double energy = 0.0;
  double lambda_used = 0.0;
  bool exhaustive_fallback = false;
};

/// Picks exactly k assets by sampling the penalized mean-variance QUBO.
/// Retries once with doubled lambda, then enumerates when n <= 24.
Selection select_assets(const AssetStats& stats, std::size_t k, double q, std::optional<double> lambda,
                        const std::optional<AnnealSchedule>& schedule, std::uint64_t seed);

/// Whole shares from target weights: floor, then one extra share per asset in
/// order of largest fractional remainder (ties by ticker) while cash allows.
Holdings to_shares(const WeightVector& weights, const PriceRow& prices, double budget, Date as_of = {});

/// sum shares_i * p_i + cash. Throws InputError when a held ticker has no price.
double portfolio_value(const Holdings& h, const PriceRow& prices);

/// Fractions of invested (non-cash) value. Empty when nothing is held.
WeightVector realized_weights(const Holdings& h, const PriceRow& prices);

struct PipelineResult {
  Strategy strategy = Strategy::hybrid;
  std::vector<std::string> selected;
  std::size_t cardinality = 0;
  CardinalityMode cardinality_mode = CardinalityMode::support;
  bool cardinality_auto = false;
  WeightVector weights_target;
  WeightVector weights_realized;
  Holdings holdings;
  double budget = 0.0;
  std::optional<PortfolioMetrics> metrics;         ///< on realized weights
  std::optional<PortfolioMetrics> target_metrics;  ///< on target weights
  std::uint64_t seed = 0;
};

/// Convex Sharpe solve for k (when auto), annealed selection of k assets,
/// classical weights on the selection, whole-share purchase at the last date.
PipelineResult hybrid_optimize(const PriceMatrix& prices, const PipelineConfig& cfg);

/// Same flow over a pre-computed stats and a single price row (used by the backtester).
PipelineResult hybrid_optimize(const AssetStats& stats, const PriceRow& prices, const PipelineConfig& cfg, Date as_of);

/// Integer share counts straight from the budget-constrained quadratic model.
/// With cfg.polish_shares, each budget-feasible sample is first improved by a
/// share-level local search. Throws SolverError when the encoding needs more than 64 binaries or no
/// sampled assignment respects the budget.
Holdings optimize_integer_shares(const PriceRow& prices, const AssetStats& stats, const PipelineConfig& cfg,
                                 Date as_of = {});

/// Wraps optimize_integer_shares into a PipelineResult with realized metrics.
PipelineResult fully_quantum_optimize(const AssetStats& stats, const PriceRow& prices, const PipelineConfig& cfg,
                                      Date as_of);

/// Dispatches on cfg.strategy using stats estimated from the whole matrix and
/// prices of its last date.
PipelineResult run_pipeline(const PriceMatrix& prices, const PipelineConfig& cfg);

AssetStats stats_from_prices(const PriceMatrix& prices, const PipelineConfig& cfg);

}  // namespace annealfolio
