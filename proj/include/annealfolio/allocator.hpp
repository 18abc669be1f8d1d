#pragma once

#include "annealfolio/marketdata.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace annealfolio {

enum class CardinalityMode { support, rounded_sum };

struct AllocatorConfig {
  double risk_free_rate = 0.0;
  double risk_aversion_q = 1.0;
  double kkt_tolerance = 1e-8;
  /// 0 selects the default bound of 3n + 10 active-set iterations.
  std::size_t max_iterations = 0;
  double zero_weight_threshold = 1e-6;
  CardinalityMode cardinality_mode = CardinalityMode::support;

  void validate() const;
};

/// Long-only portfolio fractions over `tickers`, summing to one.
struct WeightVector {
  std::vector<std::string> tickers;
  Eigen::VectorXd weights;

  /// Throws InputError when a weight is negative or the sum is off by more than 1e-9.
  void validate() const;
};

struct PortfolioMetrics {
  double expected_return = 0.0;
  double risk = 0.0;
  double sharpe = 0.0;
  double diversification_ratio = 1.0;
  /// Risk was zero; sharpe holds +inf (or 0 with no excess return).
  bool zero_risk = false;
};

/// Optimality certificate of the simplex QP
///   min 1/2 y'Hy + c'y  s.t.  a'y = b, y >= 0
/// with multipliers lambda = Hy + c - nu a.
struct KktReport {
  double stationarity = 0.0;     ///< max |lambda_i| on the support, max(0, -lambda_i) off it
  double primal = 0.0;           ///< |a'y - b| and max(0, -y_i)
  double complementarity = 0.0;  ///< max |lambda_i y_i|

  double worst() const;
};

struct SharpeSolution {
  WeightVector weights;
  Eigen::VectorXd y_star;
  double nu = 0.0;
  Eigen::VectorXd multipliers;
  KktReport kkt;
  bool ridge_applied = false;
  std::size_t iterations = 0;
};

/// Maximum-Sharpe long-only weights over `subset` via
///   min y'Sigma y  s.t. (mu - r)'y = 1, y >= 0,  w = y / sum(y).
/// Throws SolverError when no subset asset beats the risk-free rate or the
/// active-set loop fails to certify a KKT point.
SharpeSolution max_sharpe_weights(const AssetStats& stats, std::span<const std::size_t> subset,
                                  const AllocatorConfig& cfg);

/// Long-only mean-variance weights: min q w'Sigma w - mu'w  s.t. 1'w = 1, w >= 0.
SharpeSolution mvo_weights(const AssetStats& stats, std::span<const std::size_t> subset, const AllocatorConfig& cfg);

/// Number of assets implied by a converged y*. `support` counts entries above
/// the zero-weight threshold; `rounded_sum` rounds sum(y*) and clamps to [1, n].
std::size_t derive_cardinality(const Eigen::VectorXd& y_star, const AllocatorConfig& cfg);

/// Weights may name any subset of stats.tickers; missing tickers weigh zero.
PortfolioMetrics compute_metrics(const WeightVector& weights, const AssetStats& stats, const AllocatorConfig& cfg);

WeightVector equal_weights(std::span<const std::string> tickers);

}  // namespace annealfolio
