#include "annealfolio/allocator.hpp"
#include "annealfolio/error.hpp"
#include "testing.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

using namespace annealfolio;
using annealfolio::testing::make_stats;

namespace {

std::vector<std::size_t> all_of(std::size_t n) {
  std::vector<std::size_t> v(n);
  std::iota(v.begin(), v.end(), 0);
  return v;
}

AssetStats two_asset_example() {
  Eigen::VectorXd mu(2);
  mu << 0.1, 0.2;
  Eigen::MatrixXd sigma(2, 2);
  sigma << 0.01, 0.0, 0.0, 0.04;
  return make_stats(mu, sigma);
}

double sharpe_of(const Eigen::VectorXd& w, const AssetStats& st, double rf) {
  return (st.mu.dot(w) - rf) / std::sqrt(w.dot(st.sigma * w));
}

// Best Sharpe over uniform simplex samples plus the vertices.
double simplex_scan(const AssetStats& st, double rf, std::size_t samples, std::uint64_t seed) {
  const auto n = st.mu.size();
  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> e(1.0);
  double best = -1e300;
  for (Eigen::Index i = 0; i < n; ++i) best = std::max(best, sharpe_of(Eigen::VectorXd::Unit(n, i), st, rf));
  Eigen::VectorXd w(n);
  for (std::size_t s = 0; s < samples; ++s) {
    for (Eigen::Index i = 0; i < n; ++i) w(i) = e(rng);
    w /= w.sum();
    best = std::max(best, sharpe_of(w, st, rf));
  }
  return best;
}

// Independent KKT check of  min y'Sigma y  s.t. (mu - r)'y = 1, y >= 0.
double kkt_residual(const AssetStats& st, double rf, const Eigen::VectorXd& y) {
  const Eigen::VectorXd a = st.mu.array() - rf;
  const Eigen::VectorXd g = 2.0 * st.sigma * y;
  // nu from the support rows by least squares.
  double num = 0.0, den = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y(i) > 1e-12) {
      num += g(i) * a(i);
      den += a(i) * a(i);
    }
  }
  const double nu = num / den;
  double worst = std::abs(a.dot(y) - 1.0);
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double lam = g(i) - nu * a(i);
    worst = std::max(worst, std::max(0.0, -y(i)));
    worst = std::max(worst, y(i) > 1e-12 ? std::abs(lam) : std::max(0.0, -lam));
    worst = std::max(worst, std::abs(lam * y(i)));
  }
  return worst;
}

}  // namespace

TEST(allocator_config, validation) {
  AllocatorConfig c;
  EXPECT_NO_THROW(c.validate());
  c.kkt_tolerance = 0.0;
  EXPECT_THROW(c.validate(), InputError);
  c = AllocatorConfig{};
  c.zero_weight_threshold = -1.0;
  EXPECT_THROW(c.validate(), InputError);
  c = AllocatorConfig{};
  c.risk_aversion_q = 0.0;
  EXPECT_THROW(c.validate(), InputError);
}

TEST(max_sharpe, analytic_two_asset) {
  const AssetStats st = two_asset_example();
  const SharpeSolution s = max_sharpe_weights(st, all_of(2), AllocatorConfig{});
  EXPECT_NEAR(s.y_star(0), 5.0, 1e-8);
  EXPECT_NEAR(s.y_star(1), 2.5, 1e-8);
  EXPECT_NEAR(s.weights.weights(0), 2.0 / 3.0, 1e-8);
  EXPECT_NEAR(s.weights.weights(1), 1.0 / 3.0, 1e-8);
  EXPECT_LE(s.kkt.worst(), 1e-8);
  const PortfolioMetrics m = compute_metrics(s.weights, st, AllocatorConfig{});
  EXPECT_NEAR(m.sharpe, std::sqrt(2.0), 1e-6);
  EXPECT_LE(simplex_scan(st, 0.0, 20000, 1), m.sharpe + 1e-9);
}

TEST(max_sharpe, single_asset) {
  Eigen::VectorXd mu(1);
  mu << 0.1;
  const AssetStats st = make_stats(mu, Eigen::MatrixXd::Constant(1, 1, 0.01));
  const SharpeSolution s = max_sharpe_weights(st, all_of(1), AllocatorConfig{});
  EXPECT_DOUBLE_EQ(s.weights.weights(0), 1.0);
  EXPECT_NEAR(compute_metrics(s.weights, st, AllocatorConfig{}).sharpe, 1.0, 1e-12);
}

TEST(max_sharpe, identical_assets_split_evenly) {
  Eigen::VectorXd mu(2);
  mu << 0.1, 0.1;
  const AssetStats st = make_stats(mu, Eigen::MatrixXd::Identity(2, 2) * 0.02);
  const SharpeSolution s = max_sharpe_weights(st, all_of(2), AllocatorConfig{});
  EXPECT_NEAR(s.weights.weights(0), 0.5, 1e-9);
  EXPECT_NEAR(s.weights.weights(1), 0.5, 1e-9);
  EXPECT_NEAR(compute_metrics(s.weights, st, AllocatorConfig{}).sharpe, simplex_scan(st, 0.0, 20000, 2), 1e-6);
}

TEST(max_sharpe, subset_keeps_ticker_order) {
  std::mt19937_64 rng(4);
  const AssetStats st = annealfolio::testing::random_stats(rng, 5);
  const std::vector<std::size_t> subset{1, 3, 4};
  const SharpeSolution s = max_sharpe_weights(st, subset, AllocatorConfig{});
  EXPECT_EQ(s.weights.tickers, (std::vector<std::string>{"A1", "A3", "A4"}));
  EXPECT_NO_THROW(s.weights.validate());
}

TEST(max_sharpe, nobody_beats_risk_free) {
  Eigen::VectorXd mu(2);
  mu << -0.01, 0.02;
  const AssetStats st = make_stats(mu, Eigen::MatrixXd::Identity(2, 2) * 0.01);
  AllocatorConfig c;
  c.risk_free_rate = 0.05;
  EXPECT_THROW(max_sharpe_weights(st, all_of(2), c), SolverError);
}

TEST(max_sharpe, negative_excess_assets_get_zero_weight) {
  Eigen::VectorXd mu(3);
  mu << 0.15, -0.05, 0.08;
  Eigen::MatrixXd sigma(3, 3);
  sigma << 0.04, 0.01, 0.0, 0.01, 0.02, 0.0, 0.0, 0.0, 0.03;
  const AssetStats st = make_stats(mu, sigma);
  const SharpeSolution s = max_sharpe_weights(st, all_of(3), AllocatorConfig{});
  EXPECT_LT(s.weights.weights(1), 1e-9);
  EXPECT_LE(kkt_residual(st, 0.0, s.y_star), 1e-8);
  EXPECT_GE(compute_metrics(s.weights, st, AllocatorConfig{}).sharpe, simplex_scan(st, 0.0, 50000, 3) - 1e-6);
}

TEST(max_sharpe, singular_covariance_uses_ridge) {
  Eigen::VectorXd mu(3);
  mu << 0.1, 0.1, 0.12;
  Eigen::MatrixXd sigma(3, 3);
  // First two assets perfectly correlated with equal variance.
  sigma << 0.04, 0.04, 0.0, 0.04, 0.04, 0.0, 0.0, 0.0, 0.05;
  const AssetStats st = make_stats(mu, sigma);
  const SharpeSolution s = max_sharpe_weights(st, all_of(3), AllocatorConfig{});
  EXPECT_NO_THROW(s.weights.validate());
  EXPECT_GE(compute_metrics(s.weights, st, AllocatorConfig{}).sharpe, simplex_scan(st, 0.0, 50000, 5) - 1e-6);
}

// Random PSD instances: KKT certificate and dominance over a simplex scan.
TEST(max_sharpe, random_instances_against_scan) {
  std::mt19937_64 rng(71);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 1 + rng() % 4;
    AssetStats st = annealfolio::testing::random_stats(rng, n);
    if ((st.mu.array() <= 0.0).all()) st.mu(0) = 0.05;
    AllocatorConfig cfg;
    if (trial % 4 == 0) cfg.risk_free_rate = 0.01;
    if ((st.mu.array() <= cfg.risk_free_rate).all()) st.mu(0) = 0.1;
    const SharpeSolution s = max_sharpe_weights(st, all_of(n), cfg);
    ASSERT_LE(s.kkt.worst(), 1e-8);
    ASSERT_LE(kkt_residual(st, cfg.risk_free_rate, s.y_star), 1e-8) << "trial " << trial;
    ASSERT_NO_THROW(s.weights.validate());
    const double got = compute_metrics(s.weights, st, cfg).sharpe;
    ASSERT_GE(got, simplex_scan(st, cfg.risk_free_rate, 40000, static_cast<std::uint64_t>(trial)) - 1e-6);
  }
}

TEST(max_sharpe, argmax_is_scale_invariant) {
  std::mt19937_64 rng(73);
  for (int trial = 0; trial < 10; ++trial) {
    AssetStats st = annealfolio::testing::random_stats(rng, 4);
    st.mu = st.mu.cwiseAbs().array() + 0.01;
    const SharpeSolution a = max_sharpe_weights(st, all_of(4), AllocatorConfig{});
    AssetStats scaled = st;
    scaled.mu *= 3.7;
    const SharpeSolution b = max_sharpe_weights(scaled, all_of(4), AllocatorConfig{});
    for (Eigen::Index i = 0; i < 4; ++i) {
      EXPECT_NEAR(a.weights.weights(i), b.weights.weights(i), 1e-8);
      EXPECT_NEAR(a.y_star(i), 3.7 * b.y_star(i), 1e-7);
    }
  }
}

TEST(mvo_weights, matches_grid_search) {
  std::mt19937_64 rng(79);
  for (int trial = 0; trial < 10; ++trial) {
    const AssetStats st = annealfolio::testing::random_stats(rng, 3);
    AllocatorConfig cfg;
    cfg.risk_aversion_q = annealfolio::testing::uniform(rng, 0.5, 5.0);
    const SharpeSolution s = mvo_weights(st, all_of(3), cfg);
    ASSERT_NO_THROW(s.weights.validate());
    auto f = [&](const Eigen::VectorXd& w) { return cfg.risk_aversion_q * w.dot(st.sigma * w) - st.mu.dot(w); };
    const double got = f(s.weights.weights);
    double best = 1e300;
    const int steps = 400;
    for (int i = 0; i <= steps; ++i) {
      for (int j = 0; i + j <= steps; ++j) {
        Eigen::VectorXd w(3);
        w << double(i) / steps, double(j) / steps, double(steps - i - j) / steps;
        best = std::min(best, f(w));
      }
    }
    EXPECT_LE(got, best + 1e-12);
    EXPECT_LE(s.kkt.worst(), 1e-8);
  }
}

TEST(cardinality, support_and_rounded_sum) {
  AllocatorConfig c;
  Eigen::VectorXd y(3);
  y << 5.0, 2.5, 0.0;
  EXPECT_EQ(derive_cardinality(y, c), 2u);
  c.cardinality_mode = CardinalityMode::rounded_sum;
  Eigen::VectorXd y2(2);
  y2 << 5.0, 2.5;
  EXPECT_EQ(derive_cardinality(y2, c), 2u);
  Eigen::VectorXd small(3);
  small << 0.2, 0.1, 0.0;
  EXPECT_EQ(derive_cardinality(small, c), 1u);
  c.cardinality_mode = CardinalityMode::support;
  Eigen::VectorXd tiny(3);
  tiny << 1e-9, 0.0, 5e-7;
  EXPECT_THROW(derive_cardinality(tiny, c), SolverError);
}

TEST(metrics, single_asset_identities) {
  Eigen::VectorXd mu(1);
  mu << 0.12;
  const AssetStats st = make_stats(mu, Eigen::MatrixXd::Constant(1, 1, 0.04));
  const PortfolioMetrics m = compute_metrics(equal_weights(st.tickers), st, AllocatorConfig{});
  EXPECT_DOUBLE_EQ(m.expected_return, 0.12);
  EXPECT_DOUBLE_EQ(m.risk, 0.2);
  EXPECT_NEAR(m.sharpe, 0.6, 1e-15);
  EXPECT_EQ(m.diversification_ratio, 1.0);
}

TEST(metrics, continuation_of_two_asset_example) {
  const AssetStats st = two_asset_example();
  WeightVector w{st.tickers, Eigen::Vector2d(2.0 / 3.0, 1.0 / 3.0)};
  const PortfolioMetrics m = compute_metrics(w, st, AllocatorConfig{});
  EXPECT_NEAR(m.expected_return, 0.4 / 3.0, 1e-12);
  EXPECT_NEAR(m.risk, std::sqrt(0.08) / 3.0, 1e-12);
  EXPECT_NEAR(m.risk, 0.09428, 1e-5);
  EXPECT_NEAR(m.sharpe, std::sqrt(2.0), 1e-12);
}

TEST(metrics, uncorrelated_equal_vol_dr) {
  Eigen::VectorXd mu(2);
  mu << 0.1, 0.05;
  const AssetStats st = make_stats(mu, Eigen::MatrixXd::Identity(2, 2) * 0.09);
  const PortfolioMetrics m = compute_metrics(equal_weights(st.tickers), st, AllocatorConfig{});
  EXPECT_NEAR(m.diversification_ratio, std::sqrt(2.0), 1e-9);
}

TEST(metrics, zero_risk_sentinel) {
  Eigen::VectorXd mu(1);
  mu << 0.05;
  const AssetStats st = make_stats(mu, Eigen::MatrixXd::Zero(1, 1));
  const PortfolioMetrics m = compute_metrics(equal_weights(st.tickers), st, AllocatorConfig{});
  EXPECT_TRUE(m.zero_risk);
  EXPECT_TRUE(std::isinf(m.sharpe) && m.sharpe > 0);
}

TEST(metrics, identities_on_random_portfolios) {
  std::mt19937_64 rng(83);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng() % 6;
    const AssetStats st = annealfolio::testing::random_stats(rng, n);
    Eigen::VectorXd w = Eigen::VectorXd::NullaryExpr(static_cast<Eigen::Index>(n), [&] { return annealfolio::testing::uniform(rng, 0.0, 1.0); });
    w /= w.sum();
    AllocatorConfig cfg;
    cfg.risk_free_rate = trial % 2 ? 0.0 : 0.02;
    const PortfolioMetrics m = compute_metrics(WeightVector{st.tickers, w}, st, cfg);
    ASSERT_GT(m.risk, 0.0);
    ASSERT_NEAR(m.sharpe, (m.expected_return - cfg.risk_free_rate) / m.risk, 1e-12);
    ASSERT_GE(m.diversification_ratio, 1.0 - 1e-9);
  }
}

TEST(metrics, weights_by_ticker) {
  const AssetStats st = two_asset_example();
  WeightVector w{{"A1"}, Eigen::VectorXd::Ones(1)};
  const PortfolioMetrics m = compute_metrics(w, st, AllocatorConfig{});
  EXPECT_DOUBLE_EQ(m.expected_return, 0.2);
  WeightVector bad{{"ZZZ"}, Eigen::VectorXd::Ones(1)};
  EXPECT_THROW(compute_metrics(bad, st, AllocatorConfig{}), InputError);
}

TEST(weight_vector, validation) {
  WeightVector w{{"A", "B"}, Eigen::Vector2d(0.5, 0.5)};
  EXPECT_NO_THROW(w.validate());
  w.weights << 0.7, 0.4;
  EXPECT_THROW(w.validate(), InputError);
  w.weights << 1.1, -0.1;
  EXPECT_THROW(w.validate(), InputError);
  const std::vector<std::string> t{"A", "B", "C"};
  const WeightVector e = equal_weights(t);
  EXPECT_NEAR(e.weights.sum(), 1.0, 1e-15);
}
