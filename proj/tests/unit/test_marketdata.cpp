#include "annealfolio/error.hpp"
#include "annealfolio/marketdata.hpp"
#include "annealfolio/synthetic.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>
#include <sstream>

using namespace annealfolio;
using namespace std::chrono;

namespace {

PriceMatrix parse(const std::string& csv) {
  std::istringstream in(csv);
  return load_prices(in);
}

std::string error_of(const std::string& csv) {
  try {
    parse(csv);
  } catch (const InputError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(dates, parse_and_format) {
  EXPECT_EQ(parse_date("2023-01-31"), year{2023} / January / day{31});
  EXPECT_EQ(format_date(year{2024} / February / day{29}), "2024-02-29");
  EXPECT_THROW(parse_date("2023-02-30"), InputError);
  EXPECT_THROW(parse_date("2023/01/31"), InputError);
  EXPECT_THROW(parse_date("23-01-31"), InputError);
  EXPECT_THROW(parse_date(""), InputError);
}

TEST(load_prices, intersection_alignment) {
  const PriceMatrix m = parse(
      "date,ticker,close\n"
      "2023-01-02,BBB,20\n"
      "2023-01-02,AAA,10\n"
      "2023-01-03,AAA,11\n"
      "2023-01-03,BBB,21\n"
      "2023-01-04,AAA,12\n"
      "2023-01-05,AAA,13\n"
      "2023-01-05,BBB,23\n");
  ASSERT_EQ(m.values.rows(), 3);
  ASSERT_EQ(m.values.cols(), 2);
  EXPECT_EQ(m.tickers, (std::vector<std::string>{"AAA", "BBB"}));
  EXPECT_EQ(m.dates[2], year{2023} / January / day{5});
  EXPECT_EQ(m.values(2, 1), 23.0);
  EXPECT_EQ(*m.ticker_index("BBB"), 1u);
  EXPECT_FALSE(m.date_index(year{2023} / January / day{4}));
  EXPECT_EQ(*m.first_on_or_after(year{2023} / January / day{4}), 2u);
  EXPECT_FALSE(m.first_on_or_after(year{2023} / January / day{6}));
}

TEST(load_prices, rejects_non_positive_close_with_line_number) {
  const std::string msg = error_of("date,ticker,close\n2023-01-02,AAA,10\n2023-01-03,AAA,-5\n");
  EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
  EXPECT_FALSE(error_of("date,ticker,close\n2023-01-02,AAA,0\n").empty());
}

TEST(load_prices, sorts_dates) {
  const PriceMatrix m = parse("date,ticker,close\n2023-01-05,AAA,3\n2023-01-02,AAA,1\n2023-01-03,AAA,2\n");
  ASSERT_EQ(m.dates.size(), 3u);
  EXPECT_TRUE(m.dates[0] < m.dates[1] && m.dates[1] < m.dates[2]);
  EXPECT_EQ(m.values(0, 0), 1.0);
  EXPECT_EQ(m.values(2, 0), 3.0);
}

TEST(load_prices, malformed_input) {
  EXPECT_FALSE(error_of("").empty());
  EXPECT_FALSE(error_of("day,ticker,close\n2023-01-02,AAA,1\n").empty());
  EXPECT_NE(error_of("date,ticker,close\n2023-01-02,AAA\n").find("line 2"), std::string::npos);
  EXPECT_NE(error_of("date,ticker,close\n2023-01-02,AAA,abc\n").find("line 2"), std::string::npos);
  EXPECT_NE(error_of("date,ticker,close\n2023-01-02,AAA,1\n2023-01-02,AAA,2\n").find("line 3"), std::string::npos);
  // No date shared by both tickers.
  EXPECT_FALSE(error_of("date,ticker,close\n2023-01-02,AAA,1\n2023-01-03,BBB,2\n").empty());
  EXPECT_THROW(load_prices(std::filesystem::path("/nonexistent/prices.csv")), InputError);
}

TEST(load_prices, crlf_and_bit_exact_values) {
  const PriceMatrix m = parse("date,ticker,close\r\n2023-01-02,AAA,101.37\r\n2023-01-03,AAA,0.1\r\n");
  EXPECT_EQ(m.values(0, 0), 101.37);
  EXPECT_EQ(m.values(1, 0), 0.1);
}

TEST(load_sectors, reads_and_validates) {
  std::istringstream ok("ticker,sector\nAAA,Energy\nBBB,Information Technology\n");
  const SectorMap s = load_sectors(ok);
  EXPECT_EQ(s.at("BBB"), "Information Technology");
  std::istringstream dup("ticker,sector\nAAA,Energy\nAAA,Financials\n");
  EXPECT_THROW(load_sectors(dup), InputError);
  std::istringstream bad("symbol,sector\nAAA,Energy\n");
  EXPECT_THROW(load_sectors(bad), InputError);
}

TEST(returns, simple_and_log) {
  const PriceMatrix m = parse("date,ticker,close\n2023-01-02,AAA,100\n2023-01-03,AAA,110\n2023-01-04,AAA,99\n");
  const ReturnsMatrix simple = compute_returns(m);
  ASSERT_EQ(simple.values.rows(), 2);
  EXPECT_NEAR(simple.values(0, 0), 0.10, 1e-15);
  EXPECT_EQ(simple.dates[0], m.dates[1]);
  const ReturnsMatrix lg = compute_returns(m, ReturnMethod::log);
  EXPECT_NEAR(lg.values(0, 0), std::log(1.1), 1e-15);
  EXPECT_NEAR(lg.values(1, 0), std::log(0.9), 1e-15);
}

TEST(returns, constant_prices_and_short_input) {
  const PriceMatrix m = parse("date,ticker,close\n2023-01-02,AAA,5\n2023-01-03,AAA,5\n2023-01-04,AAA,5\n");
  EXPECT_TRUE(compute_returns(m).values.isZero(0.0));
  EXPECT_THROW(compute_returns(parse("date,ticker,close\n2023-01-02,AAA,5\n")), InputError);
}

TEST(returns, cumulative_product_reconstructs_price_ratio) {
  const PriceMatrix p = generate_prices(default_synthetic_spec());
  const ReturnsMatrix r = compute_returns(p);
  for (Eigen::Index c = 0; c < p.values.cols(); ++c) {
    double growth = 1.0;
    for (Eigen::Index t = 0; t < r.values.rows(); ++t) growth *= 1.0 + r.values(t, c);
    const double ratio = p.values(p.values.rows() - 1, c) / p.values(0, c);
    EXPECT_NEAR(growth / ratio, 1.0, 1e-9);
  }
}

TEST(returns, window_and_columns) {
  const PriceMatrix p = generate_prices(default_synthetic_spec());
  const ReturnsMatrix r = compute_returns(p);
  const ReturnsMatrix w = r.window(20, 5);
  ASSERT_EQ(w.values.rows(), 5);
  EXPECT_EQ(w.dates.front(), r.dates[16]);
  EXPECT_EQ(w.values(4, 3), r.values(20, 3));
  EXPECT_THROW(r.window(3, 5), InputError);
  const std::vector<std::string> names{"TECA", "COMA"};
  const ReturnsMatrix c = r.columns(names);
  EXPECT_EQ(c.tickers, names);
  EXPECT_EQ(c.values(7, 1), r.values(7, 0));
  const std::vector<std::string> missing{"NOPE"};
  EXPECT_THROW(r.columns(missing), InputError);
}

TEST(stats, constant_series) {
  ReturnsMatrix r;
  r.tickers = {"A"};
  r.dates = {year{2023} / 1 / 2, year{2023} / 1 / 3};
  r.values = Eigen::MatrixXd::Constant(2, 1, 0.1);
  const AssetStats s = estimate_stats(r, 1.0);
  EXPECT_DOUBLE_EQ(s.mu(0), 0.1);
  EXPECT_DOUBLE_EQ(s.sigma(0, 0), 0.0);
}

TEST(stats, hand_computed_covariance) {
  ReturnsMatrix r;
  r.tickers = {"A", "B"};
  r.dates = {year{2023} / 1 / 2, year{2023} / 1 / 3};
  r.values.resize(2, 2);
  r.values << 0.1, -0.1, -0.1, 0.1;
  const AssetStats s = estimate_stats(r, 1.0);
  EXPECT_NEAR(s.sigma(0, 1), -0.02, 1e-15);
  EXPECT_NEAR(s.sigma(0, 0), 0.02, 1e-15);
  EXPECT_NEAR(s.sigma(1, 1), 0.02, 1e-15);
  EXPECT_THROW(estimate_stats(r.window(0, 1), 1.0), InputError);
}

// Single column against a direct two-pass mean/variance.
TEST(stats, textbook_scalar_estimates) {
  std::mt19937_64 rng(97);
  std::normal_distribution<double> g(0.001, 0.02);
  ReturnsMatrix r;
  r.tickers = {"A"};
  const int rows = 250;
  r.values.resize(rows, 1);
  for (int t = 0; t < rows; ++t) {
    r.values(t, 0) = g(rng);
    r.dates.push_back(sys_days{year{2023} / 1 / 1} + days{t});
  }
  double mean = 0.0;
  for (int t = 0; t < rows; ++t) mean += r.values(t, 0);
  mean /= rows;
  double var = 0.0;
  for (int t = 0; t < rows; ++t) var += (r.values(t, 0) - mean) * (r.values(t, 0) - mean);
  var /= rows - 1;
  const AssetStats s = estimate_stats(r, 252.0);
  EXPECT_NEAR(s.mu(0), 252.0 * mean, 1e-13);
  EXPECT_NEAR(s.sigma(0, 0), 252.0 * var, 1e-13);
}

TEST(stats, symmetric_and_psd_on_synthetic_data) {
  const PriceMatrix p = generate_prices(default_synthetic_spec());
  for (auto method : {ReturnMethod::simple, ReturnMethod::log}) {
    const AssetStats s = estimate_stats(compute_returns(p, method), 252.0);
    EXPECT_TRUE(s.sigma == s.sigma.transpose());
    EXPECT_TRUE(is_psd(s.sigma));
    EXPECT_EQ(s.size(), p.tickers.size());
  }
  Eigen::Matrix2d bad;
  bad << 1.0, 2.0, 2.0, 1.0;
  EXPECT_FALSE(is_psd(bad));
}

TEST(stats, subset_and_lookup) {
  const PriceMatrix p = generate_prices(default_synthetic_spec());
  const AssetStats s = estimate_stats(compute_returns(p), 252.0);
  const std::vector<std::size_t> idx{2, 5};
  const AssetStats sub = s.subset(idx);
  EXPECT_EQ(sub.tickers, (std::vector<std::string>{s.tickers[2], s.tickers[5]}));
  EXPECT_EQ(sub.sigma(0, 1), s.sigma(2, 5));
  EXPECT_EQ(*s.index_of("INDA"), 5u);
  EXPECT_FALSE(s.index_of("ZZZ"));
  EXPECT_EQ(default_annualization(Period::daily), 252.0);
  EXPECT_EQ(default_annualization(Period::monthly), 12.0);
}

TEST(synthetic, shape_and_determinism) {
  const SyntheticSpec spec = default_synthetic_spec();
  const PriceMatrix a = generate_prices(spec);
  const PriceMatrix b = generate_prices(spec);
  EXPECT_EQ(a.values, b.values);
  EXPECT_EQ(a.tickers.size(), 10u);
  std::set<std::string> sectors;
  for (const auto& s : spec.assets) sectors.insert(s.sector);
  EXPECT_EQ(sectors.size(), 6u);
  EXPECT_EQ(a.dates.front(), year{2022} / October / day{5});
  EXPECT_EQ(a.dates[63], year{2023} / January / day{2});
  EXPECT_EQ(a.dates.back(), year{2024} / January / day{31});
  EXPECT_TRUE((a.values.array() > 0.0).all());
  EXPECT_NE(generate_prices(default_synthetic_spec(1)).values, a.values);
}

TEST(synthetic, bundled_csv_matches_generator) {
  const PriceMatrix bundled = load_prices(std::filesystem::path(ANNEALFOLIO_DATA_DIR) / "synthetic_prices.csv");
  const PriceMatrix fresh = generate_prices(default_synthetic_spec());
  ASSERT_EQ(bundled.dates, fresh.dates);
  ASSERT_EQ(bundled.tickers, fresh.tickers);
  EXPECT_LE((bundled.values - fresh.values).cwiseAbs().maxCoeff(), 1e-9);
  const SectorMap sectors = load_sectors(std::filesystem::path(ANNEALFOLIO_DATA_DIR) / "synthetic_sectors.csv");
  for (const auto& t : bundled.tickers) EXPECT_TRUE(sectors.count(t)) << t;
}
