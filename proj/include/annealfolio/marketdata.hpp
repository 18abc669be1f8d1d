#pragma once

#include <Eigen/Dense>

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace annealfolio {

using Date = std::chrono::year_month_day;

/// Parses `YYYY-MM-DD`. Throws InputError on anything else.
Date parse_date(std::string_view text);
std::string format_date(const Date& d);

struct PricePoint {
  Date date;
  std::string ticker;
  double close = 0.0;
};

/// Date-aligned closes. Rows are dates (strictly increasing), columns are
/// tickers (lexicographic). Every cell is populated.
struct PriceMatrix {
  std::vector<Date> dates;
  std::vector<std::string> tickers;
  Eigen::MatrixXd values;

  std::optional<std::size_t> ticker_index(std::string_view ticker) const;
  std::optional<std::size_t> date_index(const Date& d) const;
  /// First row whose date is on or after `d`.
  std::optional<std::size_t> first_on_or_after(const Date& d) const;
  /// ticker -> close on row `row`.
  std::map<std::string, double> row_prices(std::size_t row) const;
  /// Rows [0, end_row] only.
  PriceMatrix prefix(std::size_t end_row) const;
};

/// Row t holds the return from dates[t-1] of the source prices to dates[t].
struct ReturnsMatrix {
  std::vector<Date> dates;
  std::vector<std::string> tickers;
  Eigen::MatrixXd values;

  /// The `count` rows ending at (and including) `end_row`.
  ReturnsMatrix window(std::size_t end_row, std::size_t count) const;
  /// Keeps only the named columns, in the given order.
  ReturnsMatrix columns(std::span<const std::string> names) const;
};

enum class ReturnMethod { simple, log };
enum class Period { daily, monthly };

double default_annualization(Period period);

struct AssetStats {
  std::vector<std::string> tickers;
  Eigen::VectorXd mu;
  Eigen::MatrixXd sigma;
  Period period = Period::daily;
  double annualization_factor = 252.0;

  std::size_t size() const { return static_cast<std::size_t>(mu.size()); }
  AssetStats subset(std::span<const std::size_t> indices) const;
  std::optional<std::size_t> index_of(std::string_view ticker) const;
};

using SectorMap = std::map<std::string, std::string>;

/// Reads `date,ticker,close` CSV and aligns on the intersection of dates.
PriceMatrix load_prices(std::istream& in);
PriceMatrix load_prices(const std::filesystem::path& path);

/// Reads `ticker,sector` CSV.
SectorMap load_sectors(std::istream& in);
SectorMap load_sectors(const std::filesystem::path& path);

ReturnsMatrix compute_returns(const PriceMatrix& prices, ReturnMethod method = ReturnMethod::simple);

/// Column means and sample covariance (divisor T-1), both scaled by
/// `annualization_factor`. Sigma is symmetrized.
AssetStats estimate_stats(const ReturnsMatrix& returns, double annualization_factor,
                          Period period = Period::daily);

/// Smallest eigenvalue >= -rel_tol * largest eigenvalue.
bool is_psd(const Eigen::MatrixXd& sigma, double rel_tol = 1e-10);

}  // namespace annealfolio
