#include "annealfolio/marketdata.hpp"

#include "annealfolio/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>

namespace annealfolio {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    fields.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

std::string line_error(std::size_t line_no, const std::string& what) {
  return "line " + std::to_string(line_no) + ": " + what;
}

template <typename Int>
bool parse_int(std::string_view s, Int& out) {
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc{} && res.ptr == s.data() + s.size();
}

}  // namespace

Date parse_date(std::string_view text) {
  text = trim(text);
  int y = 0;
  unsigned m = 0;
  unsigned d = 0;
  if (text.size() != 10 || text[4] != '-' || text[7] != '-' || !parse_int(text.substr(0, 4), y) ||
      !parse_int(text.substr(5, 2), m) || !parse_int(text.substr(8, 2), d)) {
    throw InputError("bad date '" + std::string(text) + "', expected YYYY-MM-DD");
  }
  const Date date{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
  if (!date.ok()) throw InputError("invalid calendar date '" + std::string(text) + "'");
  return date;
}

std::string format_date(const Date& d) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(d.year()), static_cast<unsigned>(d.month()),
                static_cast<unsigned>(d.day()));
  return buf;
}

std::optional<std::size_t> PriceMatrix::ticker_index(std::string_view ticker) const {
  const auto it = std::lower_bound(tickers.begin(), tickers.end(), ticker);
  if (it == tickers.end() || *it != ticker) return std::nullopt;
  return static_cast<std::size_t>(it - tickers.begin());
}

std::optional<std::size_t> PriceMatrix::date_index(const Date& d) const {
  const auto it = std::lower_bound(dates.begin(), dates.end(), d);
  if (it == dates.end() || *it != d) return std::nullopt;
  return static_cast<std::size_t>(it - dates.begin());
}

std::optional<std::size_t> PriceMatrix::first_on_or_after(const Date& d) const {
  const auto it = std::lower_bound(dates.begin(), dates.end(), d);
  if (it == dates.end()) return std::nullopt;
  return static_cast<std::size_t>(it - dates.begin());
}

std::map<std::string, double> PriceMatrix::row_prices(std::size_t row) const {
  std::map<std::string, double> out;
  for (std::size_t j = 0; j < tickers.size(); ++j) out.emplace(tickers[j], values(row, j));
  return out;
}

PriceMatrix PriceMatrix::prefix(std::size_t end_row) const {
  PriceMatrix out;
  out.dates.assign(dates.begin(), dates.begin() + static_cast<std::ptrdiff_t>(end_row + 1));
  out.tickers = tickers;
  out.values = values.topRows(static_cast<Eigen::Index>(end_row + 1));
  return out;
}

ReturnsMatrix ReturnsMatrix::window(std::size_t end_row, std::size_t count) const {
  if (end_row >= dates.size() || count > end_row + 1) {
    throw InputError("return window of " + std::to_string(count) + " rows ending at row " + std::to_string(end_row) +
                     " exceeds available history");
  }
  const std::size_t first = end_row + 1 - count;
  ReturnsMatrix out;
  out.dates.assign(dates.begin() + static_cast<std::ptrdiff_t>(first),
                   dates.begin() + static_cast<std::ptrdiff_t>(end_row + 1));
  out.tickers = tickers;
  out.values = values.middleRows(static_cast<Eigen::Index>(first), static_cast<Eigen::Index>(count));
  return out;
}

ReturnsMatrix ReturnsMatrix::columns(std::span<const std::string> names) const {
  ReturnsMatrix out;
  out.dates = dates;
  out.tickers.assign(names.begin(), names.end());
  out.values.resize(values.rows(), static_cast<Eigen::Index>(names.size()));
  for (std::size_t k = 0; k < names.size(); ++k) {
    const auto it = std::find(tickers.begin(), tickers.end(), names[k]);
    if (it == tickers.end()) throw InputError("unknown ticker '" + names[k] + "'");
    out.values.col(static_cast<Eigen::Index>(k)) = values.col(it - tickers.begin());
  }
  return out;
}

double default_annualization(Period period) { return period == Period::daily ? 252.0 : 12.0; }

AssetStats AssetStats::subset(std::span<const std::size_t> indices) const {
  AssetStats out;
  out.period = period;
  out.annualization_factor = annualization_factor;
  const auto k = static_cast<Eigen::Index>(indices.size());
  out.mu.resize(k);
  out.sigma.resize(k, k);
  for (Eigen::Index a = 0; a < k; ++a) {
    const auto i = static_cast<Eigen::Index>(indices[static_cast<std::size_t>(a)]);
    if (static_cast<std::size_t>(i) >= size()) throw InputError("asset index out of range");
    out.tickers.push_back(tickers[static_cast<std::size_t>(i)]);
    out.mu(a) = mu(i);
    for (Eigen::Index b = 0; b < k; ++b) {
      out.sigma(a, b) = sigma(i, static_cast<Eigen::Index>(indices[static_cast<std::size_t>(b)]));
    }
  }
  return out;
}

std::optional<std::size_t> AssetStats::index_of(std::string_view ticker) const {
  const auto it = std::find(tickers.begin(), tickers.end(), ticker);
  if (it == tickers.end()) return std::nullopt;
  return static_cast<std::size_t>(it - tickers.begin());
}

PriceMatrix load_prices(std::istream& in) {
  std::map<Date, std::map<std::string, double>> by_date;
  std::set<std::string> all_tickers;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;

  while (std::getline(in, line)) {
    ++line_no;
    const auto content = trim(line);
    if (content.empty()) continue;
    const auto fields = split_csv(content);
    if (!header_seen) {
      if (fields.size() != 3 || fields[0] != "date" || fields[1] != "ticker" || fields[2] != "close") {
        throw InputError(line_error(line_no, "expected header 'date,ticker,close'"));
      }
      header_seen = true;
      continue;
    }
    if (fields.size() != 3) throw InputError(line_error(line_no, "expected 3 fields"));
    Date date;
    try {
      date = parse_date(fields[0]);
    } catch (const InputError& e) {
      throw InputError(line_error(line_no, e.what()));
    }
    const std::string ticker(fields[1]);
    if (ticker.empty()) throw InputError(line_error(line_no, "empty ticker"));
    double close = 0.0;
    const auto res = std::from_chars(fields[2].data(), fields[2].data() + fields[2].size(), close);
    if (res.ec != std::errc{} || res.ptr != fields[2].data() + fields[2].size() || !std::isfinite(close)) {
      throw InputError(line_error(line_no, "bad close '" + std::string(fields[2]) + "'"));
    }
    if (close <= 0.0) throw InputError(line_error(line_no, "non-positive close " + std::string(fields[2])));
    if (!by_date[date].emplace(ticker, close).second) {
      throw InputError(line_error(line_no, "duplicate row for " + format_date(date) + "," + ticker));
    }
    all_tickers.insert(ticker);
  }
  if (!header_seen) throw InputError("empty price file");

  PriceMatrix out;
  out.tickers.assign(all_tickers.begin(), all_tickers.end());
  for (const auto& [date, row] : by_date) {
    if (row.size() == all_tickers.size()) out.dates.push_back(date);
  }
  if (out.dates.empty()) throw InputError("no date has a close for every ticker");

  out.values.resize(static_cast<Eigen::Index>(out.dates.size()), static_cast<Eigen::Index>(out.tickers.size()));
  for (std::size_t r = 0; r < out.dates.size(); ++r) {
    const auto& row = by_date.at(out.dates[r]);
    std::size_t c = 0;
    for (const auto& [ticker, close] : row) {
      out.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c++)) = close;
    }
  }
  return out;
}

PriceMatrix load_prices(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open price file '" + path.string() + "'");
  try {
    return load_prices(in);
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

SectorMap load_sectors(std::istream& in) {
  SectorMap out;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    const auto content = trim(line);
    if (content.empty()) continue;
    const auto fields = split_csv(content);
    if (!header_seen) {
      if (fields.size() != 2 || fields[0] != "ticker" || fields[1] != "sector") {
        throw InputError(line_error(line_no, "expected header 'ticker,sector'"));
      }
      header_seen = true;
      continue;
    }
    if (fields.size() != 2 || fields[0].empty() || fields[1].empty()) {
      throw InputError(line_error(line_no, "expected 'ticker,sector'"));
    }
    if (!out.emplace(std::string(fields[0]), std::string(fields[1])).second) {
      throw InputError(line_error(line_no, "ticker '" + std::string(fields[0]) + "' has two sectors"));
    }
  }
  if (!header_seen) throw InputError("empty sector file");
  return out;
}

SectorMap load_sectors(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open sector file '" + path.string() + "'");
  try {
    return load_sectors(in);
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

ReturnsMatrix compute_returns(const PriceMatrix& prices, ReturnMethod method) {
  const auto rows = prices.values.rows();
  if (rows < 2) throw InputError("returns need at least 2 dates");
  ReturnsMatrix out;
  out.dates.assign(prices.dates.begin() + 1, prices.dates.end());
  out.tickers = prices.tickers;
  const auto ratio = prices.values.bottomRows(rows - 1).array() / prices.values.topRows(rows - 1).array();
  if (method == ReturnMethod::simple) {
    out.values = (ratio - 1.0).matrix();
  } else {
    out.values = ratio.log().matrix();
  }
  return out;
}

AssetStats estimate_stats(const ReturnsMatrix& returns, double annualization_factor, Period period) {
  const auto t = returns.values.rows();
  if (t < 2) throw InputError("covariance needs at least 2 return rows");
  if (!(annualization_factor > 0.0)) throw InputError("annualization factor must be positive");

  AssetStats out;
  out.tickers = returns.tickers;
  out.period = period;
  out.annualization_factor = annualization_factor;
  const Eigen::RowVectorXd mean = returns.values.colwise().mean();
  const Eigen::MatrixXd centered = returns.values.rowwise() - mean;
  Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(t - 1);
  cov = 0.5 * (cov + cov.transpose()).eval();
  out.mu = mean.transpose() * annualization_factor;
  out.sigma = cov * annualization_factor;
  return out;
}

bool is_psd(const Eigen::MatrixXd& sigma, double rel_tol) {
  if (sigma.size() == 0) return true;
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma, Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  const double largest = std::max(ev.maxCoeff(), 0.0);
  return ev.minCoeff() >= -rel_tol * largest;
}

}  // namespace annealfolio
