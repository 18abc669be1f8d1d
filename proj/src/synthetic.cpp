#include "annealfolio/synthetic.hpp"

#include "annealfolio/error.hpp"
#include "annealfolio/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <random>

namespace annealfolio {

SyntheticSpec default_synthetic_spec(std::uint64_t seed) {
  using namespace std::chrono;
  SyntheticSpec s;
  // 63 business days of warm-up history before 2023-01-02, then 13 months.
  s.first_date = year{2022} / October / day{5};
  s.last_date = year{2024} / January / day{31};
  s.seed = seed;
  s.assets = {
      {"COMA", "Communication Services", 780.0, 0.32, 0.21, 0.45},
      {"ENGA", "Energy", 2450.0, 0.26, 0.23, 0.55},
      {"FINA", "Financials", 1620.0, -0.04, 0.21, 0.60},
      {"FINB", "Financials", 880.0, 0.22, 0.23, 0.60},
      {"FINC", "Financials", 540.0, 0.30, 0.29, 0.65},
      {"INDA", "Industrials", 2050.0, 0.38, 0.24, 0.50},
      {"STPA", "Consumer Staples", 2580.0, 0.02, 0.18, 0.35, 0.18, 150, 8},
      {"STPB", "Consumer Staples", 330.0, 0.18, 0.17, 0.35},
      {"TECA", "Information Technology", 3250.0, 0.16, 0.22, 0.45},
      {"TECB", "Information Technology", 1480.0, 0.08, 0.25, 0.45},
  };
  return s;
}

namespace {

std::vector<Date> business_days(const Date& first, const Date& last) {
  using namespace std::chrono;
  std::vector<Date> out;
  for (sys_days d{first}; d <= sys_days{last}; d += days{1}) {
    const weekday wd{d};
    if (wd != Saturday && wd != Sunday) out.emplace_back(d);
  }
  return out;
}

class NormalSource {
 public:
  explicit NormalSource(std::uint64_t seed) : rng_(seed) {}

  // Box-Muller on raw 64-bit draws; std::normal_distribution is not specified bit-exactly.
  double next() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = unit_interval(rng_());
    while (u1 <= 0.0) u1 = unit_interval(rng_());
    const double u2 = unit_interval(rng_());
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

 private:
  std::mt19937_64 rng_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace

PriceMatrix generate_prices(const SyntheticSpec& spec) {
  if (spec.assets.empty()) throw InputError("synthetic spec has no assets");
  std::vector<SyntheticAsset> assets = spec.assets;
  std::sort(assets.begin(), assets.end(), [](const auto& a, const auto& b) { return a.ticker < b.ticker; });

  PriceMatrix out;
  out.dates = business_days(spec.first_date, spec.last_date);
  if (out.dates.size() < 2) throw InputError("synthetic date range too short");
  for (const auto& a : assets) out.tickers.push_back(a.ticker);

  const auto rows = static_cast<Eigen::Index>(out.dates.size());
  const auto cols = static_cast<Eigen::Index>(assets.size());
  out.values.resize(rows, cols);
  NormalSource normal(spec.seed);
  const double dt = 1.0 / 252.0;
  std::vector<double> log_price(assets.size());
  for (std::size_t j = 0; j < assets.size(); ++j) {
    log_price[j] = std::log(assets[j].start_price);
    out.values(0, static_cast<Eigen::Index>(j)) = std::round(assets[j].start_price * 100.0) / 100.0;
  }
  for (Eigen::Index t = 1; t < rows; ++t) {
    const double market = normal.next();
    for (std::size_t j = 0; j < assets.size(); ++j) {
      const auto& a = assets[j];
      const double shock = a.market_beta * market + std::sqrt(1.0 - a.market_beta * a.market_beta) * normal.next();
      double step = (a.annual_drift - 0.5 * a.annual_vol * a.annual_vol) * dt + a.annual_vol * std::sqrt(dt) * shock;
      const auto day = static_cast<std::size_t>(t);
      if (a.crash_days > 0 && day >= a.crash_day && day < a.crash_day + a.crash_days) {
        step += std::log(1.0 - a.crash_fraction) / static_cast<double>(a.crash_days);
      }
      log_price[j] += step;
      out.values(t, static_cast<Eigen::Index>(j)) = std::max(0.01, std::round(std::exp(log_price[j]) * 100.0) / 100.0);
    }
  }
  return out;
}

void write_prices_csv(std::ostream& out, const PriceMatrix& prices) {
  out << "date,ticker,close\n";
  char buf[32];
  for (std::size_t r = 0; r < prices.dates.size(); ++r) {
    const std::string d = format_date(prices.dates[r]);
    for (std::size_t c = 0; c < prices.tickers.size(); ++c) {
      std::snprintf(buf, sizeof(buf), "%.2f", prices.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)));
      out << d << ',' << prices.tickers[c] << ',' << buf << '\n';
    }
  }
}

void write_sectors_csv(std::ostream& out, const SyntheticSpec& spec) {
  std::vector<SyntheticAsset> assets = spec.assets;
  std::sort(assets.begin(), assets.end(), [](const auto& a, const auto& b) { return a.ticker < b.ticker; });
  out << "ticker,sector\n";
  for (const auto& a : assets) out << a.ticker << ',' << a.sector << '\n';
}

}  // namespace annealfolio
