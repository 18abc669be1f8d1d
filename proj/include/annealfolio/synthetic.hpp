#pragma once

#include "annealfolio/marketdata.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace annealfolio {

struct SyntheticAsset {
  std::string ticker;
  std::string sector;
  double start_price = 100.0;
  double annual_drift = 0.1;
  double annual_vol = 0.2;
  /// Loading on the shared market factor, in [0, 1).
  double market_beta = 0.5;
  /// Optional one-off drawdown: fraction lost spread over crash_days starting at crash_day.
  double crash_fraction = 0.0;
  std::size_t crash_day = 0;
  std::size_t crash_days = 0;
};

struct SyntheticSpec {
  Date first_date{};
  Date last_date{};
  std::uint64_t seed = 0;
  std::vector<SyntheticAsset> assets;
};

/// Ten tickers in six sectors over business days 2022-10-05 .. 2024-01-31:
/// 63 days of warm-up history, then 13 months starting 2023-01-02.
SyntheticSpec default_synthetic_spec(std::uint64_t seed = 20230102);

/// Seeded geometric random walk with one market factor. Business days only.
/// Uses std::mt19937_64 plus Box-Muller so output is identical on every platform.
PriceMatrix generate_prices(const SyntheticSpec& spec);

void write_prices_csv(std::ostream& out, const PriceMatrix& prices);
void write_sectors_csv(std::ostream& out, const SyntheticSpec& spec);

}  // namespace annealfolio
