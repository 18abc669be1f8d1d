#pragma once

#include "annealfolio/serialize.hpp"

#include <string>

namespace annealfolio {

/// Aligned text table: per-ticker weight % for algorithm and benchmark, then
/// Returns, Risk, Sharpe Ratio and Diversification Ratio rows, 2 decimals.
///
/// Accepts a pipeline result (with optional "benchmark" block), a comparison
/// document {"algorithm": metrics, "benchmark": metrics}, or a backtest report.
/// Throws InputError on malformed input.
std::string render_report(const Json& doc);

}  // namespace annealfolio
