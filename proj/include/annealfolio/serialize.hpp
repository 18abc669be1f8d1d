#pragma once

// JSON forms of the library types. Objects use sorted keys, so dumps are
// byte-stable for identical inputs.

#include "annealfolio/allocator.hpp"
#include "annealfolio/model.hpp"
#include "annealfolio/pipeline.hpp"
#include "annealfolio/rebalance.hpp"
#include "annealfolio/sampler.hpp"

#include <json.hpp>

#include <iosfwd>
#include <string>

namespace annealfolio {

using Json = nlohmann::json;

std::string bits_to_string(std::span<const std::uint8_t> x);
Bits bits_from_string(std::string_view s);

Json to_json(const QuboModel& m);
QuboModel qubo_from_json(const Json& j);
Json to_json(const ConstrainedModel& cm);

/// {"samples": [{"state", "energy", "count"}...], "seed": ...}
Json to_json(const SampleSet& s);

/// {"return_pct", "risk_pct", "sharpe", "diversification_ratio", "weights": {ticker: pct}}
Json metrics_json(const PortfolioMetrics& m, const WeightVector& w);

Json to_json(const Holdings& h);
Json to_json(const PipelineResult& r);
Json to_json(const RebalanceEvent& e);
Json to_json(const HealthReport& h);

Json to_json(const AnnealSchedule& s);
Json to_json(const AllocatorConfig& c);
Json to_json(const RebalancePolicy& p);
/// {"pipeline": ..., "allocator": ..., "seed": ..., "rebalance": ... (when given)}
Json config_echo(const PipelineConfig& cfg, const RebalancePolicy* policy = nullptr);

Json to_json(const BacktestReport& r, const PipelineConfig& cfg, const RebalancePolicy& policy);

/// `date,algo_value,bench_value` rows.
void write_plot_csv(std::ostream& out, const BacktestReport& r);

std::string to_string(Strategy s);
std::string to_string(CardinalityMode m);
std::string to_string(AllocatorMode m);
std::string to_string(ReturnMethod m);
std::string to_string(Period p);
std::string to_string(Interpolation i);

}  // namespace annealfolio
