#pragma once

#include "annealfolio/pipeline.hpp"
#include "annealfolio/rebalance.hpp"
#include "annealfolio/serialize.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace annealfolio {

/// Everything one CLI run needs, loaded from a JSON document and flag overrides.
struct RunConfig {
  std::filesystem::path prices;
  std::optional<std::filesystem::path> sectors;
  std::filesystem::path out_dir = "out";
  std::optional<std::uint64_t> seed;
  PipelineConfig pipeline;
  RebalancePolicy rebalance;
  Json benchmark;  ///< "equal", {"ticker": ...}, {"weights": {...}} or {"weights_file": path}
};

/// Applies `key.path=value` to a config document. Values parse as JSON when
/// they can, otherwise as strings. Throws InputError on bad paths.
void apply_override(Json& doc, const std::string& assignment);

/// Builds a RunConfig from a merged document. Relative paths resolve
/// against `base_dir`. Throws InputError on missing fields or bad values.
RunConfig parse_run_config(const Json& doc, const std::filesystem::path& base_dir);

/// Default configuration document (also written to configs/default.json).
Json default_config_json();

BenchmarkSpec resolve_benchmark(const Json& spec, const std::vector<std::string>& universe,
                                const std::filesystem::path& base_dir);

}  // namespace annealfolio
