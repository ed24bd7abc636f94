#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "selfi/optim.hpp"
#include "selfi/synthdata.hpp"

namespace selfi {

/// Benchmark generator settings plus per-split sample counts.
struct BenchmarkConfig {
    BenchmarkSpec spec;
    std::size_t n_real_train = 512, n_fake_train = 512;
    std::size_t n_real_val = 128, n_fake_val = 128;
    std::size_t n_real_test = 256, n_fake_test = 256;
};

/// One run configuration: what to generate, what to train, how often to
/// replicate. Mirrors the JSON document accepted by --config.
struct RunConfig {
    BenchmarkConfig benchmark;
    TrainConfig train;       // embeds the ModelConfig
    std::size_t n_seeds = 5; // grid/ablate replications
};

RunConfig default_run_config(std::uint64_t seed = 0);

/// Strict parser: unknown keys anywhere are ConfigErrors.
RunConfig parse_run_config(const nlohmann::json& j);
RunConfig load_run_config(const std::filesystem::path& path);

nlohmann::json run_config_to_json(const RunConfig& cfg);

/// FNV-1a over the canonical JSON dump; ties reports to exact settings.
std::string config_hash(const RunConfig& cfg);

}  // namespace selfi
