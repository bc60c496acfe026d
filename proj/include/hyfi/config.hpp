#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "hyfi/evaluation.hpp"
#include "hyfi/training.hpp"

namespace hyfi {

inline constexpr const char* kCodeVersion = "hyfi 0.1.0";

// Fully resolved configuration: every default materialized, so a manifest
// alone reproduces the run.
nlohmann::json config_to_json(const TrainConfig& cfg);
nlohmann::json split_spec_to_json(const SplitSpec& spec);

// Applies only the keys present in `patch`; unknown keys are an error.
void apply_config_json(TrainConfig& cfg, const nlohmann::json& patch);
void apply_split_json(SplitSpec& spec, const nlohmann::json& patch);

nlohmann::json load_config_file(const std::filesystem::path& file);

// Short stable hash of a resolved-config JSON, for report provenance.
std::string config_fingerprint(const nlohmann::json& resolved);

nlohmann::json make_run_manifest(const nlohmann::json& resolved_config,
                                 const std::filesystem::path& data_dir,
                                 std::uint64_t master_seed);
void write_json(const nlohmann::json& j, const std::filesystem::path& file);

}  // namespace hyfi
