// Copyright 2026 The projcomp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "projcomp/gpt.hpp"
#include "projcomp/projection.hpp"
#include "projcomp/trainer.hpp"

namespace projcomp {

using Json = nlohmann::ordered_json;

// Structured-text forms. Every from_json rejects unknown and missing keys
// with ConfigError.
Json to_json(const ModelConfig& config);
ModelConfig model_config_from_json(const Json& j);

Json to_json(const TrainConfig& config);
TrainConfig train_config_from_json(const Json& j);

Json to_json(const KeptIndexSet& kept);
KeptIndexSet kept_from_json(const Json& j);

/// The plan manifest.
Json to_json(const CompressionPlan& plan);
CompressionPlan plan_from_json(const Json& j);

Json to_json(const TrainReport& report);
Json to_json(const ComparisonReport& report);

enum class CompressionMethod { pc, hpr };
std::string to_string(CompressionMethod method);
CompressionMethod parse_compression_method(const std::string& text);

/// Accepts a fraction in [0, 1) or one of the preset names "35", "50", "65"
/// (also "35%" etc.).
double parse_compression_level(const std::string& text);

/// Everything needed to re-run one CLI invocation.
struct ExperimentConfig {
    std::string command;  // pretrain | compress | train | eval | compare | flops
    ModelConfig model;
    std::uint64_t init_seed = 0;
    TrainConfig train;
    CompressionMethod method = CompressionMethod::pc;
    double compression_level = 0.5;
    ImportanceMethod importance = ImportanceMethod::magnitude;
    std::uint64_t importance_seed = 0;
    bool with_residual = true;
    std::string corpus;
    std::string input;
    std::string output;
    bool resume = false;
    std::size_t eval_batches = 8;
    std::vector<std::uint64_t> flops_batches;

    bool operator==(const ExperimentConfig&) const = default;
};

Json to_json(const ExperimentConfig& config);
ExperimentConfig experiment_config_from_json(const Json& j);

Json read_json_file(const std::filesystem::path& path);
/// Writes via a temporary file and rename.
void write_text_atomic(const std::filesystem::path& path, const std::string& text);
void write_json_file(const std::filesystem::path& path, const Json& j);

}  // namespace projcomp
