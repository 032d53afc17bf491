// Copyright 2026 The projcomp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "projcomp/gpt.hpp"
#include "projcomp/projection.hpp"

namespace projcomp {

/// Every matmul (m×k by k×n counts 2·m·k·n) in one forward pass, attention
/// scores and mixes included. Embedding lookups and elementwise work are
/// not counted.
std::uint64_t forward_flops(const ModelConfig& config, std::uint64_t batch, std::uint64_t seq);

struct MaterializationFlops {
    std::uint64_t forward = 0;
    std::uint64_t backward = 0;
    std::uint64_t total() const { return forward + backward; }
};

/// Cost of building W_C for one site [d_in, d_out] -> [dS_in, dS_out].
/// Backward covers dP1, dP2 and the intermediate product; W is frozen so
/// no dW term exists.
MaterializationFlops site_materialization_flops(std::uint64_t d_in, std::uint64_t d_out,
                                                std::uint64_t ds_in, std::uint64_t ds_out,
                                                Sides sides);

/// Per-step materialization cost over every projected site of the plan.
MaterializationFlops materialization_flops(const CompressionPlan& plan);

/// Forward plus backward materialization FLOPs; independent of batch and seq.
std::uint64_t pc_step_overhead(const CompressionPlan& plan);

struct FlopsBreakdown {
    std::uint64_t batch = 0;
    std::uint64_t seq = 0;
    std::uint64_t base_forward = 0;        // source_config
    std::uint64_t compressed_forward = 0;  // target_config, the HPR retraining forward
    std::uint64_t pc_forward = 0;          // PC forward through the materialized weights
    std::uint64_t base_forward_per_token = 0;
    std::uint64_t compressed_forward_per_token = 0;
    std::uint64_t pc_forward_per_token = 0;
    std::uint64_t materialization_forward = 0;
    std::uint64_t materialization_backward = 0;
    std::uint64_t overhead = 0;
    double overhead_fraction = 0.0;  // overhead / (3 · compressed_forward)
    bool parity = false;             // pc_forward == compressed_forward
};

FlopsBreakdown parity_report(const CompressionPlan& plan, std::uint64_t batch, std::uint64_t seq);

std::string to_json(const FlopsBreakdown& report, int indent = 2);

}  // namespace projcomp
