// Copyright 2026 The projcomp Authors
// SPDX-License-Identifier: Apache-2.0

#include "projcomp/flops.hpp"

#include <json.hpp>

namespace projcomp {

std::uint64_t forward_flops(const ModelConfig& config, std::uint64_t batch, std::uint64_t seq) {
    config.validate();
    const std::uint64_t t = batch * seq;
    const std::uint64_t d = config.d_model;
    const std::uint64_t f = config.d_ff;
    const std::uint64_t v = config.vocab_size;
    const std::uint64_t qkvo = 4 * 2 * t * d * d;
    const std::uint64_t attn = 2 * (2 * batch * seq * seq * d);
    const std::uint64_t ffn = 2 * t * d * f + 2 * t * f * d;
    const std::uint64_t head = 2 * t * d * v;
    return config.n_layers * (qkvo + attn + ffn) + head;
}

MaterializationFlops site_materialization_flops(std::uint64_t d_in, std::uint64_t d_out,
                                                std::uint64_t ds_in, std::uint64_t ds_out,
                                                Sides sides) {
    switch (sides) {
        case Sides::left: {
            const std::uint64_t a = 2 * ds_in * d_in * d_out;
            return {a, a};
        }
        case Sides::right: {
            const std::uint64_t b = 2 * d_in * d_out * ds_out;
            return {b, b};
        }
        case Sides::both: {
            const std::uint64_t a = 2 * ds_in * d_in * d_out;
            const std::uint64_t b = 2 * ds_in * d_out * ds_out;
            return {a + b, a + 2 * b};
        }
    }
    throw ConfigError("unknown sides");
}

MaterializationFlops materialization_flops(const CompressionPlan& plan) {
    MaterializationFlops total;
    for (const auto& [name, sides] : plan.site_map) {
        const Shape src = param_shape(plan.source_config, name);
        const Shape dst = param_shape(plan.target_config, name);
        const auto site = site_materialization_flops(src[0], src[1], dst[0], dst[1], sides);
        total.forward += site.forward;
        total.backward += site.backward;
    }
    return total;
}

std::uint64_t pc_step_overhead(const CompressionPlan& plan) {
    return materialization_flops(plan).total();
}

FlopsBreakdown parity_report(const CompressionPlan& plan, std::uint64_t batch, std::uint64_t seq) {
    plan.validate();
    if (batch == 0 || seq == 0) {
        throw ConfigError("parity_report: batch and seq must be positive");
    }
    FlopsBreakdown r;
    r.batch = batch;
    r.seq = seq;
    const std::uint64_t tokens = batch * seq;
    r.base_forward = forward_flops(plan.source_config, batch, seq);
    r.compressed_forward = forward_flops(plan.target_config, batch, seq);
    // PC runs the target architecture on materialized weights.
    r.pc_forward = forward_flops(plan.target_config, batch, seq);
    r.base_forward_per_token = r.base_forward / tokens;
    r.compressed_forward_per_token = r.compressed_forward / tokens;
    r.pc_forward_per_token = r.pc_forward / tokens;
    const MaterializationFlops m = materialization_flops(plan);
    r.materialization_forward = m.forward;
    r.materialization_backward = m.backward;
    r.overhead = m.total();
    r.overhead_fraction =
        static_cast<double>(r.overhead) / (3.0 * static_cast<double>(r.compressed_forward));
    r.parity = r.pc_forward == r.compressed_forward;
    return r;
}

std::string to_json(const FlopsBreakdown& r, int indent) {
    nlohmann::ordered_json j;
    j["batch"] = r.batch;
    j["seq"] = r.seq;
    j["base_forward"] = r.base_forward;
    j["compressed_forward"] = r.compressed_forward;
    j["pc_forward"] = r.pc_forward;
    j["base_forward_per_token"] = r.base_forward_per_token;
    j["compressed_forward_per_token"] = r.compressed_forward_per_token;
    j["pc_forward_per_token"] = r.pc_forward_per_token;
    j["materialization_forward"] = r.materialization_forward;
    j["materialization_backward"] = r.materialization_backward;
    j["overhead"] = r.overhead;
    j["overhead_fraction"] = r.overhead_fraction;
    j["parity"] = r.parity;
    return j.dump(indent);
}

}  // namespace projcomp
