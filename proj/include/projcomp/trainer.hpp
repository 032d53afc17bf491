// Copyright 2026 The projcomp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "projcomp/data.hpp"
#include "projcomp/gpt.hpp"
#include "projcomp/projection.hpp"

namespace projcomp {

enum class LrSchedule { constant, cosine };

std::string to_string(LrSchedule schedule);
LrSchedule parse_lr_schedule(const std::string& text);

struct TrainConfig {
    std::size_t steps = 200;
    std::size_t batch_size = 8;
    std::size_t seq_len = 64;
    double learning_rate = 3e-3;
    std::size_t warmup_steps = 20;
    LrSchedule schedule = LrSchedule::cosine;
    double final_lr_fraction = 0.1;  // cosine floor as a fraction of learning_rate
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    double weight_decay = 0.0;     // applied to matrix parameters only
    double grad_clip_norm = 1.0;   // <= 0 disables clipping
    std::uint64_t seed = 0;        // data stream seed
    std::size_t loss_window = 100;

    void validate() const;
    /// Learning rate used at 1-based step `step`.
    double lr_at(std::size_t step) const;
    bool operator==(const TrainConfig&) const = default;
};

struct AdamMoments {
    Tensor m;
    Tensor v;
};

/// Optimizer state and loss window; moments exist only for trainable tensors.
struct TrainState {
    std::uint64_t step = 0;
    std::map<std::string, AdamMoments> moments;
    std::deque<double> loss_window;
    std::uint64_t windows_consumed = 0;  // data stream position
};

/// One AdamW update with bias correction and decoupled weight decay.
/// Throws TapeError when a trainable parameter has no gradient.
void adamw_step(const std::vector<ParamRef>& params, TrainState& state, const TrainConfig& config,
                double lr);

/// Global L2 norm of the gradients; scales them down to max_norm when larger.
double clip_grad_norm(const std::vector<ParamRef>& params, double max_norm);

struct TrainReport {
    TrainConfig config;
    std::vector<double> losses;  // one per step, in order
    double last_window_mean = 0.0;
    std::uint64_t steps = 0;
    std::uint64_t tokens = 0;  // steps · batch_size · seq_len
    std::uint64_t trainable_params = 0;
    std::uint64_t frozen_params = 0;
    std::uint64_t moment_tensors = 0;
    std::uint64_t step_forward_flops = 0;   // instrumented, first step of this run
    std::uint64_t step_backward_flops = 0;  // instrumented, first step of this run
    std::uint64_t data_hash = 0;            // running hash of every batch consumed
    std::string kernel_isa;
};

/// Mean of the last `window` entries (all of them when fewer).
double tail_mean(const std::vector<double>& values, std::size_t window);

class Trainer {
public:
    Trainer(LanguageModel& model, TokenStream& stream, TrainConfig config);
    /// Resumes from a saved state (moments, step, stream position).
    Trainer(LanguageModel& model, TokenStream& stream, TrainConfig config, TrainState state);

    /// Runs one full optimization step and returns its loss.
    double step();
    /// Runs until config.steps total steps have been taken.
    TrainReport run(const std::function<void(std::uint64_t step, double loss)>& on_step = {});

    const TrainState& state() const { return state_; }
    const TrainConfig& config() const { return config_; }

private:
    LanguageModel& model_;
    TokenStream& stream_;
    TrainConfig config_;
    TrainState state_;
    std::vector<ParamRef> params_;
    TrainReport report_;
};

TrainReport train(LanguageModel& model, TokenStream& stream, const TrainConfig& config);

/// Mean cross-entropy over `batches` consecutive batches starting at the
/// stream's current position. No tape is recorded.
double evaluate(LanguageModel& model, TokenStream& stream, std::size_t batches,
                std::size_t batch_size);

struct ComparisonReport {
    TrainReport pc;
    TrainReport hpr;
    double margin = 0.0;        // pc.last_window_mean - hpr.last_window_mean
    double step0_margin = 0.0;  // pc.losses[0] - hpr.losses[0]
    bool same_batches = false;
    double compression_level = 0.0;
    std::string importance;
};

/// Throws ConfigError unless the two reports describe matched-compute runs.
void check_matched(const TrainReport& a, const TrainReport& b);

/// Trains both arms from the same base with the same plan, data and steps.
ComparisonReport compare_pipelines(const TransformerWeights& base, const CompressionPlan& plan,
                                   const std::vector<TokenId>& corpus, const TrainConfig& config,
                                   bool with_residual = true);

}  // namespace projcomp
