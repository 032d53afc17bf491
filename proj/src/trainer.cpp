// Copyright 2026 The projcomp Authors
// SPDX-License-Identifier: Apache-2.0

#include "projcomp/trainer.hpp"

#include <cmath>
#include <numbers>

#include "projcomp/hard_pruning.hpp"
#include "projcomp/kernels/kernels.hpp"
#include "projcomp/ops.hpp"

namespace projcomp {

std::string to_string(LrSchedule schedule) {
    return schedule == LrSchedule::cosine ? "cosine" : "constant";
}

LrSchedule parse_lr_schedule(const std::string& text) {
    if (text == "cosine") return LrSchedule::cosine;
    if (text == "constant") return LrSchedule::constant;
    throw ConfigError("unknown schedule '" + text + "' (expected constant|cosine)");
}

void TrainConfig::validate() const {
    if (steps == 0) throw ConfigError("steps must be positive");
    if (batch_size == 0) throw ConfigError("batch_size must be positive");
    if (seq_len == 0) throw ConfigError("seq_len must be positive");
    if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
    if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0)) {
        throw ConfigError("Adam betas must lie in [0, 1)");
    }
    if (!(adam_eps > 0.0)) throw ConfigError("adam_eps must be positive");
    if (weight_decay < 0.0) throw ConfigError("weight_decay must be non-negative");
    if (!(final_lr_fraction >= 0.0 && final_lr_fraction <= 1.0)) {
        throw ConfigError("final_lr_fraction must lie in [0, 1]");
    }
    if (loss_window == 0) throw ConfigError("loss_window must be positive");
}

double TrainConfig::lr_at(std::size_t step) const {
    if (warmup_steps > 0 && step <= warmup_steps) {
        return learning_rate * static_cast<double>(step) / static_cast<double>(warmup_steps);
    }
    if (schedule == LrSchedule::constant || steps <= warmup_steps) {
        return learning_rate;
    }
    const double progress = std::min(1.0, static_cast<double>(step - warmup_steps) /
                                              static_cast<double>(steps - warmup_steps));
    const double cosine = 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
    return learning_rate * (final_lr_fraction + (1.0 - final_lr_fraction) * cosine);
}

void adamw_step(const std::vector<ParamRef>& params, TrainState& state, const TrainConfig& config,
                double lr) {
    for (const auto& p : params) {
        if (!p.tensor.requires_grad()) {
            throw TapeError("parameter " + p.name + " is listed as trainable but is frozen");
        }
        if (!p.tensor.has_grad()) {
            throw TapeError("missing gradient for trainable parameter " + p.name);
        }
    }
    state.step += 1;
    const double t = static_cast<double>(state.step);
    for (const auto& p : params) {
        auto it = state.moments.find(p.name);
        if (it == state.moments.end()) {
            it = state.moments
                     .emplace(p.name, AdamMoments{Tensor::zeros(p.tensor.shape()),
                                                  Tensor::zeros(p.tensor.shape())})
                     .first;
        }
        Tensor param = p.tensor;
        const kernels::AdamWCoeffs coeffs{
            lr,
            config.adam_beta1,
            config.adam_beta2,
            config.adam_eps,
            param.rank() >= 2 ? config.weight_decay : 0.0,
            1.0 - std::pow(config.adam_beta1, t),
            1.0 - std::pow(config.adam_beta2, t),
        };
        kernels::adamw(param.data_mut().data(), param.grad().data(), it->second.m.data_mut().data(),
                       it->second.v.data_mut().data(), param.numel(), coeffs);
    }
}

double clip_grad_norm(const std::vector<ParamRef>& params, double max_norm) {
    double total = 0.0;
    for (const auto& p : params) {
        if (p.tensor.has_grad()) {
            total += kernels::sum_squares(p.tensor.grad().data(), p.tensor.numel());
        }
    }
    const double norm = std::sqrt(total);
    if (max_norm > 0.0 && norm > max_norm) {
        const double factor = max_norm / (norm + 1e-6);
        for (const auto& p : params) {
            if (p.tensor.has_grad()) {
                auto& g = p.tensor.impl()->grad;
                for (double& v : g) {
                    v *= factor;
                }
            }
        }
    }
    return norm;
}

double tail_mean(const std::vector<double>& values, std::size_t window) {
    if (values.empty()) {
        return 0.0;
    }
    const std::size_t n = std::min(window, values.size());
    double s = 0.0;
    for (std::size_t i = values.size() - n; i < values.size(); ++i) {
        s += values[i];
    }
    return s / static_cast<double>(n);
}

namespace {

std::uint64_t mix_hash(std::uint64_t h, std::uint64_t v) {
    h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return h;
}

std::uint64_t count_elements(const std::vector<ParamRef>& params) {
    std::uint64_t n = 0;
    for (const auto& p : params) {
        n += p.tensor.numel();
    }
    return n;
}

}  // namespace

Trainer::Trainer(LanguageModel& model, TokenStream& stream, TrainConfig config)
    : Trainer(model, stream, std::move(config), TrainState{}) {}

Trainer::Trainer(LanguageModel& model, TokenStream& stream, TrainConfig config, TrainState state)
    : model_(model), stream_(stream), config_(std::move(config)), state_(std::move(state)) {
    config_.validate();
    if (stream_.seq_len() != config_.seq_len) {
        throw ConfigError("data stream seq_len " + std::to_string(stream_.seq_len()) +
                          " differs from train config seq_len " + std::to_string(config_.seq_len));
    }
    if (config_.seq_len > model_.config().seq_len) {
        throw ConfigError("train seq_len exceeds the model's seq_len");
    }
    if (stream_.seed() != config_.seed) {
        throw ConfigError("data stream seed differs from train config seed");
    }
    stream_.set_windows_consumed(state_.windows_consumed);
    params_ = model_.trainable();
    for (const auto& p : params_) {
        p.tensor.impl()->grad.clear();
    }
    report_.config = config_;
    report_.trainable_params = count_elements(params_);
    report_.frozen_params = count_elements(model_.frozen());
    report_.kernel_isa = std::string(kernels::isa_name(kernels::active_isa()));
}

double Trainer::step() {
    const Batch batch = stream_.next_batch(config_.batch_size);
    const std::uint64_t step_index = state_.step + 1;
    Tape tape;
    Tensor loss;
    FlopCounterScope flops;
    try {
        TapeScope scope(tape);
        const Tensor logits = model_.forward(batch.inputs, batch.batch, batch.seq);
        loss = cross_entropy(logits, batch.targets);
    } catch (const NumericError& e) {
        throw NumericError("step " + std::to_string(step_index) + ": " + e.what());
    }
    const double value = loss.item();
    if (!std::isfinite(value)) {
        throw NumericError("step " + std::to_string(step_index) + ": non-finite loss");
    }
    tape.backward(loss);
    if (report_.losses.empty()) {
        report_.step_forward_flops = flops.counts().forward;
        report_.step_backward_flops = flops.counts().backward;
    }
    clip_grad_norm(params_, config_.grad_clip_norm);
    adamw_step(params_, state_, config_, config_.lr_at(step_index));
    for (const auto& p : params_) {
        p.tensor.impl()->grad.clear();
    }
    state_.windows_consumed = stream_.windows_consumed();
    state_.loss_window.push_back(value);
    while (state_.loss_window.size() > config_.loss_window) {
        state_.loss_window.pop_front();
    }
    report_.losses.push_back(value);
    report_.data_hash = mix_hash(report_.data_hash, batch.hash());
    return value;
}

TrainReport Trainer::run(const std::function<void(std::uint64_t, double)>& on_step) {
    while (state_.step < config_.steps) {
        const double loss = step();
        if (on_step) {
            on_step(state_.step, loss);
        }
    }
    report_.steps = report_.losses.size();
    report_.tokens = report_.steps * config_.batch_size * config_.seq_len;
    report_.last_window_mean = tail_mean(report_.losses, config_.loss_window);
    report_.moment_tensors = state_.moments.size();
    return report_;
}

TrainReport train(LanguageModel& model, TokenStream& stream, const TrainConfig& config) {
    Trainer trainer(model, stream, config);
    return trainer.run();
}

double evaluate(LanguageModel& model, TokenStream& stream, std::size_t batches,
                std::size_t batch_size) {
    if (batches == 0) {
        throw ConfigError("evaluate: need at least one batch");
    }
    NoTapeScope no_tape;
    double total = 0.0;
    for (std::size_t i = 0; i < batches; ++i) {
        const Batch b = stream.next_batch(batch_size);
        total += cross_entropy(model.forward(b.inputs, b.batch, b.seq), b.targets).item();
    }
    return total / static_cast<double>(batches);
}

void check_matched(const TrainReport& a, const TrainReport& b) {
    if (a.config.steps != b.config.steps || a.config.batch_size != b.config.batch_size ||
        a.config.seq_len != b.config.seq_len || a.config.seed != b.config.seed) {
        throw ConfigError("arms are not matched: steps, batch size, seq_len and data seed must agree");
    }
    if (a.steps != b.steps || a.tokens != b.tokens) {
        throw ConfigError("arms processed different step or token counts");
    }
}

ComparisonReport compare_pipelines(const TransformerWeights& base, const CompressionPlan& plan,
                                   const std::vector<TokenId>& corpus, const TrainConfig& config,
                                   bool with_residual) {
    ComparisonReport report;
    report.compression_level = plan.compression_level;
    report.importance = to_string(plan.importance);
    {
        ProjectedModel pc = attach_projections(base, plan, with_residual);
        TokenStream stream(corpus, config.seq_len, config.seed);
        report.pc = train(pc, stream, config);
    }
    {
        auto [cfg, weights] = hard_prune(base, plan);
        DenseModel hpr(cfg, std::move(weights));
        TokenStream stream(corpus, config.seq_len, config.seed);
        report.hpr = train(hpr, stream, config);
    }
    check_matched(report.pc, report.hpr);
    report.margin = report.pc.last_window_mean - report.hpr.last_window_mean;
    report.step0_margin = report.pc.losses.front() - report.hpr.losses.front();
    report.same_batches = report.pc.data_hash == report.hpr.data_hash;
    return report;
}

}  // namespace projcomp
