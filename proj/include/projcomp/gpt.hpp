// Copyright 2026 The projcomp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "projcomp/tensor.hpp"

namespace projcomp {

struct ModelConfig {
    std::size_t n_layers = 2;
    std::size_t n_heads = 8;
    std::size_t d_model = 64;
    std::size_t d_ff = 256;
    std::size_t vocab_size = 257;
    std::size_t seq_len = 128;
    double layer_norm_eps = 1e-5;
    bool tied_embeddings = true;

    std::size_t head_dim() const { return d_model / n_heads; }
    /// Throws ConfigError on zero fields or d_model not divisible by n_heads.
    void validate() const;

    bool operator==(const ModelConfig&) const = default;
};

/// Every parameter is identified by a site tag plus (for per-layer sites)
/// the layer index.
enum class Site {
    tok_emb,
    pos_emb,
    lm_head,  // untied models only; [d_model, V]
    ln1_gain,
    ln1_bias,
    wq,
    bq,
    wk,
    bk,
    wv,
    bv,
    wo,
    bo,
    ln2_gain,
    ln2_bias,
    ff1,
    ff1_bias,
    ff2,
    ff2_bias,
    lnf_gain,
    lnf_bias,
};

struct ParamName {
    Site site = Site::tok_emb;
    std::optional<std::size_t> layer;

    std::string str() const;
    static ParamName parse(const std::string& text);
    bool operator==(const ParamName&) const = default;
    auto operator<=>(const ParamName& other) const { return str() <=> other.str(); }
};

bool is_per_layer(Site site);
bool is_matrix_site(Site site);

/// All parameter names of a config in canonical order.
std::vector<ParamName> param_names(const ModelConfig& config);
Shape param_shape(const ModelConfig& config, const ParamName& name);

struct LayerWeights {
    Tensor ln1_gain, ln1_bias;
    Tensor wq, bq, wk, bk, wv, bv, wo, bo;
    Tensor ln2_gain, ln2_bias;
    Tensor ff1, ff1_bias, ff2, ff2_bias;
};

struct NamedTensor {
    ParamName name;
    Tensor tensor;
};

struct TransformerWeights {
    Tensor tok_emb;  // [V, d_model]
    Tensor pos_emb;  // [seq_len, d_model]
    Tensor lm_head;  // [d_model, V] when untied, undefined otherwise
    std::vector<LayerWeights> layers;
    Tensor lnf_gain, lnf_bias;

    Tensor& get(const ParamName& name);
    const Tensor& get(const ParamName& name) const;
    /// Handles to every parameter, canonical order.
    std::vector<NamedTensor> named(const ModelConfig& config) const;
    /// Empty weights with every slot sized for `config`, filled with zeros.
    static TransformerWeights zeros(const ModelConfig& config);
    /// Deep copy.
    TransformerWeights clone(const ModelConfig& config, bool requires_grad) const;
    void set_requires_grad(const ModelConfig& config, bool value);
};

/// Throws DimensionError if any tensor's shape disagrees with `config`.
void check_weights(const TransformerWeights& weights, const ModelConfig& config);

/// N(0, 0.02) matrices, zero biases, unit gains; deterministic per seed.
TransformerWeights init_weights(const ModelConfig& config, std::uint64_t seed);

/// Pre-LayerNorm GPT-2 decoder. inputs holds batch·seq token ids; returns
/// logits [batch, seq, V].
Tensor forward(const TransformerWeights& weights, const ModelConfig& config,
               std::span<const TokenId> inputs, std::size_t batch, std::size_t seq);

/// Exact parameter count over the shapes of TransformerWeights.
std::uint64_t count_params(const ModelConfig& config);

struct ParamRef {
    std::string name;
    Tensor tensor;
};

/// Anything the trainer can optimize: produces logits and exposes which
/// tensors are trainable and which are frozen.
class LanguageModel {
public:
    virtual ~LanguageModel() = default;
    /// Architecture that forward() runs (the compressed one for PC).
    virtual const ModelConfig& config() const = 0;
    virtual Tensor forward(std::span<const TokenId> inputs, std::size_t batch, std::size_t seq) = 0;
    virtual std::vector<ParamRef> trainable() const = 0;
    virtual std::vector<ParamRef> frozen() const = 0;
};

class DenseModel final : public LanguageModel {
public:
    DenseModel(ModelConfig config, TransformerWeights weights);

    const ModelConfig& config() const override { return config_; }
    Tensor forward(std::span<const TokenId> inputs, std::size_t batch, std::size_t seq) override;
    std::vector<ParamRef> trainable() const override;
    std::vector<ParamRef> frozen() const override { return {}; }

    const TransformerWeights& weights() const { return weights_; }
    TransformerWeights& weights() { return weights_; }

private:
    ModelConfig config_;
    TransformerWeights weights_;
};

}  // namespace projcomp
