// Copyright 2026 The projcomp Authors
// SPDX-License-Identifier: Apache-2.0

#include "projcomp/gpt.hpp"

#include <array>
#include <cmath>
#include <numeric>

#include "projcomp/ops.hpp"
#include "projcomp/rng.hpp"

namespace projcomp {

void ModelConfig::validate() const {
    if (n_layers == 0 || n_heads == 0 || d_model == 0 || d_ff == 0 || vocab_size == 0 ||
        seq_len == 0) {
        throw ConfigError("model config fields must all be positive");
    }
    if (!(layer_norm_eps > 0.0)) {
        throw ConfigError("layer_norm_eps must be positive");
    }
    if (d_model % n_heads != 0) {
        throw ConfigError("d_model " + std::to_string(d_model) + " is not divisible by n_heads " +
                          std::to_string(n_heads));
    }
}

namespace {

struct SiteInfo {
    Site site;
    const char* tag;
};

constexpr std::array<SiteInfo, 21> kSites{{
    {Site::tok_emb, "tok_emb"},   {Site::pos_emb, "pos_emb"},   {Site::lm_head, "lm_head"},
    {Site::ln1_gain, "ln1_gain"}, {Site::ln1_bias, "ln1_bias"}, {Site::wq, "wq"},
    {Site::bq, "bq"},             {Site::wk, "wk"},             {Site::bk, "bk"},
    {Site::wv, "wv"},             {Site::bv, "bv"},             {Site::wo, "wo"},
    {Site::bo, "bo"},             {Site::ln2_gain, "ln2_gain"}, {Site::ln2_bias, "ln2_bias"},
    {Site::ff1, "ff1"},           {Site::ff1_bias, "ff1_bias"}, {Site::ff2, "ff2"},
    {Site::ff2_bias, "ff2_bias"}, {Site::lnf_gain, "lnf_gain"}, {Site::lnf_bias, "lnf_bias"},
}};

constexpr std::array<Site, 16> kLayerSites{
    Site::ln1_gain, Site::ln1_bias, Site::wq,       Site::bq,       Site::wk,  Site::bk,
    Site::wv,       Site::bv,       Site::wo,       Site::bo,       Site::ln2_gain, Site::ln2_bias,
    Site::ff1,      Site::ff1_bias, Site::ff2,      Site::ff2_bias,
};

const char* site_tag(Site site) {
    for (const auto& info : kSites) {
        if (info.site == site) {
            return info.tag;
        }
    }
    return "?";
}

bool is_gain(Site site) {
    return site == Site::ln1_gain || site == Site::ln2_gain || site == Site::lnf_gain;
}

Tensor* layer_slot(LayerWeights& l, Site site) {
    switch (site) {
        case Site::ln1_gain: return &l.ln1_gain;
        case Site::ln1_bias: return &l.ln1_bias;
        case Site::wq: return &l.wq;
        case Site::bq: return &l.bq;
        case Site::wk: return &l.wk;
        case Site::bk: return &l.bk;
        case Site::wv: return &l.wv;
        case Site::bv: return &l.bv;
        case Site::wo: return &l.wo;
        case Site::bo: return &l.bo;
        case Site::ln2_gain: return &l.ln2_gain;
        case Site::ln2_bias: return &l.ln2_bias;
        case Site::ff1: return &l.ff1;
        case Site::ff1_bias: return &l.ff1_bias;
        case Site::ff2: return &l.ff2;
        case Site::ff2_bias: return &l.ff2_bias;
        default: return nullptr;
    }
}

}  // namespace

bool is_per_layer(Site site) {
    return !(site == Site::tok_emb || site == Site::pos_emb || site == Site::lm_head ||
             site == Site::lnf_gain || site == Site::lnf_bias);
}

bool is_matrix_site(Site site) {
    switch (site) {
        case Site::tok_emb:
        case Site::pos_emb:
        case Site::lm_head:
        case Site::wq:
        case Site::wk:
        case Site::wv:
        case Site::wo:
        case Site::ff1:
        case Site::ff2:
            return true;
        default:
            return false;
    }
}

std::string ParamName::str() const {
    if (layer) {
        return "layers." + std::to_string(*layer) + "." + site_tag(site);
    }
    return site_tag(site);
}

ParamName ParamName::parse(const std::string& text) {
    std::string tag = text;
    std::optional<std::size_t> layer;
    if (text.rfind("layers.", 0) == 0) {
        const auto dot = text.find('.', 7);
        if (dot == std::string::npos) {
            throw FormatError("malformed parameter name '" + text + "'");
        }
        try {
            layer = static_cast<std::size_t>(std::stoull(text.substr(7, dot - 7)));
        } catch (const std::exception&) {
            throw FormatError("malformed layer index in parameter name '" + text + "'");
        }
        tag = text.substr(dot + 1);
    }
    for (const auto& info : kSites) {
        if (tag == info.tag && is_per_layer(info.site) == layer.has_value()) {
            return ParamName{info.site, layer};
        }
    }
    throw FormatError("unknown parameter name '" + text + "'");
}

std::vector<ParamName> param_names(const ModelConfig& config) {
    std::vector<ParamName> names;
    names.push_back({Site::tok_emb, std::nullopt});
    names.push_back({Site::pos_emb, std::nullopt});
    if (!config.tied_embeddings) {
        names.push_back({Site::lm_head, std::nullopt});
    }
    for (std::size_t l = 0; l < config.n_layers; ++l) {
        for (Site s : kLayerSites) {
            names.push_back({s, l});
        }
    }
    names.push_back({Site::lnf_gain, std::nullopt});
    names.push_back({Site::lnf_bias, std::nullopt});
    return names;
}

Shape param_shape(const ModelConfig& c, const ParamName& name) {
    const std::size_t d = c.d_model;
    switch (name.site) {
        case Site::tok_emb: return {c.vocab_size, d};
        case Site::pos_emb: return {c.seq_len, d};
        case Site::lm_head: return {d, c.vocab_size};
        case Site::wq:
        case Site::wk:
        case Site::wv:
        case Site::wo: return {d, d};
        case Site::ff1: return {d, c.d_ff};
        case Site::ff1_bias: return {c.d_ff};
        case Site::ff2: return {c.d_ff, d};
        default: return {d};
    }
}

Tensor& TransformerWeights::get(const ParamName& name) {
    switch (name.site) {
        case Site::tok_emb: return tok_emb;
        case Site::pos_emb: return pos_emb;
        case Site::lm_head: return lm_head;
        case Site::lnf_gain: return lnf_gain;
        case Site::lnf_bias: return lnf_bias;
        default: break;
    }
    if (!name.layer || *name.layer >= layers.size()) {
        throw IndexError("no parameter '" + name.str() + "'");
    }
    return *layer_slot(layers[*name.layer], name.site);
}

const Tensor& TransformerWeights::get(const ParamName& name) const {
    return const_cast<TransformerWeights*>(this)->get(name);
}

std::vector<NamedTensor> TransformerWeights::named(const ModelConfig& config) const {
    std::vector<NamedTensor> out;
    for (const auto& name : param_names(config)) {
        out.push_back({name, get(name)});
    }
    return out;
}

TransformerWeights TransformerWeights::zeros(const ModelConfig& config) {
    TransformerWeights w;
    w.layers.resize(config.n_layers);
    for (const auto& name : param_names(config)) {
        w.get(name) = Tensor::zeros(param_shape(config, name));
    }
    return w;
}

TransformerWeights TransformerWeights::clone(const ModelConfig& config, bool requires_grad) const {
    TransformerWeights w;
    w.layers.resize(config.n_layers);
    for (const auto& name : param_names(config)) {
        w.get(name) = get(name).detach(requires_grad);
    }
    return w;
}

void TransformerWeights::set_requires_grad(const ModelConfig& config, bool value) {
    for (const auto& name : param_names(config)) {
        get(name).set_requires_grad(value);
    }
}

void check_weights(const TransformerWeights& weights, const ModelConfig& config) {
    config.validate();
    if (weights.layers.size() != config.n_layers) {
        throw DimensionError("weights have " + std::to_string(weights.layers.size()) +
                             " layers, config expects " + std::to_string(config.n_layers));
    }
    for (const auto& name : param_names(config)) {
        const Tensor& t = weights.get(name);
        const Shape expected = param_shape(config, name);
        if (!t.defined() || t.shape() != expected) {
            throw DimensionError("parameter " + name.str() + " has shape " +
                                 (t.defined() ? shape_to_string(t.shape()) : "<missing>") +
                                 ", expected " + shape_to_string(expected));
        }
    }
}

TransformerWeights init_weights(const ModelConfig& config, std::uint64_t seed) {
    config.validate();
    Rng rng(seed);
    TransformerWeights w;
    w.layers.resize(config.n_layers);
    for (const auto& name : param_names(config)) {
        const Shape shape = param_shape(config, name);
        Tensor t = Tensor::zeros(shape, true);
        if (is_matrix_site(name.site)) {
            for (double& v : t.data_mut()) {
                v = rng.normal(0.0, 0.02);
            }
        } else if (is_gain(name.site)) {
            std::fill(t.data_mut().begin(), t.data_mut().end(), 1.0);
        }
        w.get(name) = std::move(t);
    }
    return w;
}

Tensor forward(const TransformerWeights& w, const ModelConfig& config,
               std::span<const TokenId> inputs, std::size_t batch, std::size_t seq) {
    if (seq == 0 || batch == 0 || inputs.size() != batch * seq) {
        throw DimensionError("forward: " + std::to_string(inputs.size()) +
                             " input ids do not form a batch of " + std::to_string(batch) + "x" +
                             std::to_string(seq));
    }
    if (seq > config.seq_len) {
        throw DimensionError("forward: sequence length " + std::to_string(seq) +
                             " exceeds model seq_len " + std::to_string(config.seq_len));
    }
    for (TokenId id : inputs) {
        if (id < 0 || static_cast<std::size_t>(id) >= config.vocab_size) {
            throw IndexError("forward: token id " + std::to_string(id) + " out of range for vocab " +
                             std::to_string(config.vocab_size));
        }
    }
    std::vector<TokenId> positions(batch * seq);
    for (std::size_t i = 0; i < positions.size(); ++i) {
        positions[i] = static_cast<TokenId>(i % seq);
    }
    const Shape ids_shape{batch, seq};
    const double attn_scale = 1.0 / std::sqrt(static_cast<double>(config.head_dim()));

    Tensor h = add(embedding(inputs, ids_shape, w.tok_emb), embedding(positions, ids_shape, w.pos_emb));
    for (const LayerWeights& l : w.layers) {
        const Tensor a = layer_norm(h, l.ln1_gain, l.ln1_bias, config.layer_norm_eps);
        const Tensor q = split_heads(add_row(matmul(a, l.wq), l.bq), config.n_heads);
        const Tensor k = split_heads(add_row(matmul(a, l.wk), l.bk), config.n_heads);
        const Tensor v = split_heads(add_row(matmul(a, l.wv), l.bv), config.n_heads);
        const Tensor scores = causal_mask_fill(scale(bmm(q, transpose(k)), attn_scale));
        const Tensor context = merge_heads(bmm(softmax(scores), v), batch);
        h = add(h, add_row(matmul(context, l.wo), l.bo));

        const Tensor m = layer_norm(h, l.ln2_gain, l.ln2_bias, config.layer_norm_eps);
        const Tensor hidden = gelu(add_row(matmul(m, l.ff1), l.ff1_bias));
        h = add(h, add_row(matmul(hidden, l.ff2), l.ff2_bias));
    }
    const Tensor out = layer_norm(h, w.lnf_gain, w.lnf_bias, config.layer_norm_eps);
    return matmul(out, config.tied_embeddings ? transpose(w.tok_emb) : w.lm_head);
}

std::uint64_t count_params(const ModelConfig& c) {
    const std::uint64_t d = c.d_model, f = c.d_ff, v = c.vocab_size, s = c.seq_len;
    const std::uint64_t per_layer = 4 * (d * d + d)  // attention projections + biases
                                    + (d * f + f)    // ff1
                                    + (f * d + d)    // ff2
                                    + 4 * d;         // two LayerNorms
    return v * d + s * d + c.n_layers * per_layer + 2 * d + (c.tied_embeddings ? 0 : v * d);
}

DenseModel::DenseModel(ModelConfig config, TransformerWeights weights)
    : config_(config), weights_(std::move(weights)) {
    check_weights(weights_, config_);
    weights_.set_requires_grad(config_, true);
}

Tensor DenseModel::forward(std::span<const TokenId> inputs, std::size_t batch, std::size_t seq) {
    return projcomp::forward(weights_, config_, inputs, batch, seq);
}

std::vector<ParamRef> DenseModel::trainable() const {
    std::vector<ParamRef> out;
    for (auto& nt : weights_.named(config_)) {
        out.push_back({nt.name.str(), nt.tensor});
    }
    return out;
}

}  // namespace projcomp
