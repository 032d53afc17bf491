// Copyright 2026 The projcomp Authors
// SPDX-License-Identifier: Apache-2.0

#include "projcomp/importance.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "projcomp/rng.hpp"

namespace projcomp {

std::string to_string(ImportanceMethod method) {
    return method == ImportanceMethod::magnitude ? "magnitude" : "random";
}

ImportanceMethod parse_importance_method(const std::string& text) {
    if (text == "magnitude") {
        return ImportanceMethod::magnitude;
    }
    if (text == "random") {
        return ImportanceMethod::random;
    }
    throw ConfigError("unknown importance method '" + text + "' (expected magnitude|random)");
}

std::size_t ChannelAxis::dim(const ModelConfig& config) const {
    return kind == Kind::model_width ? config.d_model : config.d_ff;
}

std::string ChannelAxis::str() const {
    return kind == Kind::model_width ? "model_width" : "ffn_hidden." + std::to_string(layer);
}

KeptIndexSet KeptIndexSet::all(std::size_t dim) {
    KeptIndexSet set;
    set.original_dim = dim;
    set.indices.resize(dim);
    std::iota(set.indices.begin(), set.indices.end(), std::size_t{0});
    return set;
}

void KeptIndexSet::validate() const {
    if (indices.empty() || indices.size() > original_dim) {
        throw ConfigError("kept set of " + std::to_string(indices.size()) +
                          " indices is invalid for dimension " + std::to_string(original_dim));
    }
    for (std::size_t i = 0; i < indices.size(); ++i) {
        if (indices[i] >= original_dim || (i > 0 && indices[i] <= indices[i - 1])) {
            throw ConfigError("kept indices must be unique, ascending and below " +
                              std::to_string(original_dim));
        }
    }
}

std::vector<double> aggregate_magnitude(std::span<const AxisContribution> contributions) {
    if (contributions.empty()) {
        return {};
    }
    auto channels_of = [](const AxisContribution& c) {
        return c.along == AxisContribution::Along::rows ? c.matrix.dim(0) : c.matrix.dim(1);
    };
    const std::size_t dim = channels_of(contributions.front());
    std::vector<double> sq(dim, 0.0);
    for (const auto& c : contributions) {
        if (c.matrix.rank() != 2 || channels_of(c) != dim) {
            throw DimensionError("aggregate_magnitude: matrix " + shape_to_string(c.matrix.shape()) +
                                 " does not have " + std::to_string(dim) + " channels on the scored axis");
        }
        const std::size_t rows = c.matrix.dim(0), cols = c.matrix.dim(1);
        const auto m = c.matrix.data();
        for (std::size_t i = 0; i < rows; ++i) {
            for (std::size_t j = 0; j < cols; ++j) {
                const double v = m[i * cols + j];
                sq[c.along == AxisContribution::Along::rows ? i : j] += v * v;
            }
        }
    }
    for (double& s : sq) {
        s = std::sqrt(s);
    }
    return sq;
}

std::vector<AxisContribution> axis_contributions(const TransformerWeights& w,
                                                 const ModelConfig& config, ChannelAxis axis) {
    using Along = AxisContribution::Along;
    std::vector<AxisContribution> out;
    if (axis.kind == ChannelAxis::Kind::model_width) {
        out.push_back({w.tok_emb, Along::columns});
        out.push_back({w.pos_emb, Along::columns});
        if (!config.tied_embeddings) {
            out.push_back({w.lm_head, Along::rows});
        }
        for (const LayerWeights& l : w.layers) {
            for (const Tensor* m : {&l.wq, &l.wk, &l.wv, &l.wo}) {
                out.push_back({*m, Along::rows});
                out.push_back({*m, Along::columns});
            }
            out.push_back({l.ff1, Along::rows});
            out.push_back({l.ff2, Along::columns});
        }
    } else {
        if (axis.layer >= w.layers.size()) {
            throw IndexError("no layer " + std::to_string(axis.layer) + " to score");
        }
        out.push_back({w.layers[axis.layer].ff1, Along::columns});
        out.push_back({w.layers[axis.layer].ff2, Along::rows});
    }
    return out;
}

ImportanceScores magnitude_scores(const TransformerWeights& weights, const ModelConfig& config,
                                  ChannelAxis axis) {
    const auto contributions = axis_contributions(weights, config, axis);
    ImportanceScores s;
    s.axis = axis;
    s.method = ImportanceMethod::magnitude;
    s.scores = aggregate_magnitude(contributions);
    return s;
}

ImportanceScores random_scores(std::size_t dim, std::uint64_t seed) {
    if (dim == 0) {
        throw ConfigError("random_scores: dim must be positive");
    }
    Rng rng(seed);
    ImportanceScores s;
    s.method = ImportanceMethod::random;
    s.seed = seed;
    s.scores.resize(dim);
    for (double& v : s.scores) {
        v = rng.uniform();
    }
    return s;
}

KeptIndexSet select_top_k(std::span<const double> scores, std::size_t k) {
    if (k == 0 || k > scores.size()) {
        throw IndexError("select_top_k: k=" + std::to_string(k) + " out of range for " +
                         std::to_string(scores.size()) + " scores");
    }
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    KeptIndexSet set;
    set.original_dim = scores.size();
    set.indices.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
    std::sort(set.indices.begin(), set.indices.end());
    return set;
}

ModelImportance score_model(const TransformerWeights& weights, const ModelConfig& config,
                            ImportanceMethod method, std::uint64_t seed) {
    ModelImportance out;
    if (method == ImportanceMethod::magnitude) {
        out.width = magnitude_scores(weights, config, ChannelAxis::width());
        for (std::size_t l = 0; l < config.n_layers; ++l) {
            out.ffn.push_back(magnitude_scores(weights, config, ChannelAxis::ffn(l)));
        }
    } else {
        out.width = random_scores(config.d_model, derive_seed(seed, 0));
        out.width.axis = ChannelAxis::width();
        for (std::size_t l = 0; l < config.n_layers; ++l) {
            auto s = random_scores(config.d_ff, derive_seed(seed, l + 1));
            s.axis = ChannelAxis::ffn(l);
            out.ffn.push_back(std::move(s));
        }
    }
    return out;
}

}  // namespace projcomp
