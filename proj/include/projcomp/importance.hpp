// Copyright 2026 The projcomp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "projcomp/gpt.hpp"

namespace projcomp {

enum class ImportanceMethod { magnitude, random };

std::string to_string(ImportanceMethod method);
ImportanceMethod parse_importance_method(const std::string& text);

/// A compressible channel axis: the residual stream (global) or one
/// layer's feed-forward hidden axis.
struct ChannelAxis {
    enum class Kind { model_width, ffn_hidden };
    Kind kind = Kind::model_width;
    std::size_t layer = 0;  // meaningful for ffn_hidden only

    static ChannelAxis width() { return {Kind::model_width, 0}; }
    static ChannelAxis ffn(std::size_t layer) { return {Kind::ffn_hidden, layer}; }
    std::size_t dim(const ModelConfig& config) const;
    std::string str() const;
    bool operator==(const ChannelAxis&) const = default;
};

struct ImportanceScores {
    ChannelAxis axis;
    ImportanceMethod method = ImportanceMethod::magnitude;
    std::uint64_t seed = 0;  // random method only
    std::vector<double> scores;
};

struct KeptIndexSet {
    std::vector<std::size_t> indices;  // sorted ascending, unique
    std::size_t original_dim = 0;

    std::size_t kept_dim() const { return indices.size(); }
    static KeptIndexSet all(std::size_t dim);
    /// Throws ConfigError unless sorted, unique and in range.
    void validate() const;
    bool operator==(const KeptIndexSet&) const = default;
};

/// One matrix contributing to a channel's magnitude, read along its rows
/// (channel c = row c) or columns (channel c = column c).
struct AxisContribution {
    Tensor matrix;
    enum class Along { rows, columns } along = Along::rows;
};

/// score[c] = sqrt(sum over contributions of the squared entries in row/column c).
std::vector<double> aggregate_magnitude(std::span<const AxisContribution> contributions);

/// Which matrices of the model read from or write to `axis`.
std::vector<AxisContribution> axis_contributions(const TransformerWeights& weights,
                                                 const ModelConfig& config, ChannelAxis axis);

ImportanceScores magnitude_scores(const TransformerWeights& weights, const ModelConfig& config,
                                  ChannelAxis axis);
/// Seeded uniform(0, 1) scores.
ImportanceScores random_scores(std::size_t dim, std::uint64_t seed);

/// Indices of the k largest scores (ties toward the lower index), ascending.
KeptIndexSet select_top_k(std::span<const double> scores, std::size_t k);

/// Scores for every compressible axis of a model: width first, then the
/// FFN axis of each layer. Random scores use distinct sub-seeds per axis.
struct ModelImportance {
    ImportanceScores width;
    std::vector<ImportanceScores> ffn;  // one per layer
};

ModelImportance score_model(const TransformerWeights& weights, const ModelConfig& config,
                            ImportanceMethod method, std::uint64_t seed);

}  // namespace projcomp
