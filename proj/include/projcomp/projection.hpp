// Copyright 2026 The projcomp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "projcomp/gpt.hpp"
#include "projcomp/importance.hpp"

namespace projcomp {

enum class Sides { left, right, both };

std::string to_string(Sides sides);
Sides parse_sides(const std::string& text);

/// Frozen base matrix W [d_in, d_out] with trainable projections.
///
///   W_C = P1 · W · P2 + W_r
///
/// P1 [dS_in, d_in] compresses the input axis, P2 [d_out, dS_out] the output
/// axis; either may be absent (one-sided). W_r has the materialized shape.
class ProjectionModule {
public:
    ProjectionModule() = default;
    /// Pass undefined tensors for absent parts. Throws DimensionError on
    /// inconsistent shapes. `base` is frozen in place.
    ProjectionModule(Tensor base, Tensor p1, Tensor p2, Tensor residual);

    /// P1 rows are e_i for i in rows_kept, P2 columns are e_j for j in
    /// cols_kept, W_r is zero. A null kept set leaves that side unprojected.
    static ProjectionModule selection_init(const Tensor& base, const KeptIndexSet* rows_kept,
                                           const KeptIndexSet* cols_kept, bool with_residual);

    /// Computes W_C; recorded on the active tape, so gradients reach P1, P2
    /// and W_r but never W.
    Tensor materialize() const;

    Sides sides() const;
    Shape compressed_shape() const;
    const Tensor& base() const { return base_; }
    const Tensor& p1() const { return p1_; }
    const Tensor& p2() const { return p2_; }
    const Tensor& residual() const { return residual_; }
    bool has_residual() const { return residual_.defined(); }

    /// Trainable parts as "<prefix>.P1", "<prefix>.P2", "<prefix>.W_r".
    std::vector<ParamRef> trainable(const std::string& prefix) const;
    void validate() const;

private:
    Tensor base_;
    Tensor p1_;
    Tensor p2_;
    Tensor residual_;
};

/// x·W_C (lhs) against ((x·P1)·W)·P2 + x·W_r (rhs).
std::pair<Tensor, Tensor> projected_forward_equivalence(const Tensor& x,
                                                        const ProjectionModule& module);

struct SiteAxes {
    const KeptIndexSet* in = nullptr;   // rows of the matrix
    const KeptIndexSet* out = nullptr;  // columns of the matrix
};

struct CompressionPlan {
    ModelConfig source_config;
    ModelConfig target_config;
    double compression_level = 0.5;
    KeptIndexSet width_kept;
    std::vector<KeptIndexSet> ffn_kept;  // one per layer
    std::vector<std::pair<ParamName, Sides>> site_map;
    ImportanceMethod importance = ImportanceMethod::magnitude;
    std::uint64_t importance_seed = 0;

    double width_ratio() const;
    double ffn_ratio() const;
    /// 1 - count_params(target) / count_params(source)
    double param_reduction() const;
    /// Throws ConfigError when the plan is not consistent with its configs.
    void validate() const;
    /// Kept sets governing each axis of a matrix parameter of the source model.
    SiteAxes axes(const ParamName& name) const;
    /// Kept set for a vector parameter (bias, LayerNorm gain/bias).
    const KeptIndexSet& vector_kept(const ParamName& name) const;
    Sides sides(const ParamName& name) const;

    bool operator==(const CompressionPlan&) const = default;
};

/// Compressed dims: width = largest multiple of n_heads <= round((1-c)·d_model);
/// ffn = round((1-c)·d_ff). Throws ConfigError on over-compression.
std::size_t compressed_width(const ModelConfig& config, double level);
std::size_t compressed_ffn(const ModelConfig& config, double level);

CompressionPlan plan_compression(const ModelConfig& config, double level,
                                 const ImportanceScores& width_scores,
                                 const std::vector<ImportanceScores>& ffn_scores);

/// Scores the model with `method` and plans the compression. The recorded
/// importance_seed is `seed` itself.
CompressionPlan plan_from_model(const TransformerWeights& weights, const ModelConfig& config,
                                double level, ImportanceMethod method, std::uint64_t seed);

/// Default site map: embeddings right-projected, untied head left-projected,
/// attention and feed-forward matrices projected on both sides.
std::vector<std::pair<ParamName, Sides>> default_site_map(const ModelConfig& config);

/// A compressed model that keeps the full base model frozen and trains the
/// projections (plus the sliced vector parameters).
class ProjectedModel final : public LanguageModel {
public:
    ProjectedModel(const TransformerWeights& base, CompressionPlan plan, bool with_residual);
    /// Reassembles a model from stored parts (checkpoint restore).
    ProjectedModel(TransformerWeights base, CompressionPlan plan,
                   std::vector<std::pair<ParamName, ProjectionModule>> modules,
                   TransformerWeights vectors);

    const ModelConfig& config() const override { return plan_.target_config; }
    /// Materializes every site once, then runs the standard forward.
    Tensor forward(std::span<const TokenId> inputs, std::size_t batch, std::size_t seq) override;
    std::vector<ParamRef> trainable() const override;
    std::vector<ParamRef> frozen() const override;

    /// Target-shaped weights built from the current projections.
    TransformerWeights materialize() const;

    const CompressionPlan& plan() const { return plan_; }
    const TransformerWeights& base() const { return base_; }
    const std::vector<std::pair<ParamName, ProjectionModule>>& modules() const { return modules_; }
    /// Sliced vector parameters, stored in a target-shaped weight set whose
    /// matrix slots are left undefined.
    const TransformerWeights& vectors() const { return vectors_; }
    bool with_residual() const;

private:
    TransformerWeights base_;
    CompressionPlan plan_;
    std::vector<std::pair<ParamName, ProjectionModule>> modules_;
    TransformerWeights vectors_;
};

ProjectedModel attach_projections(const TransformerWeights& base, const CompressionPlan& plan,
                                  bool with_residual = true);

/// Materializes every site once into plain tensors: an ordinary model with
/// plan().target_config.
std::pair<ModelConfig, TransformerWeights> export_compressed(const ProjectedModel& projected);

}  // namespace projcomp
