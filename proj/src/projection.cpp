// Copyright 2026 The projcomp Authors
// SPDX-License-Identifier: Apache-2.0

#include "projcomp/projection.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "projcomp/hard_pruning.hpp"
#include "projcomp/ops.hpp"

namespace projcomp {

std::string to_string(Sides sides) {
    switch (sides) {
        case Sides::left: return "left";
        case Sides::right: return "right";
        case Sides::both: return "both";
    }
    return "?";
}

Sides parse_sides(const std::string& text) {
    if (text == "left") return Sides::left;
    if (text == "right") return Sides::right;
    if (text == "both") return Sides::both;
    throw FormatError("unknown projection sides '" + text + "'");
}

// ---------------------------------------------------------------------------
// ProjectionModule

ProjectionModule::ProjectionModule(Tensor base, Tensor p1, Tensor p2, Tensor residual)
    : base_(std::move(base)), p1_(std::move(p1)), p2_(std::move(p2)), residual_(std::move(residual)) {
    validate();
    base_.set_requires_grad(false);
    for (Tensor* t : {&p1_, &p2_, &residual_}) {
        if (t->defined()) {
            t->set_requires_grad(true);
        }
    }
}

void ProjectionModule::validate() const {
    if (!base_.defined() || base_.rank() != 2) {
        throw DimensionError("projection module needs a matrix base");
    }
    if (!p1_.defined() && !p2_.defined()) {
        throw DimensionError("projection module needs at least one of P1, P2");
    }
    if (p1_.defined() && (p1_.rank() != 2 || p1_.dim(1) != base_.dim(0))) {
        throw DimensionError("P1 " + shape_to_string(p1_.shape()) + " cannot left-multiply W " +
                             shape_to_string(base_.shape()));
    }
    if (p2_.defined() && (p2_.rank() != 2 || p2_.dim(0) != base_.dim(1))) {
        throw DimensionError("P2 " + shape_to_string(p2_.shape()) + " cannot right-multiply W " +
                             shape_to_string(base_.shape()));
    }
    if (residual_.defined() && residual_.shape() != compressed_shape()) {
        throw DimensionError("W_r " + shape_to_string(residual_.shape()) +
                             " does not match materialized shape " +
                             shape_to_string(compressed_shape()));
    }
}

ProjectionModule ProjectionModule::selection_init(const Tensor& base, const KeptIndexSet* rows_kept,
                                                  const KeptIndexSet* cols_kept, bool with_residual) {
    if (base.rank() != 2) {
        throw DimensionError("selection_init: base must be a matrix");
    }
    Tensor p1, p2, residual;
    if (rows_kept) {
        rows_kept->validate();
        if (rows_kept->original_dim != base.dim(0)) {
            throw DimensionError("selection_init: row kept set over " +
                                 std::to_string(rows_kept->original_dim) + " does not match W " +
                                 shape_to_string(base.shape()));
        }
        p1 = Tensor::zeros({rows_kept->kept_dim(), base.dim(0)});
        auto d = p1.data_mut();
        for (std::size_t r = 0; r < rows_kept->kept_dim(); ++r) {
            d[r * base.dim(0) + rows_kept->indices[r]] = 1.0;
        }
    }
    if (cols_kept) {
        cols_kept->validate();
        if (cols_kept->original_dim != base.dim(1)) {
            throw DimensionError("selection_init: column kept set over " +
                                 std::to_string(cols_kept->original_dim) + " does not match W " +
                                 shape_to_string(base.shape()));
        }
        const std::size_t k = cols_kept->kept_dim();
        p2 = Tensor::zeros({base.dim(1), k});
        auto d = p2.data_mut();
        for (std::size_t c = 0; c < k; ++c) {
            d[cols_kept->indices[c] * k + c] = 1.0;
        }
    }
    if (with_residual) {
        residual = Tensor::zeros({rows_kept ? rows_kept->kept_dim() : base.dim(0),
                                  cols_kept ? cols_kept->kept_dim() : base.dim(1)});
    }
    return ProjectionModule(base, std::move(p1), std::move(p2), std::move(residual));
}

Tensor ProjectionModule::materialize() const {
    Tensor w = base_;
    if (p1_.defined()) {
        w = matmul(p1_, w);
    }
    if (p2_.defined()) {
        w = matmul(w, p2_);
    }
    if (residual_.defined()) {
        w = add(w, residual_);
    }
    return w;
}

Sides ProjectionModule::sides() const {
    if (p1_.defined() && p2_.defined()) {
        return Sides::both;
    }
    return p1_.defined() ? Sides::left : Sides::right;
}

Shape ProjectionModule::compressed_shape() const {
    return {p1_.defined() ? p1_.dim(0) : base_.dim(0), p2_.defined() ? p2_.dim(1) : base_.dim(1)};
}

std::vector<ParamRef> ProjectionModule::trainable(const std::string& prefix) const {
    std::vector<ParamRef> out;
    if (p1_.defined()) out.push_back({prefix + ".P1", p1_});
    if (p2_.defined()) out.push_back({prefix + ".P2", p2_});
    if (residual_.defined()) out.push_back({prefix + ".W_r", residual_});
    return out;
}

std::pair<Tensor, Tensor> projected_forward_equivalence(const Tensor& x,
                                                        const ProjectionModule& module) {
    const Shape cs = module.compressed_shape();
    if (x.rank() != 2 || x.dim(1) != cs[0]) {
        throw DimensionError("projected_forward_equivalence: x " + shape_to_string(x.shape()) +
                             " does not match compressed input width " + std::to_string(cs[0]));
    }
    Tensor lhs = matmul(x, module.materialize());
    Tensor rhs = x;
    if (module.p1().defined()) {
        rhs = matmul(rhs, module.p1());
    }
    rhs = matmul(rhs, module.base());
    if (module.p2().defined()) {
        rhs = matmul(rhs, module.p2());
    }
    if (module.has_residual()) {
        rhs = add(rhs, matmul(x, module.residual()));
    }
    return {std::move(lhs), std::move(rhs)};
}

// ---------------------------------------------------------------------------
// CompressionPlan

double CompressionPlan::width_ratio() const {
    return static_cast<double>(target_config.d_model) / static_cast<double>(source_config.d_model);
}

double CompressionPlan::ffn_ratio() const {
    return static_cast<double>(target_config.d_ff) / static_cast<double>(source_config.d_ff);
}

double CompressionPlan::param_reduction() const {
    return 1.0 - static_cast<double>(count_params(target_config)) /
                     static_cast<double>(count_params(source_config));
}

SiteAxes CompressionPlan::axes(const ParamName& name) const {
    const auto ffn = [&]() -> const KeptIndexSet* {
        if (!name.layer || *name.layer >= ffn_kept.size()) {
            throw IndexError("no FFN kept set for " + name.str());
        }
        return &ffn_kept[*name.layer];
    };
    switch (name.site) {
        case Site::tok_emb:
        case Site::pos_emb: return {nullptr, &width_kept};
        case Site::lm_head: return {&width_kept, nullptr};
        case Site::wq:
        case Site::wk:
        case Site::wv:
        case Site::wo: return {&width_kept, &width_kept};
        case Site::ff1: return {&width_kept, ffn()};
        case Site::ff2: return {ffn(), &width_kept};
        default: throw ConfigError(name.str() + " is not a matrix parameter");
    }
}

const KeptIndexSet& CompressionPlan::vector_kept(const ParamName& name) const {
    if (is_matrix_site(name.site)) {
        throw ConfigError(name.str() + " is not a vector parameter");
    }
    if (name.site == Site::ff1_bias) {
        if (!name.layer || *name.layer >= ffn_kept.size()) {
            throw IndexError("no FFN kept set for " + name.str());
        }
        return ffn_kept[*name.layer];
    }
    return width_kept;
}

Sides CompressionPlan::sides(const ParamName& name) const {
    for (const auto& [n, s] : site_map) {
        if (n == name) {
            return s;
        }
    }
    throw ConfigError("site map has no entry for " + name.str());
}

void CompressionPlan::validate() const {
    source_config.validate();
    target_config.validate();
    if (!(compression_level > 0.0 && compression_level < 1.0)) {
        throw ConfigError("compression level must lie in (0, 1), got " +
                          std::to_string(compression_level));
    }
    const ModelConfig& s = source_config;
    const ModelConfig& t = target_config;
    if (s.n_layers != t.n_layers || s.n_heads != t.n_heads || s.vocab_size != t.vocab_size ||
        s.seq_len != t.seq_len || s.layer_norm_eps != t.layer_norm_eps ||
        s.tied_embeddings != t.tied_embeddings) {
        throw ConfigError("plan target config may only differ from the source in d_model and d_ff");
    }
    width_kept.validate();
    if (width_kept.original_dim != s.d_model || width_kept.kept_dim() != t.d_model) {
        throw ConfigError("width kept set does not map d_model " + std::to_string(s.d_model) +
                          " -> " + std::to_string(t.d_model));
    }
    if (ffn_kept.size() != s.n_layers) {
        throw ConfigError("plan needs one FFN kept set per layer");
    }
    for (const auto& k : ffn_kept) {
        k.validate();
        if (k.original_dim != s.d_ff || k.kept_dim() != t.d_ff) {
            throw ConfigError("FFN kept set does not map d_ff " + std::to_string(s.d_ff) + " -> " +
                              std::to_string(t.d_ff));
        }
    }
    std::set<std::string> expected, seen;
    for (const auto& name : param_names(s)) {
        if (is_matrix_site(name.site)) {
            expected.insert(name.str());
        }
    }
    for (const auto& [name, sides] : site_map) {
        if (!expected.contains(name.str()) || !seen.insert(name.str()).second) {
            throw ConfigError("site map entry " + name.str() + " is unknown or duplicated");
        }
    }
    if (seen.size() != expected.size()) {
        throw ConfigError("site map does not cover every compressible matrix");
    }
}

std::size_t compressed_width(const ModelConfig& config, double level) {
    if (!(level > 0.0 && level < 1.0)) {
        throw ConfigError("compression level must lie in (0, 1), got " + std::to_string(level));
    }
    const auto rounded = static_cast<std::size_t>(std::llround((1.0 - level) * static_cast<double>(config.d_model)));
    const std::size_t width = rounded / config.n_heads * config.n_heads;
    if (width < config.n_heads) {
        throw ConfigError("over-compression: level " + std::to_string(level) + " leaves d_model " +
                          std::to_string(rounded) + " below n_heads " + std::to_string(config.n_heads));
    }
    return width;
}

std::size_t compressed_ffn(const ModelConfig& config, double level) {
    if (!(level > 0.0 && level < 1.0)) {
        throw ConfigError("compression level must lie in (0, 1), got " + std::to_string(level));
    }
    const auto ffn = static_cast<std::size_t>(std::llround((1.0 - level) * static_cast<double>(config.d_ff)));
    if (ffn == 0) {
        throw ConfigError("over-compression: level " + std::to_string(level) + " leaves no FFN channels");
    }
    return ffn;
}

std::vector<std::pair<ParamName, Sides>> default_site_map(const ModelConfig& config) {
    std::vector<std::pair<ParamName, Sides>> map;
    for (const auto& name : param_names(config)) {
        switch (name.site) {
            case Site::tok_emb:
            case Site::pos_emb: map.emplace_back(name, Sides::right); break;
            case Site::lm_head: map.emplace_back(name, Sides::left); break;
            case Site::wq:
            case Site::wk:
            case Site::wv:
            case Site::wo:
            case Site::ff1:
            case Site::ff2: map.emplace_back(name, Sides::both); break;
            default: break;
        }
    }
    return map;
}

CompressionPlan plan_compression(const ModelConfig& config, double level,
                                 const ImportanceScores& width_scores,
                                 const std::vector<ImportanceScores>& ffn_scores) {
    config.validate();
    const std::size_t width = compressed_width(config, level);
    const std::size_t ffn = compressed_ffn(config, level);
    if (width_scores.scores.size() != config.d_model) {
        throw ConfigError("width scores have " + std::to_string(width_scores.scores.size()) +
                          " entries, d_model is " + std::to_string(config.d_model));
    }
    if (ffn_scores.size() != config.n_layers) {
        throw ConfigError("need FFN scores for each of " + std::to_string(config.n_layers) + " layers");
    }
    CompressionPlan plan;
    plan.source_config = config;
    plan.target_config = config;
    plan.target_config.d_model = width;
    plan.target_config.d_ff = ffn;
    plan.compression_level = level;
    plan.width_kept = select_top_k(width_scores.scores, width);
    for (const auto& s : ffn_scores) {
        if (s.scores.size() != config.d_ff) {
            throw ConfigError("FFN scores do not match d_ff " + std::to_string(config.d_ff));
        }
        plan.ffn_kept.push_back(select_top_k(s.scores, ffn));
    }
    plan.site_map = default_site_map(config);
    plan.importance = width_scores.method;
    plan.importance_seed = width_scores.seed;
    plan.validate();
    return plan;
}

CompressionPlan plan_from_model(const TransformerWeights& weights, const ModelConfig& config,
                                double level, ImportanceMethod method, std::uint64_t seed) {
    const ModelImportance scores = score_model(weights, config, method, seed);
    CompressionPlan plan = plan_compression(config, level, scores.width, scores.ffn);
    plan.importance = method;
    plan.importance_seed = seed;
    return plan;
}

// ---------------------------------------------------------------------------
// ProjectedModel

namespace {

const KeptIndexSet* side_rows(Sides s, const SiteAxes& ax) {
    return s == Sides::left || s == Sides::both ? ax.in : nullptr;
}

const KeptIndexSet* side_cols(Sides s, const SiteAxes& ax) {
    return s == Sides::right || s == Sides::both ? ax.out : nullptr;
}

void check_module_shapes(const CompressionPlan& plan,
                         const std::vector<std::pair<ParamName, ProjectionModule>>& modules) {
    if (modules.size() != plan.site_map.size()) {
        throw ConfigError("projected model needs one module per site map entry");
    }
    for (const auto& [name, module] : modules) {
        module.validate();
        if (module.base().shape() != param_shape(plan.source_config, name)) {
            throw DimensionError("frozen base of " + name.str() + " does not match the source config");
        }
        const Shape expected = param_shape(plan.target_config, name);
        if (module.compressed_shape() != expected) {
            throw ConfigError("site " + name.str() + " with sides '" + to_string(module.sides()) +
                              "' materializes " + shape_to_string(module.compressed_shape()) +
                              ", target needs " + shape_to_string(expected));
        }
    }
}

}  // namespace

ProjectedModel::ProjectedModel(const TransformerWeights& base, CompressionPlan plan, bool with_residual)
    : plan_(std::move(plan)) {
    plan_.validate();
    check_weights(base, plan_.source_config);
    base_ = base.clone(plan_.source_config, false);
    for (const auto& [name, sides] : plan_.site_map) {
        const SiteAxes ax = plan_.axes(name);
        modules_.emplace_back(name, ProjectionModule::selection_init(
                                        base_.get(name), side_rows(sides, ax), side_cols(sides, ax),
                                        with_residual));
    }
    vectors_.layers.resize(plan_.target_config.n_layers);
    for (const auto& name : param_names(plan_.source_config)) {
        if (!is_matrix_site(name.site)) {
            Tensor v = slice_vector(base_.get(name), plan_.vector_kept(name));
            v.set_requires_grad(true);
            vectors_.get(name) = std::move(v);
        }
    }
    check_module_shapes(plan_, modules_);
}

ProjectedModel::ProjectedModel(TransformerWeights base, CompressionPlan plan,
                               std::vector<std::pair<ParamName, ProjectionModule>> modules,
                               TransformerWeights vectors)
    : base_(std::move(base)), plan_(std::move(plan)), modules_(std::move(modules)),
      vectors_(std::move(vectors)) {
    plan_.validate();
    check_weights(base_, plan_.source_config);
    base_.set_requires_grad(plan_.source_config, false);
    check_module_shapes(plan_, modules_);
    for (const auto& name : param_names(plan_.target_config)) {
        if (!is_matrix_site(name.site)) {
            Tensor& v = vectors_.get(name);
            if (!v.defined() || v.shape() != param_shape(plan_.target_config, name)) {
                throw DimensionError("sliced vector " + name.str() + " is missing or mis-shaped");
            }
            v.set_requires_grad(true);
        }
    }
}

bool ProjectedModel::with_residual() const {
    return !modules_.empty() && modules_.front().second.has_residual();
}

TransformerWeights ProjectedModel::materialize() const {
    TransformerWeights w;
    w.layers.resize(plan_.target_config.n_layers);
    for (const auto& [name, module] : modules_) {
        w.get(name) = module.materialize();
    }
    for (const auto& name : param_names(plan_.target_config)) {
        if (!is_matrix_site(name.site)) {
            w.get(name) = vectors_.get(name);
        }
    }
    return w;
}

Tensor ProjectedModel::forward(std::span<const TokenId> inputs, std::size_t batch, std::size_t seq) {
    const TransformerWeights w = materialize();
    return projcomp::forward(w, plan_.target_config, inputs, batch, seq);
}

std::vector<ParamRef> ProjectedModel::trainable() const {
    std::vector<ParamRef> out;
    for (const auto& [name, module] : modules_) {
        for (auto& p : module.trainable(name.str())) {
            out.push_back(std::move(p));
        }
    }
    for (const auto& name : param_names(plan_.target_config)) {
        if (!is_matrix_site(name.site)) {
            out.push_back({name.str(), vectors_.get(name)});
        }
    }
    return out;
}

std::vector<ParamRef> ProjectedModel::frozen() const {
    std::vector<ParamRef> out;
    for (const auto& nt : base_.named(plan_.source_config)) {
        out.push_back({"base." + nt.name.str(), nt.tensor});
    }
    return out;
}

ProjectedModel attach_projections(const TransformerWeights& base, const CompressionPlan& plan,
                                  bool with_residual) {
    return ProjectedModel(base, plan, with_residual);
}

std::pair<ModelConfig, TransformerWeights> export_compressed(const ProjectedModel& projected) {
    NoTapeScope no_tape;
    const ModelConfig& target = projected.plan().target_config;
    const TransformerWeights w = projected.materialize();
    TransformerWeights out = w.clone(target, true);
    check_weights(out, target);
    return {target, std::move(out)};
}

}  // namespace projcomp
