// Copyright 2026 The projcomp Authors
// SPDX-License-Identifier: Apache-2.0

#include "projcomp/hard_pruning.hpp"

namespace projcomp {

Tensor slice_matrix(const Tensor& m, const KeptIndexSet* rows, const KeptIndexSet* cols) {
    if (m.rank() != 2) {
        throw DimensionError("slice_matrix: expected a matrix, got " + shape_to_string(m.shape()));
    }
    const std::size_t r = m.dim(0), c = m.dim(1);
    if ((rows && rows->original_dim != r) || (cols && cols->original_dim != c)) {
        throw DimensionError("slice_matrix: kept sets do not match matrix " + shape_to_string(m.shape()));
    }
    const std::size_t out_r = rows ? rows->kept_dim() : r;
    const std::size_t out_c = cols ? cols->kept_dim() : c;
    std::vector<double> out(out_r * out_c);
    const auto src = m.data();
    for (std::size_t i = 0; i < out_r; ++i) {
        const std::size_t si = rows ? rows->indices[i] : i;
        for (std::size_t j = 0; j < out_c; ++j) {
            const std::size_t sj = cols ? cols->indices[j] : j;
            out[i * out_c + j] = src[si * c + sj];
        }
    }
    return Tensor::from_data({out_r, out_c}, std::move(out));
}

Tensor slice_vector(const Tensor& v, const KeptIndexSet& kept) {
    if (v.rank() != 1 || v.dim(0) != kept.original_dim) {
        throw DimensionError("slice_vector: kept set over " + std::to_string(kept.original_dim) +
                             " does not match " + shape_to_string(v.shape()));
    }
    std::vector<double> out(kept.kept_dim());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = v.data()[kept.indices[i]];
    }
    const std::size_t n = out.size();
    return Tensor::from_data({n}, std::move(out));
}

std::pair<ModelConfig, TransformerWeights> hard_prune(const TransformerWeights& base,
                                                      const CompressionPlan& plan) {
    plan.validate();
    check_weights(base, plan.source_config);
    TransformerWeights out;
    out.layers.resize(plan.target_config.n_layers);
    for (const auto& name : param_names(plan.source_config)) {
        const Tensor& src = base.get(name);
        Tensor sliced;
        if (is_matrix_site(name.site)) {
            const SiteAxes ax = plan.axes(name);
            sliced = slice_matrix(src, ax.in, ax.out);
        } else {
            sliced = slice_vector(src, plan.vector_kept(name));
        }
        sliced.set_requires_grad(true);
        out.get(name) = std::move(sliced);
    }
    check_weights(out, plan.target_config);
    return {plan.target_config, std::move(out)};
}

}  // namespace projcomp
