// Copyright 2026 The projcomp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <utility>

#include "projcomp/projection.hpp"

namespace projcomp {

/// Keeps rows in `rows` and columns in `cols` (null keeps the whole axis).
Tensor slice_matrix(const Tensor& m, const KeptIndexSet* rows, const KeptIndexSet* cols);
Tensor slice_vector(const Tensor& v, const KeptIndexSet& kept);

/// Structured slice of every parameter on its compressed axes. All
/// resulting parameters are trainable leaves.
std::pair<ModelConfig, TransformerWeights> hard_prune(const TransformerWeights& base,
                                                      const CompressionPlan& plan);

}  // namespace projcomp
