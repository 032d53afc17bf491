// Copyright 2026 The projcomp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>

#include "projcomp/tensor.hpp"

// Differentiable operations. Each op computes its result eagerly and, when
// a tape is active on this thread and any input requires a gradient,
// records its backward rule. Gradients accumulate additively.

namespace projcomp {

/// sqrt(2/pi), the GELU tanh-approximation constant.
inline constexpr double kGeluScale = 0.7978845608028654;
inline constexpr double kGeluCubic = 0.044715;
/// Value written into masked attention scores; exp underflows to exactly 0.
inline constexpr double kMaskFill = -1e30;

/// a[..., k] · b[k, n] -> [..., n]. Leading axes of `a` are flattened into rows.
Tensor matmul(const Tensor& a, const Tensor& b);
/// Batched a[N, m, k] · b[N, k, n] -> [N, m, n].
Tensor bmm(const Tensor& a, const Tensor& b);
/// Swaps the last two axes of a rank-2 or rank-3 tensor.
Tensor transpose(const Tensor& x);
Tensor reshape(const Tensor& x, Shape shape);

Tensor add(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& x, double factor);
/// x[..., n] + bias[n], broadcast over leading axes.
Tensor add_row(const Tensor& x, const Tensor& bias);
/// Sum of all elements as a [1] tensor.
Tensor sum(const Tensor& x);

/// 0.5·x·(1 + tanh(sqrt(2/pi)·(x + 0.044715·x³)))
Tensor gelu(const Tensor& x);
Tensor softmax(const Tensor& x);
Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, double eps);

/// Gathers rows of table[V, d] -> ids_shape + [d].
Tensor embedding(std::span<const TokenId> ids, const Shape& ids_shape, const Tensor& table);
/// For scores[N, S, S], sets entries with column > row to `fill`.
Tensor causal_mask_fill(const Tensor& scores, double fill = kMaskFill);

/// [B, S, H·hd] -> [B·H, S, hd]
Tensor split_heads(const Tensor& x, std::size_t n_heads);
/// [B·H, S, hd] -> [B, S, H·hd]
Tensor merge_heads(const Tensor& x, std::size_t batch);

/// Mean over rows of -log softmax(logits)[target]; logits[..., V], one target per row.
Tensor cross_entropy(const Tensor& logits, std::span<const TokenId> targets);

}  // namespace projcomp
