// Copyright 2026 The projcomp Authors
// SPDX-License-Identifier: Apache-2.0

#include "projcomp/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "projcomp/kernels/kernels.hpp"

namespace projcomp {

using detail::TensorImpl;
using ImplPtr = std::shared_ptr<TensorImpl>;

namespace {

bool tracking(std::initializer_list<const Tensor*> inputs) {
    if (current_tape() == nullptr) {
        return false;
    }
    for (const Tensor* t : inputs) {
        if (t->requires_grad()) {
            return true;
        }
    }
    return false;
}

Tensor finish(Tensor out, std::string_view op) {
    check_finite(out, op);
    return out;
}

void record(std::string_view op, const Tensor& out, Tape::BackwardFn fn) {
    current_tape()->record(op, out.impl(), std::move(fn));
}

void require_same_shape(const Tensor& a, const Tensor& b, std::string_view op) {
    if (a.shape() != b.shape()) {
        throw DimensionError(std::string(op) + ": shape mismatch " + shape_to_string(a.shape()) +
                             " vs " + shape_to_string(b.shape()));
    }
}

std::size_t last_dim(const Tensor& x) { return x.shape().back(); }

}  // namespace

// ---------------------------------------------------------------------------
// Products

Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.rank() < 2 || b.rank() != 2 || last_dim(a) != b.dim(0)) {
        throw DimensionError("matmul: inner dimensions disagree for " + shape_to_string(a.shape()) +
                             " x " + shape_to_string(b.shape()));
    }
    const std::size_t k = b.dim(0);
    const std::size_t n = b.dim(1);
    const std::size_t m = a.numel() / k;
    Shape out_shape = a.shape();
    out_shape.back() = n;
    Tensor out = Tensor::zeros(out_shape);
    kernels::gemm(m, n, k, a.data().data(), b.data().data(), out.data_mut().data());
    count_matmul_flops(2ULL * m * k * n, false);
    if (tracking({&a, &b})) {
        ImplPtr ai = a.impl(), bi = b.impl(), oi = out.impl();
        record("matmul", out, [ai, bi, oi, m, n, k] {
            const double* dc = oi->grad.data();
            if (ai->requires_grad) {
                // dA[m×k] += dC[m×n]·Bᵀ[n×k]
                std::vector<double> bt(n * k);
                kernels::transpose(k, n, bi->data.data(), bt.data());
                kernels::gemm(m, k, n, dc, bt.data(), ai->grad_buffer().data(), true);
                count_matmul_flops(2ULL * m * k * n, true);
            }
            if (bi->requires_grad) {
                // dB[k×n] += Aᵀ[k×m]·dC[m×n]
                std::vector<double> at(m * k);
                kernels::transpose(m, k, ai->data.data(), at.data());
                kernels::gemm(k, n, m, at.data(), dc, bi->grad_buffer().data(), true);
                count_matmul_flops(2ULL * m * k * n, true);
            }
        });
    }
    return finish(out, "matmul");
}

Tensor bmm(const Tensor& a, const Tensor& b) {
    if (a.rank() != 3 || b.rank() != 3 || a.dim(0) != b.dim(0) || a.dim(2) != b.dim(1)) {
        throw DimensionError("bmm: incompatible shapes " + shape_to_string(a.shape()) + " x " +
                             shape_to_string(b.shape()));
    }
    const std::size_t batch = a.dim(0), m = a.dim(1), k = a.dim(2), n = b.dim(2);
    Tensor out = Tensor::zeros({batch, m, n});
    {
        const double* ad = a.data().data();
        const double* bd = b.data().data();
        double* od = out.data_mut().data();
        for (std::size_t p = 0; p < batch; ++p) {
            kernels::gemm(m, n, k, ad + p * m * k, bd + p * k * n, od + p * m * n);
        }
    }
    count_matmul_flops(2ULL * batch * m * k * n, false);
    if (tracking({&a, &b})) {
        ImplPtr ai = a.impl(), bi = b.impl(), oi = out.impl();
        record("bmm", out, [ai, bi, oi, batch, m, n, k] {
            const double* dc = oi->grad.data();
            if (ai->requires_grad) {
                std::vector<double> bt(n * k);
                double* ga = ai->grad_buffer().data();
                for (std::size_t p = 0; p < batch; ++p) {
                    kernels::transpose(k, n, bi->data.data() + p * k * n, bt.data());
                    kernels::gemm(m, k, n, dc + p * m * n, bt.data(), ga + p * m * k, true);
                }
                count_matmul_flops(2ULL * batch * m * k * n, true);
            }
            if (bi->requires_grad) {
                std::vector<double> at(m * k);
                double* gb = bi->grad_buffer().data();
                for (std::size_t p = 0; p < batch; ++p) {
                    kernels::transpose(m, k, ai->data.data() + p * m * k, at.data());
                    kernels::gemm(k, n, m, at.data(), dc + p * m * n, gb + p * k * n, true);
                }
                count_matmul_flops(2ULL * batch * m * k * n, true);
            }
        });
    }
    return finish(out, "bmm");
}

Tensor transpose(const Tensor& x) {
    if (x.rank() != 2 && x.rank() != 3) {
        throw DimensionError("transpose: expected rank 2 or 3, got " + shape_to_string(x.shape()));
    }
    const std::size_t batch = x.rank() == 3 ? x.dim(0) : 1;
    const std::size_t m = x.dim(x.rank() - 2), n = x.dim(x.rank() - 1);
    Shape out_shape = x.shape();
    std::swap(out_shape[out_shape.size() - 2], out_shape[out_shape.size() - 1]);
    Tensor out = Tensor::zeros(out_shape);
    for (std::size_t p = 0; p < batch; ++p) {
        kernels::transpose(m, n, x.data().data() + p * m * n, out.data_mut().data() + p * m * n);
    }
    if (tracking({&x})) {
        ImplPtr xi = x.impl(), oi = out.impl();
        record("transpose", out, [xi, oi, batch, m, n] {
            std::vector<double> tmp(m * n);
            auto& gx = xi->grad_buffer();
            for (std::size_t p = 0; p < batch; ++p) {
                kernels::transpose(n, m, oi->grad.data() + p * m * n, tmp.data());
                for (std::size_t i = 0; i < m * n; ++i) {
                    gx[p * m * n + i] += tmp[i];
                }
            }
        });
    }
    return out;
}

Tensor reshape(const Tensor& x, Shape shape) {
    if (shape_numel(shape) != x.numel()) {
        throw DimensionError("reshape: cannot view " + shape_to_string(x.shape()) + " as " +
                             shape_to_string(shape));
    }
    Tensor out = Tensor::from_data(std::move(shape), std::vector<double>(x.data().begin(), x.data().end()));
    if (tracking({&x})) {
        ImplPtr xi = x.impl(), oi = out.impl();
        record("reshape", out, [xi, oi] { xi->accumulate_grad(oi->grad); });
    }
    return out;
}

// ---------------------------------------------------------------------------
// Elementwise

Tensor add(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "add");
    Tensor out = Tensor::zeros(a.shape());
    auto o = out.data_mut();
    const auto ad = a.data(), bd = b.data();
    for (std::size_t i = 0; i < o.size(); ++i) {
        o[i] = ad[i] + bd[i];
    }
    if (tracking({&a, &b})) {
        ImplPtr ai = a.impl(), bi = b.impl(), oi = out.impl();
        record("add", out, [ai, bi, oi] {
            if (ai->requires_grad) {
                ai->accumulate_grad(oi->grad);
            }
            if (bi->requires_grad) {
                bi->accumulate_grad(oi->grad);
            }
        });
    }
    return finish(out, "add");
}

Tensor mul(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "mul");
    Tensor out = Tensor::zeros(a.shape());
    auto o = out.data_mut();
    const auto ad = a.data(), bd = b.data();
    for (std::size_t i = 0; i < o.size(); ++i) {
        o[i] = ad[i] * bd[i];
    }
    if (tracking({&a, &b})) {
        ImplPtr ai = a.impl(), bi = b.impl(), oi = out.impl();
        record("mul", out, [ai, bi, oi] {
            const auto& g = oi->grad;
            if (ai->requires_grad) {
                auto& ga = ai->grad_buffer();
                for (std::size_t i = 0; i < g.size(); ++i) {
                    ga[i] += g[i] * bi->data[i];
                }
            }
            if (bi->requires_grad) {
                auto& gb = bi->grad_buffer();
                for (std::size_t i = 0; i < g.size(); ++i) {
                    gb[i] += g[i] * ai->data[i];
                }
            }
        });
    }
    return finish(out, "mul");
}

Tensor scale(const Tensor& x, double factor) {
    Tensor out = Tensor::zeros(x.shape());
    auto o = out.data_mut();
    const auto xd = x.data();
    for (std::size_t i = 0; i < o.size(); ++i) {
        o[i] = xd[i] * factor;
    }
    if (tracking({&x})) {
        ImplPtr xi = x.impl(), oi = out.impl();
        record("scale", out, [xi, oi, factor] {
            kernels::axpy(factor, oi->grad.data(), xi->grad_buffer().data(), oi->grad.size());
        });
    }
    return finish(out, "scale");
}

Tensor add_row(const Tensor& x, const Tensor& bias) {
    if (bias.rank() != 1 || bias.dim(0) != last_dim(x)) {
        throw DimensionError("add_row: bias " + shape_to_string(bias.shape()) +
                             " does not match last axis of " + shape_to_string(x.shape()));
    }
    const std::size_t n = bias.dim(0);
    const std::size_t rows = x.numel() / n;
    Tensor out = Tensor::zeros(x.shape());
    auto o = out.data_mut();
    const auto xd = x.data(), bd = bias.data();
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t j = 0; j < n; ++j) {
            o[r * n + j] = xd[r * n + j] + bd[j];
        }
    }
    if (tracking({&x, &bias})) {
        ImplPtr xi = x.impl(), bi = bias.impl(), oi = out.impl();
        record("add_row", out, [xi, bi, oi, rows, n] {
            const auto& g = oi->grad;
            if (xi->requires_grad) {
                xi->accumulate_grad(g);
            }
            if (bi->requires_grad) {
                auto& gb = bi->grad_buffer();
                for (std::size_t r = 0; r < rows; ++r) {
                    for (std::size_t j = 0; j < n; ++j) {
                        gb[j] += g[r * n + j];
                    }
                }
            }
        });
    }
    return finish(out, "add_row");
}

Tensor sum(const Tensor& x) {
    double s = 0.0;
    for (double v : x.data()) {
        s += v;
    }
    Tensor out = Tensor::scalar(s);
    if (tracking({&x})) {
        ImplPtr xi = x.impl(), oi = out.impl();
        record("sum", out, [xi, oi] {
            const double g = oi->grad[0];
            for (double& v : xi->grad_buffer()) {
                v += g;
            }
        });
    }
    return finish(out, "sum");
}

Tensor gelu(const Tensor& x) {
    Tensor out = Tensor::zeros(x.shape());
    auto o = out.data_mut();
    const auto xd = x.data();
    for (std::size_t i = 0; i < o.size(); ++i) {
        const double v = xd[i];
        o[i] = 0.5 * v * (1.0 + std::tanh(kGeluScale * (v + kGeluCubic * v * v * v)));
    }
    if (tracking({&x})) {
        ImplPtr xi = x.impl(), oi = out.impl();
        record("gelu", out, [xi, oi] {
            auto& gx = xi->grad_buffer();
            for (std::size_t i = 0; i < gx.size(); ++i) {
                const double v = xi->data[i];
                const double t = std::tanh(kGeluScale * (v + kGeluCubic * v * v * v));
                const double dinner = kGeluScale * (1.0 + 3.0 * kGeluCubic * v * v);
                gx[i] += oi->grad[i] * (0.5 * (1.0 + t) + 0.5 * v * (1.0 - t * t) * dinner);
            }
        });
    }
    return finish(out, "gelu");
}

Tensor softmax(const Tensor& x) {
    const std::size_t n = last_dim(x);
    const std::size_t rows = x.numel() / n;
    Tensor out = Tensor::zeros(x.shape());
    auto o = out.data_mut();
    const auto xd = x.data();
    for (std::size_t r = 0; r < rows; ++r) {
        const double* in = xd.data() + r * n;
        double* y = o.data() + r * n;
        const double mx = *std::max_element(in, in + n);
        double z = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            y[j] = std::exp(in[j] - mx);
            z += y[j];
        }
        for (std::size_t j = 0; j < n; ++j) {
            y[j] /= z;
        }
    }
    if (tracking({&x})) {
        ImplPtr xi = x.impl(), oi = out.impl();
        record("softmax", out, [xi, oi, rows, n] {
            auto& gx = xi->grad_buffer();
            for (std::size_t r = 0; r < rows; ++r) {
                const double* y = oi->data.data() + r * n;
                const double* gy = oi->grad.data() + r * n;
                double inner = 0.0;
                for (std::size_t j = 0; j < n; ++j) {
                    inner += gy[j] * y[j];
                }
                for (std::size_t j = 0; j < n; ++j) {
                    gx[r * n + j] += y[j] * (gy[j] - inner);
                }
            }
        });
    }
    return finish(out, "softmax");
}

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, double eps) {
    const std::size_t n = last_dim(x);
    if (gain.rank() != 1 || bias.rank() != 1 || gain.dim(0) != n || bias.dim(0) != n) {
        throw DimensionError("layer_norm: gain " + shape_to_string(gain.shape()) + " / bias " +
                             shape_to_string(bias.shape()) + " must match last axis of " +
                             shape_to_string(x.shape()));
    }
    const std::size_t rows = x.numel() / n;
    Tensor out = Tensor::zeros(x.shape());
    std::vector<double> xhat(x.numel());
    std::vector<double> rstd(rows);
    auto o = out.data_mut();
    const auto xd = x.data(), gd = gain.data(), bd = bias.data();
    for (std::size_t r = 0; r < rows; ++r) {
        const double* in = xd.data() + r * n;
        double mean = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            mean += in[j];
        }
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double c = in[j] - mean;
            var += c * c;
        }
        var /= static_cast<double>(n);
        rstd[r] = 1.0 / std::sqrt(var + eps);
        for (std::size_t j = 0; j < n; ++j) {
            const double h = (in[j] - mean) * rstd[r];
            xhat[r * n + j] = h;
            o[r * n + j] = h * gd[j] + bd[j];
        }
    }
    if (tracking({&x, &gain, &bias})) {
        ImplPtr xi = x.impl(), gi = gain.impl(), bi = bias.impl(), oi = out.impl();
        record("layer_norm", out,
               [xi, gi, bi, oi, rows, n, xhat = std::move(xhat), rstd = std::move(rstd)] {
                   const auto& gy = oi->grad;
                   if (gi->requires_grad) {
                       auto& gg = gi->grad_buffer();
                       for (std::size_t r = 0; r < rows; ++r) {
                           for (std::size_t j = 0; j < n; ++j) {
                               gg[j] += gy[r * n + j] * xhat[r * n + j];
                           }
                       }
                   }
                   if (bi->requires_grad) {
                       auto& gb = bi->grad_buffer();
                       for (std::size_t r = 0; r < rows; ++r) {
                           for (std::size_t j = 0; j < n; ++j) {
                               gb[j] += gy[r * n + j];
                           }
                       }
                   }
                   if (xi->requires_grad) {
                       auto& gx = xi->grad_buffer();
                       const double inv_n = 1.0 / static_cast<double>(n);
                       for (std::size_t r = 0; r < rows; ++r) {
                           double mean_d = 0.0, mean_dx = 0.0;
                           for (std::size_t j = 0; j < n; ++j) {
                               const double d = gy[r * n + j] * gi->data[j];
                               mean_d += d;
                               mean_dx += d * xhat[r * n + j];
                           }
                           mean_d *= inv_n;
                           mean_dx *= inv_n;
                           for (std::size_t j = 0; j < n; ++j) {
                               const double d = gy[r * n + j] * gi->data[j];
                               gx[r * n + j] += rstd[r] * (d - mean_d - xhat[r * n + j] * mean_dx);
                           }
                       }
                   }
               });
    }
    return finish(out, "layer_norm");
}

// ---------------------------------------------------------------------------
// Indexing and layout

Tensor embedding(std::span<const TokenId> ids, const Shape& ids_shape, const Tensor& table) {
    if (table.rank() != 2) {
        throw DimensionError("embedding: table must be rank 2, got " + shape_to_string(table.shape()));
    }
    if (shape_numel(ids_shape) != ids.size()) {
        throw DimensionError("embedding: ids shape " + shape_to_string(ids_shape) +
                             " does not match " + std::to_string(ids.size()) + " ids");
    }
    const std::size_t vocab = table.dim(0), d = table.dim(1);
    for (TokenId id : ids) {
        if (id < 0 || static_cast<std::size_t>(id) >= vocab) {
            throw IndexError("embedding: id " + std::to_string(id) + " out of range for table of " +
                             std::to_string(vocab) + " rows");
        }
    }
    Shape out_shape = ids_shape;
    out_shape.push_back(d);
    Tensor out = Tensor::zeros(out_shape);
    auto o = out.data_mut();
    const auto td = table.data();
    for (std::size_t i = 0; i < ids.size(); ++i) {
        std::copy_n(td.data() + static_cast<std::size_t>(ids[i]) * d, d, o.data() + i * d);
    }
    if (tracking({&table})) {
        ImplPtr ti = table.impl(), oi = out.impl();
        std::vector<TokenId> ids_copy(ids.begin(), ids.end());
        record("embedding", out, [ti, oi, d, ids_copy = std::move(ids_copy)] {
            auto& gt = ti->grad_buffer();
            for (std::size_t i = 0; i < ids_copy.size(); ++i) {
                const std::size_t row = static_cast<std::size_t>(ids_copy[i]);
                for (std::size_t j = 0; j < d; ++j) {
                    gt[row * d + j] += oi->grad[i * d + j];
                }
            }
        });
    }
    return finish(out, "embedding");
}

Tensor causal_mask_fill(const Tensor& scores, double fill) {
    if (scores.rank() != 3 || scores.dim(1) != scores.dim(2)) {
        throw DimensionError("causal_mask_fill: expected [N, S, S], got " +
                             shape_to_string(scores.shape()));
    }
    const std::size_t batch = scores.dim(0), s = scores.dim(1);
    Tensor out = scores.detach();
    auto o = out.data_mut();
    for (std::size_t p = 0; p < batch; ++p) {
        for (std::size_t i = 0; i < s; ++i) {
            for (std::size_t j = i + 1; j < s; ++j) {
                o[(p * s + i) * s + j] = fill;
            }
        }
    }
    if (tracking({&scores})) {
        ImplPtr xi = scores.impl(), oi = out.impl();
        record("causal_mask_fill", out, [xi, oi, batch, s] {
            auto& gx = xi->grad_buffer();
            for (std::size_t p = 0; p < batch; ++p) {
                for (std::size_t i = 0; i < s; ++i) {
                    for (std::size_t j = 0; j <= i; ++j) {
                        gx[(p * s + i) * s + j] += oi->grad[(p * s + i) * s + j];
                    }
                }
            }
        });
    }
    return finish(out, "causal_mask_fill");
}

namespace {

// Index of element (b, s, h, e) in the merged [B, S, H·hd] layout and in
// the split [B·H, S, hd] layout.
template <typename Fn>
void for_each_head_element(std::size_t batch, std::size_t seq, std::size_t heads,
                           std::size_t head_dim, Fn&& fn) {
    const std::size_t d = heads * head_dim;
    for (std::size_t b = 0; b < batch; ++b) {
        for (std::size_t s = 0; s < seq; ++s) {
            for (std::size_t h = 0; h < heads; ++h) {
                const std::size_t merged = (b * seq + s) * d + h * head_dim;
                const std::size_t split = ((b * heads + h) * seq + s) * head_dim;
                fn(merged, split);
            }
        }
    }
}

}  // namespace

Tensor split_heads(const Tensor& x, std::size_t n_heads) {
    if (x.rank() != 3 || n_heads == 0 || x.dim(2) % n_heads != 0) {
        throw DimensionError("split_heads: " + shape_to_string(x.shape()) +
                             " cannot be split into " + std::to_string(n_heads) + " heads");
    }
    const std::size_t batch = x.dim(0), seq = x.dim(1), hd = x.dim(2) / n_heads;
    Tensor out = Tensor::zeros({batch * n_heads, seq, hd});
    auto o = out.data_mut();
    const auto xd = x.data();
    for_each_head_element(batch, seq, n_heads, hd, [&](std::size_t merged, std::size_t split) {
        std::copy_n(xd.data() + merged, hd, o.data() + split);
    });
    if (tracking({&x})) {
        ImplPtr xi = x.impl(), oi = out.impl();
        record("split_heads", out, [xi, oi, batch, seq, n_heads, hd] {
            auto& gx = xi->grad_buffer();
            for_each_head_element(batch, seq, n_heads, hd, [&](std::size_t merged, std::size_t split) {
                for (std::size_t e = 0; e < hd; ++e) {
                    gx[merged + e] += oi->grad[split + e];
                }
            });
        });
    }
    return out;
}

Tensor merge_heads(const Tensor& x, std::size_t batch) {
    if (x.rank() != 3 || batch == 0 || x.dim(0) % batch != 0) {
        throw DimensionError("merge_heads: " + shape_to_string(x.shape()) +
                             " is not a whole number of heads for batch " + std::to_string(batch));
    }
    const std::size_t heads = x.dim(0) / batch, seq = x.dim(1), hd = x.dim(2);
    Tensor out = Tensor::zeros({batch, seq, heads * hd});
    auto o = out.data_mut();
    const auto xd = x.data();
    for_each_head_element(batch, seq, heads, hd, [&](std::size_t merged, std::size_t split) {
        std::copy_n(xd.data() + split, hd, o.data() + merged);
    });
    if (tracking({&x})) {
        ImplPtr xi = x.impl(), oi = out.impl();
        record("merge_heads", out, [xi, oi, batch, seq, heads, hd] {
            auto& gx = xi->grad_buffer();
            for_each_head_element(batch, seq, heads, hd, [&](std::size_t merged, std::size_t split) {
                for (std::size_t e = 0; e < hd; ++e) {
                    gx[split + e] += oi->grad[merged + e];
                }
            });
        });
    }
    return out;
}

// ---------------------------------------------------------------------------
// Loss

Tensor cross_entropy(const Tensor& logits, std::span<const TokenId> targets) {
    const std::size_t vocab = last_dim(logits);
    const std::size_t rows = logits.numel() / vocab;
    if (targets.size() != rows) {
        throw DimensionError("cross_entropy: " + std::to_string(targets.size()) +
                             " targets for logits " + shape_to_string(logits.shape()));
    }
    for (TokenId t : targets) {
        if (t < 0 || static_cast<std::size_t>(t) >= vocab) {
            throw IndexError("cross_entropy: target id " + std::to_string(t) +
                             " out of range for vocabulary of " + std::to_string(vocab));
        }
    }
    const auto ld = logits.data();
    std::vector<double> lse(rows);
    double total = 0.0;
    for (std::size_t r = 0; r < rows; ++r) {
        const double* row = ld.data() + r * vocab;
        const double mx = *std::max_element(row, row + vocab);
        double z = 0.0;
        for (std::size_t j = 0; j < vocab; ++j) {
            z += std::exp(row[j] - mx);
        }
        lse[r] = mx + std::log(z);
        total += lse[r] - row[static_cast<std::size_t>(targets[r])];
    }
    Tensor out = Tensor::scalar(total / static_cast<double>(rows));
    if (tracking({&logits})) {
        ImplPtr li = logits.impl(), oi = out.impl();
        std::vector<TokenId> tcopy(targets.begin(), targets.end());
        record("cross_entropy", out, [li, oi, rows, vocab, lse = std::move(lse), tcopy = std::move(tcopy)] {
            const double g = oi->grad[0] / static_cast<double>(rows);
            auto& gl = li->grad_buffer();
            for (std::size_t r = 0; r < rows; ++r) {
                const double* row = li->data.data() + r * vocab;
                double* grow = gl.data() + r * vocab;
                for (std::size_t j = 0; j < vocab; ++j) {
                    grow[j] += g * std::exp(row[j] - lse[r]);
                }
                grow[static_cast<std::size_t>(tcopy[r])] -= g;
            }
        });
    }
    return finish(out, "cross_entropy");
}

}  // namespace projcomp
