// Copyright 2026 The projcomp Authors
// SPDX-License-Identifier: Apache-2.0

// Portable reference kernels. Built without FMA so every product and sum
// rounds separately; the loop order fixes the per-element summation order.

#include <cmath>
#include <vector>

#include "projcomp/kernels/kernels.hpp"

namespace projcomp::kernels {
namespace {

void gemm_scalar(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
                 double* c, bool accumulate) {
    std::vector<double> row(n);
    for (std::size_t i = 0; i < m; ++i) {
        std::fill(row.begin(), row.end(), 0.0);
        const double* a_row = a + i * k;
        for (std::size_t t = 0; t < k; ++t) {
            const double a_it = a_row[t];
            const double* b_row = b + t * n;
            for (std::size_t j = 0; j < n; ++j) {
                row[j] += a_it * b_row[j];
            }
        }
        double* c_row = c + i * n;
        if (accumulate) {
            for (std::size_t j = 0; j < n; ++j) {
                c_row[j] += row[j];
            }
        } else {
            std::copy(row.begin(), row.end(), c_row);
        }
    }
}

double dot_scalar(const double* x, const double* y, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        s += x[i] * y[i];
    }
    return s;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        y[i] += alpha * x[i];
    }
}

double sum_squares_scalar(const double* x, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        s += x[i] * x[i];
    }
    return s;
}

void adamw_scalar(double* param, const double* grad, double* m, double* v, std::size_t n,
                  const AdamWCoeffs& cf) {
    const double decay = 1.0 - cf.lr * cf.weight_decay;
    const double one_minus_b1 = 1.0 - cf.beta1;
    const double one_minus_b2 = 1.0 - cf.beta2;
    for (std::size_t i = 0; i < n; ++i) {
        const double g = grad[i];
        m[i] = cf.beta1 * m[i] + one_minus_b1 * g;
        v[i] = cf.beta2 * v[i] + one_minus_b2 * (g * g);
        const double m_hat = m[i] / cf.bias_correction1;
        const double v_hat = v[i] / cf.bias_correction2;
        param[i] = param[i] * decay - cf.lr * (m_hat / (std::sqrt(v_hat) + cf.eps));
    }
}

}  // namespace

const KernelTable& scalar_table() {
    static const KernelTable table{gemm_scalar, dot_scalar, axpy_scalar, sum_squares_scalar,
                                   adamw_scalar};
    return table;
}

void transpose(std::size_t m, std::size_t n, const double* in, double* out) {
    constexpr std::size_t kBlock = 32;
    for (std::size_t i0 = 0; i0 < m; i0 += kBlock) {
        const std::size_t i1 = std::min(m, i0 + kBlock);
        for (std::size_t j0 = 0; j0 < n; j0 += kBlock) {
            const std::size_t j1 = std::min(n, j0 + kBlock);
            for (std::size_t i = i0; i < i1; ++i) {
                for (std::size_t j = j0; j < j1; ++j) {
                    out[j * m + i] = in[i * n + j];
                }
            }
        }
    }
}

}  // namespace projcomp::kernels
