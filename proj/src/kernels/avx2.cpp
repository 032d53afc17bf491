// Copyright 2026 The projcomp Authors
// SPDX-License-Identifier: Apache-2.0

// AVX2+FMA kernels. This translation unit is compiled with -mavx2 -mfma
// -ffp-contract=off; fused multiply-adds appear only where written.
//
// gemm: every output element is one FMA chain over t = 0..k-1 starting
// from zero, whichever register block computes it. Results therefore do
// not depend on m, on the row/column blocking, or on the batch a row
// belongs to.

#include <immintrin.h>

#include <cmath>

#include "projcomp/kernels/kernels.hpp"

namespace projcomp::kernels {
namespace {

inline double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d pair = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(pair, _mm_unpackhi_pd(pair, pair)));
}

template <std::size_t Rows>
inline void gemm_block8(std::size_t n, std::size_t k, const double* a, const double* b, double* c,
                        std::size_t j, bool accumulate) {
    __m256d acc0[Rows];
    __m256d acc1[Rows];
    for (std::size_t r = 0; r < Rows; ++r) {
        acc0[r] = _mm256_setzero_pd();
        acc1[r] = _mm256_setzero_pd();
    }
    for (std::size_t t = 0; t < k; ++t) {
        const __m256d b0 = _mm256_loadu_pd(b + t * n + j);
        const __m256d b1 = _mm256_loadu_pd(b + t * n + j + 4);
        for (std::size_t r = 0; r < Rows; ++r) {
            const __m256d av = _mm256_broadcast_sd(a + r * k + t);
            acc0[r] = _mm256_fmadd_pd(av, b0, acc0[r]);
            acc1[r] = _mm256_fmadd_pd(av, b1, acc1[r]);
        }
    }
    for (std::size_t r = 0; r < Rows; ++r) {
        double* out = c + r * n + j;
        if (accumulate) {
            _mm256_storeu_pd(out, _mm256_add_pd(_mm256_loadu_pd(out), acc0[r]));
            _mm256_storeu_pd(out + 4, _mm256_add_pd(_mm256_loadu_pd(out + 4), acc1[r]));
        } else {
            _mm256_storeu_pd(out, acc0[r]);
            _mm256_storeu_pd(out + 4, acc1[r]);
        }
    }
}

template <std::size_t Rows>
inline void gemm_block4(std::size_t n, std::size_t k, const double* a, const double* b, double* c,
                        std::size_t j, bool accumulate) {
    __m256d acc[Rows];
    for (std::size_t r = 0; r < Rows; ++r) {
        acc[r] = _mm256_setzero_pd();
    }
    for (std::size_t t = 0; t < k; ++t) {
        const __m256d b0 = _mm256_loadu_pd(b + t * n + j);
        for (std::size_t r = 0; r < Rows; ++r) {
            acc[r] = _mm256_fmadd_pd(_mm256_broadcast_sd(a + r * k + t), b0, acc[r]);
        }
    }
    for (std::size_t r = 0; r < Rows; ++r) {
        double* out = c + r * n + j;
        if (accumulate) {
            _mm256_storeu_pd(out, _mm256_add_pd(_mm256_loadu_pd(out), acc[r]));
        } else {
            _mm256_storeu_pd(out, acc[r]);
        }
    }
}

template <std::size_t Rows>
inline void gemm_rows(std::size_t n, std::size_t k, const double* a, const double* b, double* c,
                      bool accumulate) {
    std::size_t j = 0;
    for (; j + 8 <= n; j += 8) {
        gemm_block8<Rows>(n, k, a, b, c, j, accumulate);
    }
    for (; j + 4 <= n; j += 4) {
        gemm_block4<Rows>(n, k, a, b, c, j, accumulate);
    }
    for (; j < n; ++j) {
        for (std::size_t r = 0; r < Rows; ++r) {
            double s = 0.0;
            for (std::size_t t = 0; t < k; ++t) {
                s = std::fma(a[r * k + t], b[t * n + j], s);
            }
            if (accumulate) {
                c[r * n + j] += s;
            } else {
                c[r * n + j] = s;
            }
        }
    }
}

void gemm_avx2(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
               double* c, bool accumulate) {
    std::size_t i = 0;
    for (; i + 4 <= m; i += 4) {
        gemm_rows<4>(n, k, a + i * k, b, c + i * n, accumulate);
    }
    for (; i < m; ++i) {
        gemm_rows<1>(n, k, a + i * k, b, c + i * n, accumulate);
    }
}

double dot_avx2(const double* x, const double* y, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), acc1);
    }
    for (; i + 4 <= n; i += 4) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
    }
    double s = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) {
        s = std::fma(x[i], y[i], s);
    }
    return s;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
    const __m256d av = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d prod = _mm256_mul_pd(av, _mm256_loadu_pd(x + i));
        _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), prod));
    }
    for (; i < n; ++i) {
        y[i] += alpha * x[i];
    }
}

double sum_squares_avx2(const double* x, std::size_t n) { return dot_avx2(x, x, n); }

// Same operation sequence as the scalar reference (no FMA), so the two
// variants agree bit for bit.
void adamw_avx2(double* param, const double* grad, double* m, double* v, std::size_t n,
                const AdamWCoeffs& cf) {
    const double decay_s = 1.0 - cf.lr * cf.weight_decay;
    const __m256d b1 = _mm256_set1_pd(cf.beta1);
    const __m256d b2 = _mm256_set1_pd(cf.beta2);
    const __m256d omb1 = _mm256_set1_pd(1.0 - cf.beta1);
    const __m256d omb2 = _mm256_set1_pd(1.0 - cf.beta2);
    const __m256d bc1 = _mm256_set1_pd(cf.bias_correction1);
    const __m256d bc2 = _mm256_set1_pd(cf.bias_correction2);
    const __m256d eps = _mm256_set1_pd(cf.eps);
    const __m256d lr = _mm256_set1_pd(cf.lr);
    const __m256d decay = _mm256_set1_pd(decay_s);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d g = _mm256_loadu_pd(grad + i);
        const __m256d mi = _mm256_add_pd(_mm256_mul_pd(b1, _mm256_loadu_pd(m + i)),
                                          _mm256_mul_pd(omb1, g));
        const __m256d vi = _mm256_add_pd(_mm256_mul_pd(b2, _mm256_loadu_pd(v + i)),
                                          _mm256_mul_pd(omb2, _mm256_mul_pd(g, g)));
        _mm256_storeu_pd(m + i, mi);
        _mm256_storeu_pd(v + i, vi);
        const __m256d m_hat = _mm256_div_pd(mi, bc1);
        const __m256d v_hat = _mm256_div_pd(vi, bc2);
        const __m256d step = _mm256_div_pd(m_hat, _mm256_add_pd(_mm256_sqrt_pd(v_hat), eps));
        const __m256d p = _mm256_mul_pd(_mm256_loadu_pd(param + i), decay);
        _mm256_storeu_pd(param + i, _mm256_sub_pd(p, _mm256_mul_pd(lr, step)));
    }
    for (; i < n; ++i) {
        const double g = grad[i];
        m[i] = cf.beta1 * m[i] + (1.0 - cf.beta1) * g;
        v[i] = cf.beta2 * v[i] + (1.0 - cf.beta2) * (g * g);
        const double m_hat = m[i] / cf.bias_correction1;
        const double v_hat = v[i] / cf.bias_correction2;
        param[i] = param[i] * decay_s - cf.lr * (m_hat / (std::sqrt(v_hat) + cf.eps));
    }
}

}  // namespace

const KernelTable& avx2_table() {
    static const KernelTable table{gemm_avx2, dot_avx2, axpy_avx2, sum_squares_avx2, adamw_avx2};
    return table;
}

}  // namespace projcomp::kernels
