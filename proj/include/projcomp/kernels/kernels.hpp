// Copyright 2026 The projcomp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string_view>

namespace projcomp::kernels {

// Dense row-major double kernels. Every kernel has a portable scalar
// reference and an AVX2+FMA variant; the active table is picked once at
// startup from CPU features (override with PROJCOMP_ISA=scalar|avx2) and
// can be switched explicitly for equivalence testing.

enum class Isa { scalar, avx2 };

struct AdamWCoeffs {
    double lr;
    double beta1;
    double beta2;
    double eps;
    double weight_decay;
    double bias_correction1;  // 1 - beta1^t
    double bias_correction2;  // 1 - beta2^t
};

struct KernelTable {
    // c[m×n] = a[m×k]·b[k×n], or c += a·b when accumulate is set.
    void (*gemm)(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
                 double* c, bool accumulate);
    double (*dot)(const double* x, const double* y, std::size_t n);
    // y += alpha·x
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
    double (*sum_squares)(const double* x, std::size_t n);
    void (*adamw)(double* param, const double* grad, double* m, double* v, std::size_t n,
                  const AdamWCoeffs& coeffs);
};

const KernelTable& scalar_table();
const KernelTable& avx2_table();  // only valid when isa_supported(Isa::avx2)

bool isa_supported(Isa isa);
std::string_view isa_name(Isa isa);
Isa parse_isa(std::string_view name);

Isa active_isa();
/// Throws projcomp::Error if the ISA is not supported on this CPU.
void set_active_isa(Isa isa);
const KernelTable& active();

/// Switches the active ISA for a scope and restores it on exit.
class ScopedIsa {
public:
    explicit ScopedIsa(Isa isa) : previous_(active_isa()) { set_active_isa(isa); }
    ~ScopedIsa() { set_active_isa(previous_); }
    ScopedIsa(const ScopedIsa&) = delete;
    ScopedIsa& operator=(const ScopedIsa&) = delete;

private:
    Isa previous_;
};

inline void gemm(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
                 double* c, bool accumulate = false) {
    active().gemm(m, n, k, a, b, c, accumulate);
}
inline double dot(const double* x, const double* y, std::size_t n) { return active().dot(x, y, n); }
inline void axpy(double alpha, const double* x, double* y, std::size_t n) {
    active().axpy(alpha, x, y, n);
}
inline double sum_squares(const double* x, std::size_t n) { return active().sum_squares(x, n); }
inline void adamw(double* param, const double* grad, double* m, double* v, std::size_t n,
                  const AdamWCoeffs& coeffs) {
    active().adamw(param, grad, m, v, n, coeffs);
}

/// out[n×m] = in[m×n]ᵀ
void transpose(std::size_t m, std::size_t n, const double* in, double* out);

}  // namespace projcomp::kernels
