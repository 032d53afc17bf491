// Copyright 2026 The projcomp Authors
// SPDX-License-Identifier: Apache-2.0

#include <atomic>
#include <cstdlib>
#include <string>

#include "projcomp/common.hpp"
#include "projcomp/kernels/kernels.hpp"

namespace projcomp::kernels {
namespace {

bool cpu_has_avx2() {
#if defined(PROJCOMP_HAVE_AVX2) && (defined(__x86_64__) || defined(__i386__))
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

Isa initial_isa() {
    if (const char* env = std::getenv("PROJCOMP_ISA"); env != nullptr && *env != '\0') {
        const Isa requested = parse_isa(env);
        if (isa_supported(requested)) {
            return requested;
        }
    }
    return isa_supported(Isa::avx2) ? Isa::avx2 : Isa::scalar;
}

std::atomic<Isa>& active_slot() {
    static std::atomic<Isa> slot{initial_isa()};
    return slot;
}

}  // namespace

#if !defined(PROJCOMP_HAVE_AVX2)
const KernelTable& avx2_table() { throw Error("AVX2 kernels were not compiled into this build"); }
#endif

bool isa_supported(Isa isa) {
    static const bool avx2 = cpu_has_avx2();
    return isa == Isa::scalar || (isa == Isa::avx2 && avx2);
}

std::string_view isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

Isa parse_isa(std::string_view name) {
    if (name == "scalar") {
        return Isa::scalar;
    }
    if (name == "avx2") {
        return Isa::avx2;
    }
    throw ConfigError("unknown kernel ISA '" + std::string(name) + "' (expected scalar|avx2)");
}

Isa active_isa() { return active_slot().load(std::memory_order_relaxed); }

void set_active_isa(Isa isa) {
    if (!isa_supported(isa)) {
        throw Error("kernel ISA '" + std::string(isa_name(isa)) + "' is not supported on this CPU");
    }
    active_slot().store(isa, std::memory_order_relaxed);
}

const KernelTable& active() {
#if defined(PROJCOMP_HAVE_AVX2)
    if (active_isa() == Isa::avx2) {
        return avx2_table();
    }
#endif
    return scalar_table();
}

}  // namespace projcomp::kernels
