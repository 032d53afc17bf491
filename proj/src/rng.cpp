// Copyright 2026 The projcomp Authors
// SPDX-License-Identifier: Apache-2.0

#include "projcomp/rng.hpp"

#include <cmath>
#include <cstdlib>
#include <limits>
#include <numbers>
#include <sstream>

#include "projcomp/common.hpp"

namespace projcomp {

std::uint64_t Rng::below(std::uint64_t bound) {
    if (bound == 0) {
        throw Error("Rng::below: bound must be positive");
    }
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x = engine_();
    while (x >= limit) {
        x = engine_();
    }
    return x % bound;
}

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    // 1 - uniform() is in (0, 1], so the log is finite.
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
}

std::string Rng::serialize() const {
    std::ostringstream out;
    out << engine_ << ' ' << (has_spare_ ? 1 : 0) << ' ';
    out << std::hexfloat << spare_;
    return out.str();
}

void Rng::deserialize(const std::string& state) {
    std::istringstream in(state);
    int spare_flag = 0;
    std::string spare_text;
    in >> engine_ >> spare_flag >> spare_text;
    if (!in) {
        throw FormatError("malformed RNG state");
    }
    has_spare_ = spare_flag != 0;
    spare_ = std::strtod(spare_text.c_str(), nullptr);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    // splitmix64 finalizer over the combined value.
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace projcomp
