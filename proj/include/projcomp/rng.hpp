// Copyright 2026 The projcomp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <random>
#include <string>

namespace projcomp {

/// Seeded generator with portable derived distributions.
///
/// std::mt19937_64's output sequence is fixed by the standard, but the
/// <random> distributions are not, so uniform/normal/bounded draws are
/// derived here to keep streams identical across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, bound) by rejection (no modulo bias).
    std::uint64_t below(std::uint64_t bound);

    /// Standard normal via Box-Muller; the spare value is cached.
    double normal();

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    /// Engine + cached-normal state as text, for checkpoints.
    std::string serialize() const;
    void deserialize(const std::string& state);

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

/// Mixes a base seed with a stream tag so sub-streams do not collide.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace projcomp
