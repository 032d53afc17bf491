// Copyright 2026 The projcomp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>

namespace projcomp {

/// English-like text from a small seeded probabilistic grammar (subject-verb
/// agreement, Zipf-weighted word choice, clauses, paragraphs). Exactly
/// `bytes` long; identical for equal (bytes, seed).
std::string synthetic_corpus(std::size_t bytes, std::uint64_t seed);

}  // namespace projcomp
