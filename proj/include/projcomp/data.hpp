// Copyright 2026 The projcomp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "projcomp/common.hpp"

namespace projcomp {

/// Byte-level vocabulary: ids 0..255 are bytes, 256 is the reserved pad id.
inline constexpr TokenId kPadId = 256;
inline constexpr std::size_t kByteVocabSize = 257;

std::vector<TokenId> tokenize(std::string_view bytes);
/// Throws IndexError for ids outside 0..255.
std::string detokenize(std::span<const TokenId> ids);

/// Reads a whole file as raw bytes. Throws IoError.
std::string read_file_bytes(const std::filesystem::path& path);

struct Batch {
    std::size_t batch = 0;
    std::size_t seq = 0;
    std::vector<TokenId> inputs;   // [batch, seq]
    std::vector<TokenId> targets;  // inputs shifted by one position

    std::uint64_t hash() const;
};

/// Deterministic window sampler over a token corpus.
///
/// Window w covers corpus[start, start + seq_len] (seq_len + 1 tokens).
/// Starts are visited in a seeded permutation that is regenerated per
/// epoch, so the k-th window is a pure function of (corpus, seq_len, seed, k).
class TokenStream {
public:
    TokenStream(std::vector<TokenId> corpus, std::size_t seq_len, std::uint64_t seed);
    static TokenStream from_file(const std::filesystem::path& path, std::size_t seq_len,
                                 std::uint64_t seed);

    /// Next batch in sequence; advances the stream by batch_size windows.
    Batch next_batch(std::size_t batch_size);
    /// The batch that the call_index-th next_batch(batch_size) call returns.
    Batch batch_at(std::uint64_t call_index, std::size_t batch_size) const;

    /// Corpus offset of the window_index-th window in stream order.
    std::size_t window_start(std::uint64_t window_index) const;
    /// Inputs/targets of the window beginning at `offset`.
    void window_at(std::size_t offset, TokenId* inputs, TokenId* targets) const;

    std::size_t num_windows() const { return corpus_.size() - seq_len_; }
    std::size_t seq_len() const { return seq_len_; }
    std::uint64_t seed() const { return seed_; }
    std::uint64_t windows_consumed() const { return consumed_; }
    void set_windows_consumed(std::uint64_t n) { consumed_ = n; }
    const std::vector<TokenId>& corpus() const { return corpus_; }

private:
    const std::vector<std::uint32_t>& permutation(std::uint64_t epoch) const;

    std::vector<TokenId> corpus_;
    std::size_t seq_len_;
    std::uint64_t seed_;
    std::uint64_t consumed_ = 0;
    mutable std::uint64_t cached_epoch_ = ~0ULL;
    mutable std::vector<std::uint32_t> cached_perm_;
};

}  // namespace projcomp
