// Copyright 2026 The projcomp Authors
// SPDX-License-Identifier: Apache-2.0

#include "projcomp/data.hpp"

#include <fstream>
#include <iterator>
#include <limits>
#include <numeric>

#include "projcomp/rng.hpp"

namespace projcomp {

std::vector<TokenId> tokenize(std::string_view bytes) {
    std::vector<TokenId> ids(bytes.size());
    for (std::size_t i = 0; i < bytes.size(); ++i) {
        ids[i] = static_cast<TokenId>(static_cast<unsigned char>(bytes[i]));
    }
    return ids;
}

std::string detokenize(std::span<const TokenId> ids) {
    std::string out(ids.size(), '\0');
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (ids[i] < 0 || ids[i] > 255) {
            throw IndexError("detokenize: id " + std::to_string(ids[i]) + " is not a byte");
        }
        out[i] = static_cast<char>(static_cast<unsigned char>(ids[i]));
    }
    return out;
}

std::string read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open '" + path.string() + "' for reading");
    }
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) {
        throw IoError("error while reading '" + path.string() + "'");
    }
    return bytes;
}

std::uint64_t Batch::hash() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](std::uint64_t v) {
        for (int i = 0; i < 8; ++i) {
            h ^= (v >> (8 * i)) & 0xff;
            h *= 0x100000001b3ULL;
        }
    };
    mix(batch);
    mix(seq);
    for (TokenId t : inputs) {
        mix(static_cast<std::uint32_t>(t));
    }
    for (TokenId t : targets) {
        mix(static_cast<std::uint32_t>(t));
    }
    return h;
}

TokenStream::TokenStream(std::vector<TokenId> corpus, std::size_t seq_len, std::uint64_t seed)
    : corpus_(std::move(corpus)), seq_len_(seq_len), seed_(seed) {
    if (seq_len_ == 0) {
        throw ConfigError("TokenStream: seq_len must be positive");
    }
    if (corpus_.size() < seq_len_ + 1) {
        throw ConfigError("TokenStream: corpus of " + std::to_string(corpus_.size()) +
                          " tokens is too short for seq_len " + std::to_string(seq_len_) +
                          " (needs at least seq_len + 1)");
    }
    if (num_windows() > std::numeric_limits<std::uint32_t>::max()) {
        throw ConfigError("TokenStream: corpus too large");
    }
}

TokenStream TokenStream::from_file(const std::filesystem::path& path, std::size_t seq_len,
                                   std::uint64_t seed) {
    return TokenStream(tokenize(read_file_bytes(path)), seq_len, seed);
}

const std::vector<std::uint32_t>& TokenStream::permutation(std::uint64_t epoch) const {
    if (epoch != cached_epoch_) {
        cached_perm_.resize(num_windows());
        std::iota(cached_perm_.begin(), cached_perm_.end(), 0U);
        Rng rng(derive_seed(seed_, epoch));
        // Fisher-Yates with the portable bounded draw.
        for (std::size_t i = cached_perm_.size(); i > 1; --i) {
            const std::size_t j = rng.below(i);
            std::swap(cached_perm_[i - 1], cached_perm_[j]);
        }
        cached_epoch_ = epoch;
    }
    return cached_perm_;
}

std::size_t TokenStream::window_start(std::uint64_t window_index) const {
    const std::uint64_t n = num_windows();
    return permutation(window_index / n)[window_index % n];
}

void TokenStream::window_at(std::size_t offset, TokenId* inputs, TokenId* targets) const {
    if (offset + seq_len_ >= corpus_.size()) {
        throw IndexError("window offset " + std::to_string(offset) + " out of range");
    }
    std::copy_n(corpus_.data() + offset, seq_len_, inputs);
    std::copy_n(corpus_.data() + offset + 1, seq_len_, targets);
}

Batch TokenStream::batch_at(std::uint64_t call_index, std::size_t batch_size) const {
    if (batch_size == 0) {
        throw ConfigError("batch_size must be positive");
    }
    Batch b;
    b.batch = batch_size;
    b.seq = seq_len_;
    b.inputs.resize(batch_size * seq_len_);
    b.targets.resize(batch_size * seq_len_);
    for (std::size_t i = 0; i < batch_size; ++i) {
        const std::size_t start = window_start(call_index * batch_size + i);
        window_at(start, b.inputs.data() + i * seq_len_, b.targets.data() + i * seq_len_);
    }
    return b;
}

Batch TokenStream::next_batch(std::size_t batch_size) {
    if (batch_size == 0) {
        throw ConfigError("batch_size must be positive");
    }
    Batch b;
    b.batch = batch_size;
    b.seq = seq_len_;
    b.inputs.resize(batch_size * seq_len_);
    b.targets.resize(batch_size * seq_len_);
    for (std::size_t i = 0; i < batch_size; ++i) {
        const std::size_t start = window_start(consumed_ + i);
        window_at(start, b.inputs.data() + i * seq_len_, b.targets.data() + i * seq_len_);
    }
    consumed_ += batch_size;
    return b;
}

}  // namespace projcomp
