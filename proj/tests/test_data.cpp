// Copyright 2026 The projcomp Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "projcomp/corpus.hpp"
#include "projcomp/data.hpp"
#include "projcomp/rng.hpp"

namespace projcomp {
namespace {

TEST(Tokenizer, Examples) {
    EXPECT_EQ(tokenize("AB"), (std::vector<TokenId>{65, 66}));
    EXPECT_TRUE(tokenize("").empty());
    EXPECT_EQ(tokenize("\xff\x00" + std::string("x"))[0], 255);
}

TEST(Tokenizer, RoundTripsRandomBytes) {
    Rng rng(17);
    for (int trial = 0; trial < 50; ++trial) {
        std::string s(rng.below(300), '\0');
        for (char& c : s) c = static_cast<char>(rng.below(256));
        const auto ids = tokenize(s);
        for (TokenId id : ids) {
            EXPECT_GE(id, 0);
            EXPECT_LT(id, 256);
        }
        EXPECT_EQ(detokenize(ids), s);
    }
}

TEST(Tokenizer, RejectsNonByteIds) {
    const std::vector<TokenId> pad{kPadId};
    EXPECT_THROW(detokenize(pad), IndexError);
}

TEST(TokenStream, FirstWindowShiftsTargets) {
    TokenStream s(tokenize("abcdef"), 2, 0);
    std::array<TokenId, 2> in{}, tg{};
    s.window_at(0, in.data(), tg.data());
    EXPECT_EQ(in[0], 'a');
    EXPECT_EQ(in[1], 'b');
    EXPECT_EQ(tg[0], 'b');
    EXPECT_EQ(tg[1], 'c');
    EXPECT_EQ(s.num_windows(), 4u);
}

TEST(TokenStream, TargetsAreInputsShiftedByOne) {
    const auto corpus = tokenize(synthetic_corpus(5000, 2));
    TokenStream s(corpus, 16, 3);
    for (int i = 0; i < 20; ++i) {
        const Batch b = s.next_batch(4);
        for (std::size_t r = 0; r < 4; ++r)
            for (std::size_t t = 0; t + 1 < 16; ++t) {
                EXPECT_EQ(b.targets[r * 16 + t], b.inputs[r * 16 + t + 1]);
            }
    }
}

TEST(TokenStream, SameSeedSameBatches) {
    const auto corpus = tokenize(synthetic_corpus(20000, 1));
    TokenStream a(corpus, 32, 42), b(corpus, 32, 42), c(corpus, 32, 43);
    bool any_diff = false;
    for (int i = 0; i < 100; ++i) {
        const Batch ba = a.next_batch(4), bb = b.next_batch(4), bc = c.next_batch(4);
        EXPECT_EQ(ba.inputs, bb.inputs);
        EXPECT_EQ(ba.targets, bb.targets);
        EXPECT_EQ(ba.hash(), bb.hash());
        any_diff |= ba.inputs != bc.inputs;
    }
    EXPECT_TRUE(any_diff);
}

TEST(TokenStream, BatchAtMatchesSequentialCalls) {
    const auto corpus = tokenize(synthetic_corpus(3000, 5));
    TokenStream seq(corpus, 8, 9);
    const TokenStream random_access(corpus, 8, 9);
    for (std::uint64_t i = 0; i < 1000; ++i) {  // spans several epochs
        EXPECT_EQ(seq.next_batch(3).inputs, random_access.batch_at(i, 3).inputs) << i;
    }
}

TEST(TokenStream, EpochVisitsEveryWindowOnce) {
    const auto corpus = tokenize(synthetic_corpus(500, 5));
    const TokenStream s(corpus, 8, 1);
    std::vector<int> seen(s.num_windows(), 0);
    for (std::uint64_t w = 0; w < s.num_windows(); ++w) ++seen[s.window_start(w)];
    for (int c : seen) EXPECT_EQ(c, 1);
}

TEST(TokenStream, ResumesFromWindowCount) {
    const auto corpus = tokenize(synthetic_corpus(4000, 5));
    TokenStream a(corpus, 8, 2);
    for (int i = 0; i < 7; ++i) a.next_batch(5);
    TokenStream b(corpus, 8, 2);
    b.set_windows_consumed(a.windows_consumed());
    EXPECT_EQ(a.next_batch(5).inputs, b.next_batch(5).inputs);
}

// Token frequencies over many batches track the corpus byte histogram.
TEST(TokenStream, HistogramMatchesCorpus) {
    const auto corpus = tokenize(synthetic_corpus(20000, 11));
    const std::size_t seq = 16;
    TokenStream s(corpus, seq, 5);
    std::array<double, 256> want{}, got{};
    for (std::size_t i = 0; i < corpus.size(); ++i) want[corpus[i]] += 1.0;
    double total = 0.0;
    for (int i = 0; i < 10000; ++i) {
        for (TokenId t : s.next_batch(1).inputs) {
            got[t] += 1.0;
            total += 1.0;
        }
    }
    double tv = 0.0;
    for (std::size_t v = 0; v < 256; ++v) {
        tv += std::abs(got[v] / total - want[v] / static_cast<double>(corpus.size()));
    }
    EXPECT_LT(0.5 * tv, 0.02);
}

TEST(TokenStream, Errors) {
    EXPECT_THROW(TokenStream(tokenize("abc"), 3, 0), ConfigError);
    EXPECT_THROW(TokenStream::from_file("/nonexistent/corpus.txt", 4, 0), IoError);
    TokenStream s(tokenize("abcdefgh"), 2, 0);
    EXPECT_THROW(s.next_batch(0), ConfigError);
}

TEST(TokenStream, ReadsFiles) {
    const auto path = std::filesystem::temp_directory_path() / "projcomp_data_test.txt";
    {
        std::ofstream f(path, std::ios::binary);
        f << "hello world, hello stream";
    }
    TokenStream s = TokenStream::from_file(path, 4, 1);
    EXPECT_EQ(s.corpus().size(), 25u);
    std::filesystem::remove(path);
}

TEST(SyntheticCorpus, DeterministicAndSized) {
    EXPECT_EQ(synthetic_corpus(1000, 3), synthetic_corpus(1000, 3));
    EXPECT_NE(synthetic_corpus(1000, 3), synthetic_corpus(1000, 4));
    EXPECT_EQ(synthetic_corpus(12345, 0).size(), 12345u);
}

}  // namespace
}  // namespace projcomp
