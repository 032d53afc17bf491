// Copyright 2026 The projcomp Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "projcomp/kernels/kernels.hpp"
#include "test_util.hpp"

namespace projcomp {
namespace {

using testing::check_gradients;
using testing::random_tensor;

// Reduces any tensor to a scalar with fixed, non-uniform weights so every
// output element contributes a distinct gradient.
Tensor weighted_sum(const Tensor& x) {
    std::vector<double> w(x.numel());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::sin(0.7 * static_cast<double>(i) + 0.3);
    return sum(mul(x, Tensor::from_data(x.shape(), std::move(w))));
}

TEST(Matmul, IdentityAndRowSelection) {
    const Tensor a = Tensor::from_data({2, 2}, {1, 2, 3, 4});
    const Tensor eye = Tensor::from_data({2, 2}, {1, 0, 0, 1});
    const Tensor c = matmul(a, eye);
    EXPECT_EQ(std::vector<double>(c.data().begin(), c.data().end()), (std::vector<double>{1, 2, 3, 4}));
    const Tensor row = matmul(Tensor::from_data({1, 2}, {1, 0}), a);
    EXPECT_EQ(row.shape(), (Shape{1, 2}));
    EXPECT_EQ(row.at(0), 1.0);
    EXPECT_EQ(row.at(1), 2.0);
}

TEST(Matmul, MatchesTripleLoop) {
    Rng rng(11);
    const Tensor a = random_tensor({3, 4}, rng);
    const Tensor b = random_tensor({4, 2}, rng);
    const Tensor c = matmul(a, b);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 2; ++j) {
            double s = 0.0;
            for (std::size_t t = 0; t < 4; ++t) s += a.at(i * 4 + t) * b.at(t * 2 + j);
            EXPECT_NEAR(c.at(i * 2 + j), s, 1e-12);
        }
}

TEST(Matmul, RejectsMismatchedShapes) {
    EXPECT_THROW(matmul(Tensor::zeros({2, 3}), Tensor::zeros({2, 3})), DimensionError);
    EXPECT_THROW(Tensor::zeros({0, 3}), DimensionError);
}

TEST(Elementwise, ClosedFormValues) {
    EXPECT_EQ(gelu(Tensor::from_data({1}, {0.0})).item(), 0.0);
    const Tensor sm = softmax(Tensor::from_data({2}, {0.0, 0.0}));
    EXPECT_DOUBLE_EQ(sm.at(0), 0.5);
    EXPECT_DOUBLE_EQ(sm.at(1), 0.5);
    const Tensor ln = layer_norm(Tensor::from_data({2}, {1.0, -1.0}), Tensor::full({2}, 1.0),
                                 Tensor::zeros({2}), 1e-5);
    const double expect = 1.0 / std::sqrt(1.0 + 1e-5);
    EXPECT_NEAR(ln.at(0), expect, 1e-15);
    EXPECT_NEAR(ln.at(1), -expect, 1e-15);
    EXPECT_GT(ln.at(0), 0.99999);
    EXPECT_LT(ln.at(0), 1.0);
    // tanh-approximated GELU
    const double x = 1.3;
    const double g = 0.5 * x * (1.0 + std::tanh(0.7978845608028654 * (x + 0.044715 * x * x * x)));
    EXPECT_NEAR(gelu(Tensor::from_data({1}, {x})).item(), g, 1e-15);
}

TEST(Elementwise, EmbeddingAndCausalMask) {
    const Tensor table = Tensor::from_data({3, 2}, {0, 1, 10, 11, 20, 21});
    const std::vector<TokenId> ids{2, 0, 1};
    const Tensor e = embedding(ids, {1, 3}, table);
    EXPECT_EQ(e.shape(), (Shape{1, 3, 2}));
    EXPECT_EQ(e.at(0), 20);
    EXPECT_EQ(e.at(3), 1);
    EXPECT_EQ(e.at(5), 11);
    const std::vector<TokenId> bad{3};
    EXPECT_THROW(embedding(bad, {1, 1}, table), IndexError);

    const Tensor masked = causal_mask_fill(Tensor::full({1, 3, 3}, 2.0));
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) {
            EXPECT_EQ(masked.at(i * 3 + j), j <= i ? 2.0 : kMaskFill);
        }
    const Tensor p = softmax(masked);
    EXPECT_EQ(p.at(1), 0.0);
    EXPECT_DOUBLE_EQ(p.at(3) + p.at(4), 1.0);
}

TEST(CrossEntropy, ClosedForms) {
    const std::vector<TokenId> t0{0};
    EXPECT_NEAR(cross_entropy(Tensor::from_data({1, 2}, {0, 0}), t0).item(), std::log(2.0), 1e-15);
    EXPECT_NEAR(cross_entropy(Tensor::from_data({1, 2}, {1000, 0}), t0).item(), 0.0, 1e-300);
    const std::vector<TokenId> bad{5};
    EXPECT_THROW(cross_entropy(Tensor::from_data({1, 2}, {0, 0}), bad), IndexError);
}

TEST(CrossEntropy, MatchesExtendedPrecisionOracle) {
    Rng rng(2024);
    const Tensor logits = random_tensor({2, 3, 5}, rng, false, 3.0);
    std::vector<TokenId> targets(6);
    for (auto& t : targets) t = static_cast<TokenId>(rng.below(5));
    long double total = 0.0L;
    for (std::size_t r = 0; r < 6; ++r) {
        long double s = 0.0L;
        for (std::size_t v = 0; v < 5; ++v) s += std::exp(static_cast<long double>(logits.at(r * 5 + v)));
        total += std::log(s) - static_cast<long double>(logits.at(r * 5 + targets[r]));
    }
    EXPECT_NEAR(cross_entropy(logits, targets).item(), static_cast<double>(total / 6.0L), 1e-10);
}

TEST(Backward, SquareHasGradientSix) {
    const Tensor x = Tensor::scalar(3.0, true);
    Tape tape;
    Tensor y;
    {
        TapeScope s(tape);
        y = mul(x, x);
    }
    tape.backward(y);
    ASSERT_TRUE(x.has_grad());
    EXPECT_EQ(x.grad()[0], 6.0);
}

TEST(Backward, MatmulChainMatchesFiniteDifferences) {
    Rng rng(7);
    const Tensor a = random_tensor({3, 3}, rng, true);
    const Tensor b = random_tensor({3, 3}, rng, true);
    const Tensor c = random_tensor({3, 3}, rng, true);
    const auto r = check_gradients([&] { return weighted_sum(matmul(matmul(a, b), c)); }, {a, b, c});
    EXPECT_EQ(r.coordinates, 27u);
    EXPECT_LT(r.max_rel_error, 1e-6);
}

// Every differentiable op against central differences.
TEST(Backward, EveryOpMatchesFiniteDifferences) {
    Rng rng(99);
    const Tensor x = random_tensor({2, 3, 4}, rng, true);
    const Tensor y = random_tensor({2, 3, 4}, rng, true);
    const Tensor w = random_tensor({4, 5}, rng, true);
    const Tensor v = random_tensor({4}, rng, true);
    const Tensor g = random_tensor({4}, rng, true);
    const Tensor m3 = random_tensor({2, 4, 3}, rng, true);
    const Tensor table = random_tensor({6, 4}, rng, true);
    const std::vector<TokenId> ids{1, 5, 0, 2, 2, 3};
    const std::vector<TokenId> targets{0, 4, 1, 3, 2, 2};
    const Tensor sq = random_tensor({2, 3, 3}, rng, true);
    const Tensor heads = random_tensor({2, 3, 8}, rng, true);

    struct Case {
        const char* name;
        std::function<Tensor()> f;
        std::vector<Tensor> inputs;
    };
    const std::vector<Case> cases{
        {"matmul", [&] { return weighted_sum(matmul(x, w)); }, {x, w}},
        {"bmm", [&] { return weighted_sum(bmm(x, m3)); }, {x, m3}},
        {"transpose", [&] { return weighted_sum(transpose(x)); }, {x}},
        {"reshape", [&] { return weighted_sum(reshape(x, {6, 4})); }, {x}},
        {"add", [&] { return weighted_sum(add(x, y)); }, {x, y}},
        {"mul", [&] { return weighted_sum(mul(x, y)); }, {x, y}},
        {"scale", [&] { return weighted_sum(scale(x, -1.7)); }, {x}},
        {"add_row", [&] { return weighted_sum(add_row(x, v)); }, {x, v}},
        {"sum", [&] { return scale(sum(mul(x, x)), 0.5); }, {x}},
        {"gelu", [&] { return weighted_sum(gelu(x)); }, {x}},
        {"softmax", [&] { return weighted_sum(softmax(x)); }, {x}},
        {"layer_norm", [&] { return weighted_sum(layer_norm(x, g, v, 1e-5)); }, {x, g, v}},
        {"embedding", [&] { return weighted_sum(embedding(ids, {2, 3}, table)); }, {table}},
        {"causal_mask", [&] { return weighted_sum(softmax(causal_mask_fill(sq))); }, {sq}},
        {"split_heads", [&] { return weighted_sum(split_heads(heads, 2)); }, {heads}},
        {"merge_heads", [&] { return weighted_sum(merge_heads(split_heads(heads, 4), 2)); }, {heads}},
        {"cross_entropy", [&] { return cross_entropy(matmul(x, w), targets); }, {x, w}},
    };
    for (const auto& c : cases) {
        const auto r = check_gradients(c.f, c.inputs);
        EXPECT_GT(r.coordinates, 0u) << c.name;
        EXPECT_LT(r.max_rel_error, 1e-6) << c.name;
    }
}

TEST(Backward, IsLinearInTheLoss) {
    Rng rng(4);
    const Tensor x = random_tensor({3, 4}, rng, true);
    const Tensor w = random_tensor({4, 2}, rng, true);
    auto loss1 = [&] { return weighted_sum(gelu(matmul(x, w))); };
    auto loss2 = [&] { return sum(mul(x, x)); };
    auto grads = [&](const std::function<Tensor()>& f) {
        x.impl()->grad.clear();
        w.impl()->grad.clear();
        Tape tape;
        Tensor l;
        {
            TapeScope s(tape);
            l = f();
        }
        tape.backward(l);
        std::vector<double> out(x.grad().begin(), x.grad().end());
        out.insert(out.end(), w.grad().begin(), w.grad().end());
        return out;
    };
    const double a = 0.3, b = -2.5;
    const auto g1 = grads(loss1);
    const auto g2 = grads(loss2);
    const auto gc = grads([&] { return add(scale(loss1(), a), scale(loss2(), b)); });
    ASSERT_EQ(g1.size(), gc.size());
    // w does not appear in loss2, so its gradient comes only from loss1
    for (std::size_t i = 0; i < gc.size(); ++i) {
        const double g2i = i < g2.size() ? g2[i] : 0.0;
        EXPECT_NEAR(gc[i], a * g1[i] + b * g2i, 1e-12);
    }
}

TEST(Backward, FrozenLeafGetsNoGradient) {
    Rng rng(8);
    const Tensor x = random_tensor({2, 3}, rng, true);
    const Tensor w = random_tensor({3, 3}, rng, false);
    Tape tape;
    Tensor l;
    {
        TapeScope s(tape);
        l = weighted_sum(matmul(x, w));
    }
    tape.backward(l);
    EXPECT_TRUE(x.has_grad());
    EXPECT_FALSE(w.has_grad());
}

TEST(Backward, LeafGradientsAccumulate) {
    Tensor x = Tensor::scalar(2.0, true);
    for (int i = 0; i < 2; ++i) {
        Tape tape;
        Tensor y;
        {
            TapeScope s(tape);
            y = mul(x, x);
        }
        tape.backward(y);
    }
    EXPECT_EQ(x.grad()[0], 8.0);
    x.clear_grad();
    EXPECT_FALSE(x.has_grad());
}

TEST(Tape, ErrorsAndRecording) {
    Rng rng(1);
    const Tensor x = random_tensor({2, 2}, rng, true);
    Tape tape;
    Tensor l, v;
    {
        TapeScope s(tape);
        v = gelu(x);
        l = sum(v);
    }
    EXPECT_EQ(tape.op_names(), (std::vector<std::string>{"gelu", "sum"}));
    EXPECT_THROW(tape.backward(v), TapeError);  // not a scalar
    Tape other;
    EXPECT_THROW(other.backward(l), TapeError);  // not recorded there
    tape.backward(l);
    EXPECT_TRUE(tape.consumed());
    EXPECT_THROW(tape.backward(l), TapeError);

    Tape none;
    Tensor free_loss;
    {
        TapeScope s(none);
        NoTapeScope off;
        free_loss = sum(x);
    }
    EXPECT_EQ(none.size(), 0u);
}

TEST(Tape, IntermediateGradientsAreReleased) {
    Rng rng(3);
    const Tensor x = random_tensor({2, 2}, rng, true);
    Tape tape;
    Tensor h, l;
    {
        TapeScope s(tape);
        h = gelu(x);
        l = sum(h);
    }
    tape.backward(l);
    EXPECT_FALSE(h.has_grad());
    EXPECT_TRUE(x.has_grad());
}

TEST(Determinism, SameOpsSameBits) {
    auto run = [] {
        Rng rng(12);
        const Tensor x = random_tensor({4, 8}, rng, true);
        const Tensor w = random_tensor({8, 8}, rng, true);
        Tape tape;
        Tensor l;
        {
            TapeScope s(tape);
            l = weighted_sum(softmax(gelu(matmul(x, w))));
        }
        tape.backward(l);
        std::vector<double> out{l.item()};
        out.insert(out.end(), w.grad().begin(), w.grad().end());
        return out;
    };
    EXPECT_TRUE(testing::bit_equal(run(), run()));
}

TEST(NumericChecks, NonFiniteFailsFast) {
    ASSERT_TRUE(finite_checks_enabled());
    const Tensor big = Tensor::from_data({1, 1}, {1e200});
    EXPECT_THROW(matmul(big, big), NumericError);
    set_finite_checks(false);
    EXPECT_NO_THROW(matmul(big, big));
    set_finite_checks(true);
}

TEST(FlopCounter, CountsForwardAndBackwardMatmuls) {
    Rng rng(1);
    const Tensor a = random_tensor({3, 4}, rng, true);
    const Tensor b = random_tensor({4, 5}, rng, false);
    FlopCounterScope outer;
    Tape tape;
    Tensor l;
    {
        FlopCounterScope inner;
        TapeScope s(tape);
        l = sum(matmul(a, b));
        EXPECT_EQ(inner.counts().forward, 2u * 3 * 4 * 5);
    }
    tape.backward(l);
    EXPECT_EQ(outer.counts().forward, 120u);
    EXPECT_EQ(outer.counts().backward, 120u);  // only dA, b is frozen
}

TEST(ContentHash, DependsOnBitsAndShape) {
    const Tensor a = Tensor::from_data({2, 2}, {1, 2, 3, 4});
    const Tensor b = Tensor::from_data({4}, {1, 2, 3, 4});
    const Tensor c = Tensor::from_data({2, 2}, {1, 2, 3, 4.000000000000001});
    EXPECT_EQ(content_hash(a), content_hash(a.detach()));
    EXPECT_NE(content_hash(a), content_hash(b));
    EXPECT_NE(content_hash(a), content_hash(c));
}

TEST(Kernels, OpsAgreeAcrossIsas) {
    if (!kernels::isa_supported(kernels::Isa::avx2)) GTEST_SKIP();
    Rng rng(21);
    const Tensor x = random_tensor({5, 7}, rng, true);
    const Tensor w = random_tensor({7, 6}, rng, true);
    auto run = [&](kernels::Isa isa) {
        kernels::ScopedIsa scoped(isa);
        x.impl()->grad.clear();
        w.impl()->grad.clear();
        Tape tape;
        Tensor l;
        {
            TapeScope s(tape);
            l = weighted_sum(gelu(matmul(x, w)));
        }
        tape.backward(l);
        std::vector<double> out{l.item()};
        out.insert(out.end(), w.grad().begin(), w.grad().end());
        return out;
    };
    EXPECT_LT(testing::max_abs_diff(run(kernels::Isa::scalar), run(kernels::Isa::avx2)), 1e-12);
}

}  // namespace
}  // namespace projcomp
