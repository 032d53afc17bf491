// Copyright 2026 The projcomp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "projcomp/common.hpp"

namespace projcomp {

class Tape;

namespace detail {

struct TensorImpl {
    Shape shape;
    std::vector<double> data;
    std::vector<double> grad;  // empty when absent
    bool requires_grad = false;
    bool leaf = true;
    const Tape* producer = nullptr;

    void accumulate_grad(std::span<const double> delta);
    std::vector<double>& grad_buffer();
};

}  // namespace detail

/// Dense row-major float64 tensor with shared (handle) semantics.
///
/// Copies of a Tensor alias the same storage, which is what lets the tape
/// refer back to the values and gradients of recorded operations.
/// Use detach() for an independent copy.
class Tensor {
public:
    Tensor() = default;

    static Tensor zeros(Shape shape, bool requires_grad = false);
    static Tensor full(Shape shape, double value, bool requires_grad = false);
    static Tensor from_data(Shape shape, std::vector<double> values, bool requires_grad = false);
    static Tensor scalar(double value, bool requires_grad = false);

    bool defined() const { return impl_ != nullptr; }
    const Shape& shape() const;
    std::size_t rank() const { return shape().size(); }
    std::size_t dim(std::size_t axis) const;
    std::size_t numel() const;

    std::span<const double> data() const;
    std::span<double> data_mut();
    double at(std::size_t flat_index) const;
    double item() const;

    bool requires_grad() const;
    void set_requires_grad(bool value);
    bool is_leaf() const;

    bool has_grad() const;
    std::span<const double> grad() const;
    void zero_grad();   // keeps the buffer, fills with zeros
    void clear_grad();  // drops the buffer

    /// Deep copy of the values as a fresh leaf.
    Tensor detach(bool requires_grad = false) const;

    bool same_storage(const Tensor& other) const { return impl_ == other.impl_; }

    const std::shared_ptr<detail::TensorImpl>& impl() const { return impl_; }
    explicit Tensor(std::shared_ptr<detail::TensorImpl> impl) : impl_(std::move(impl)) {}

private:
    std::shared_ptr<detail::TensorImpl> impl_;
};

/// Ordered record of differentiable operations.
///
/// Entries are appended as operations execute, so every entry's inputs were
/// produced by earlier entries (or are leaves). backward() walks the record
/// once in reverse and then marks the tape consumed.
class Tape {
public:
    using BackwardFn = std::function<void()>;

    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    void record(std::string_view op, std::shared_ptr<detail::TensorImpl> output, BackwardFn fn);
    void backward(const Tensor& loss);

    bool consumed() const { return consumed_; }
    std::size_t size() const { return entries_.size(); }
    std::vector<std::string> op_names() const;

private:
    struct Entry {
        std::string op;
        std::shared_ptr<detail::TensorImpl> output;
        BackwardFn fn;
    };
    std::vector<Entry> entries_;
    bool consumed_ = false;
};

/// Makes `tape` the recording target on this thread for the scope's life.
class TapeScope {
public:
    explicit TapeScope(Tape& tape);
    ~TapeScope();
    TapeScope(const TapeScope&) = delete;
    TapeScope& operator=(const TapeScope&) = delete;

private:
    Tape* previous_;
};

/// Suspends recording on this thread for the scope's life.
class NoTapeScope {
public:
    NoTapeScope();
    ~NoTapeScope();
    NoTapeScope(const NoTapeScope&) = delete;
    NoTapeScope& operator=(const NoTapeScope&) = delete;

private:
    Tape* previous_;
};

Tape* current_tape();

/// FNV-1a over the raw bits of the values (shape included).
std::uint64_t content_hash(const Tensor& t);

/// Matmul work counters (2·m·k·n per product), active while a
/// FlopCounterScope is alive on this thread.
struct FlopCounts {
    std::uint64_t forward = 0;
    std::uint64_t backward = 0;
};

class FlopCounterScope {
public:
    FlopCounterScope();
    ~FlopCounterScope();
    FlopCounterScope(const FlopCounterScope&) = delete;
    FlopCounterScope& operator=(const FlopCounterScope&) = delete;

    const FlopCounts& counts() const { return counts_; }

private:
    FlopCounts counts_;
    FlopCounterScope* previous_;
    friend void count_matmul_flops(std::uint64_t, bool);
};

void count_matmul_flops(std::uint64_t flops, bool backward);

/// NaN/Inf check after every op (on by default).
void set_finite_checks(bool enabled);
bool finite_checks_enabled();
void check_finite(const Tensor& t, std::string_view op);

}  // namespace projcomp
