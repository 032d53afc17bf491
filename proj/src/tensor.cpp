// Copyright 2026 The projcomp Authors
// SPDX-License-Identifier: Apache-2.0

#include "projcomp/tensor.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <sstream>

namespace projcomp {

std::string shape_to_string(const Shape& shape) {
    std::ostringstream out;
    out << '[';
    for (std::size_t i = 0; i < shape.size(); ++i) {
        out << (i == 0 ? "" : "x") << shape[i];
    }
    out << ']';
    return out.str();
}

std::size_t shape_numel(const Shape& shape) {
    std::size_t n = 1;
    for (std::size_t d : shape) {
        n *= d;
    }
    return n;
}

namespace detail {

std::vector<double>& TensorImpl::grad_buffer() {
    if (grad.empty()) {
        grad.assign(data.size(), 0.0);
    }
    return grad;
}

void TensorImpl::accumulate_grad(std::span<const double> delta) {
    auto& g = grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) {
        g[i] += delta[i];
    }
}

}  // namespace detail

namespace {

void validate_shape(const Shape& shape) {
    if (shape.empty()) {
        throw DimensionError("tensor shape must have at least one dimension");
    }
    for (std::size_t d : shape) {
        if (d == 0) {
            throw DimensionError("tensor dimensions must be positive, got " +
                                 shape_to_string(shape));
        }
    }
}

const detail::TensorImpl& require(const std::shared_ptr<detail::TensorImpl>& impl) {
    if (!impl) {
        throw Error("use of an undefined tensor");
    }
    return *impl;
}

}  // namespace

Tensor Tensor::zeros(Shape shape, bool requires_grad) { return full(std::move(shape), 0.0, requires_grad); }

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
    validate_shape(shape);
    auto impl = std::make_shared<detail::TensorImpl>();
    impl->data.assign(shape_numel(shape), value);
    impl->shape = std::move(shape);
    impl->requires_grad = requires_grad;
    return Tensor(std::move(impl));
}

Tensor Tensor::from_data(Shape shape, std::vector<double> values, bool requires_grad) {
    validate_shape(shape);
    if (shape_numel(shape) != values.size()) {
        throw DimensionError("shape " + shape_to_string(shape) + " needs " +
                             std::to_string(shape_numel(shape)) + " elements, got " +
                             std::to_string(values.size()));
    }
    auto impl = std::make_shared<detail::TensorImpl>();
    impl->shape = std::move(shape);
    impl->data = std::move(values);
    impl->requires_grad = requires_grad;
    return Tensor(std::move(impl));
}

Tensor Tensor::scalar(double value, bool requires_grad) { return full({1}, value, requires_grad); }

const Shape& Tensor::shape() const { return require(impl_).shape; }

std::size_t Tensor::dim(std::size_t axis) const {
    const Shape& s = shape();
    if (axis >= s.size()) {
        throw IndexError("axis " + std::to_string(axis) + " out of range for shape " +
                         shape_to_string(s));
    }
    return s[axis];
}

std::size_t Tensor::numel() const { return require(impl_).data.size(); }

std::span<const double> Tensor::data() const { return require(impl_).data; }

std::span<double> Tensor::data_mut() {
    require(impl_);
    return impl_->data;
}

double Tensor::at(std::size_t flat_index) const {
    const auto& d = require(impl_).data;
    if (flat_index >= d.size()) {
        throw IndexError("flat index " + std::to_string(flat_index) + " out of range for " +
                         std::to_string(d.size()) + " elements");
    }
    return d[flat_index];
}

double Tensor::item() const {
    if (numel() != 1) {
        throw DimensionError("item() needs a single-element tensor, got shape " +
                             shape_to_string(shape()));
    }
    return impl_->data[0];
}

bool Tensor::requires_grad() const { return require(impl_).requires_grad; }

void Tensor::set_requires_grad(bool value) {
    require(impl_);
    if (!impl_->leaf) {
        throw TapeError("requires_grad can only be changed on leaf tensors");
    }
    impl_->requires_grad = value;
    if (!value) {
        impl_->grad.clear();
    }
}

bool Tensor::is_leaf() const { return require(impl_).leaf; }

bool Tensor::has_grad() const { return !require(impl_).grad.empty(); }

std::span<const double> Tensor::grad() const { return require(impl_).grad; }

void Tensor::zero_grad() {
    require(impl_);
    std::fill(impl_->grad.begin(), impl_->grad.end(), 0.0);
}

void Tensor::clear_grad() {
    require(impl_);
    std::vector<double>().swap(impl_->grad);
}

Tensor Tensor::detach(bool requires_grad) const {
    const auto& src = require(impl_);
    return from_data(src.shape, src.data, requires_grad);
}

// ---------------------------------------------------------------------------
// Tape

namespace {
thread_local Tape* g_current_tape = nullptr;
thread_local FlopCounterScope* g_flop_scope = nullptr;
std::atomic<bool> g_finite_checks{true};
}  // namespace

void Tape::record(std::string_view op, std::shared_ptr<detail::TensorImpl> output, BackwardFn fn) {
    if (consumed_) {
        throw TapeError("cannot record '" + std::string(op) + "' on a consumed tape");
    }
    output->leaf = false;
    output->requires_grad = true;
    output->producer = this;
    entries_.push_back(Entry{std::string(op), std::move(output), std::move(fn)});
}

void Tape::backward(const Tensor& loss) {
    if (consumed_) {
        throw TapeError("backward called twice: tape already consumed");
    }
    if (!loss.defined() || loss.numel() != 1) {
        throw TapeError("backward root must be a scalar, got shape " +
                        (loss.defined() ? shape_to_string(loss.shape()) : std::string("<undefined>")));
    }
    if (loss.impl()->producer != this) {
        throw TapeError("backward root was not recorded on this tape");
    }
    loss.impl()->grad_buffer()[0] += 1.0;
    for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) {
        if (!it->output->grad.empty()) {
            it->fn();
        }
        std::vector<double>().swap(it->output->grad);
    }
    entries_.clear();
    consumed_ = true;
}

std::vector<std::string> Tape::op_names() const {
    std::vector<std::string> names;
    names.reserve(entries_.size());
    for (const auto& e : entries_) {
        names.push_back(e.op);
    }
    return names;
}

TapeScope::TapeScope(Tape& tape) : previous_(g_current_tape) { g_current_tape = &tape; }

TapeScope::~TapeScope() { g_current_tape = previous_; }

NoTapeScope::NoTapeScope() : previous_(g_current_tape) { g_current_tape = nullptr; }

NoTapeScope::~NoTapeScope() { g_current_tape = previous_; }

Tape* current_tape() { return g_current_tape; }

std::uint64_t content_hash(const Tensor& t) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](std::uint64_t v) {
        for (int i = 0; i < 8; ++i) {
            h ^= (v >> (8 * i)) & 0xff;
            h *= 0x100000001b3ULL;
        }
    };
    for (std::size_t d : t.shape()) {
        mix(d);
    }
    for (double v : t.data()) {
        mix(std::bit_cast<std::uint64_t>(v));
    }
    return h;
}

FlopCounterScope::FlopCounterScope() : previous_(g_flop_scope) { g_flop_scope = this; }

FlopCounterScope::~FlopCounterScope() { g_flop_scope = previous_; }

void count_matmul_flops(std::uint64_t flops, bool backward) {
    for (FlopCounterScope* s = g_flop_scope; s != nullptr; s = s->previous_) {
        (backward ? s->counts_.backward : s->counts_.forward) += flops;
    }
}

void set_finite_checks(bool enabled) { g_finite_checks.store(enabled, std::memory_order_relaxed); }

bool finite_checks_enabled() { return g_finite_checks.load(std::memory_order_relaxed); }

void check_finite(const Tensor& t, std::string_view op) {
    if (!finite_checks_enabled()) {
        return;
    }
    const auto d = t.data();
    // Branch-free scan of the exponent bits; only the slow path locates the element.
    constexpr std::uint64_t kExp = 0x7ff0000000000000ULL;
    std::uint64_t bad = 0;
    for (const double v : d) {
        bad |= static_cast<std::uint64_t>((std::bit_cast<std::uint64_t>(v) & kExp) == kExp);
    }
    if (bad == 0) {
        return;
    }
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (!std::isfinite(d[i])) {
            throw NumericError("non-finite value " + std::to_string(d[i]) + " at element " +
                               std::to_string(i) + " of '" + std::string(op) + "' output " +
                               shape_to_string(t.shape()));
        }
    }
}

}  // namespace projcomp
