// Copyright 2026 The projcomp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace projcomp {

using Shape = std::vector<std::size_t>;
using TokenId = std::int32_t;

std::string shape_to_string(const Shape& shape);
std::size_t shape_numel(const Shape& shape);

// Error hierarchy. The CLI maps each category to a distinct exit code.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

class IndexError : public Error {
public:
    using Error::Error;
};

class NumericError : public Error {
public:
    using Error::Error;
};

class TapeError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class FormatError : public Error {
public:
    using Error::Error;
};

}  // namespace projcomp
