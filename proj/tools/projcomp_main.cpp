// Copyright 2026 The projcomp Authors
// SPDX-License-Identifier: Apache-2.0

#include <iostream>

#include "projcomp/cli.hpp"
#include "projcomp/runtime.hpp"

int main(int argc, char** argv) {
    projcomp::tune_allocator();
    return projcomp::cli_dispatch(argc, argv, std::cout, std::cerr);
}
