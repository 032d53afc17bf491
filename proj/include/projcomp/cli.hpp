// Copyright 2026 The projcomp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>

#include "projcomp/config_io.hpp"

namespace projcomp {

// Process exit codes.
enum ExitCode : int {
    kExitOk = 0,
    kExitInternal = 1,
    kExitUsage = 2,
    kExitConfig = 3,
    kExitIo = 4,
    kExitFormat = 5,
    kExitNumeric = 6,
    kExitShape = 7,
};

/// Parses argv (argv[0] is the program name) and runs the subcommand.
int cli_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Runs a fully resolved experiment and writes `<output>.config.json`
/// beside its outputs. Throws projcomp::Error subclasses on failure.
void run_experiment(const ExperimentConfig& config, std::ostream& out);

}  // namespace projcomp
