// Copyright 2026 The projcomp Authors
// SPDX-License-Identifier: Apache-2.0

// Writes a seeded synthetic text corpus for training runs.

#include <CLI11.hpp>

#include <iostream>

#include "projcomp/common.hpp"
#include "projcomp/config_io.hpp"
#include "projcomp/corpus.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Generate a synthetic training corpus", "make_corpus"};
    std::size_t bytes = 1 << 20;
    std::uint64_t seed = 0;
    std::string out;
    app.add_option("--bytes", bytes, "Corpus size in bytes");
    app.add_option("--seed", seed, "Grammar sampling seed");
    app.add_option("--out", out, "Output file")->required();
    CLI11_PARSE(app, argc, argv);
    try {
        projcomp::write_text_atomic(out, projcomp::synthetic_corpus(bytes, seed));
    } catch (const projcomp::Error& e) {
        std::cerr << e.what() << "\n";
        return 4;
    }
    return 0;
}
