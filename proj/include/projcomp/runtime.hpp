// Copyright 2026 The projcomp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

namespace projcomp {

/// Raises glibc's top pad, trim and mmap thresholds so the per-step activation
/// buffers are recycled from the heap instead of being mapped and unmapped
/// every step. No-op elsewhere. Call once from main().
void tune_allocator();

}  // namespace projcomp
