// Copyright 2026 The projcomp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "projcomp/gpt.hpp"
#include "projcomp/projection.hpp"
#include "projcomp/trainer.hpp"

namespace projcomp {

// File layout (all integers little-endian):
//
//   bytes 0..7    magic "PROJCKPT"
//   bytes 8..11   format version (u32), currently 1
//   bytes 12..15  reserved, zero
//   bytes 16..23  header length H in bytes (u64)
//   next H bytes  JSON header
//   remainder     payload: float64 little-endian values of every tensor in
//                 header order (model tensors, then m and v per moment name)
//
// The header records the payload byte count and its FNV-1a 64 checksum.
inline constexpr std::uint32_t kCheckpointVersion = 1;

enum class CheckpointKind { dense, projected };

struct StoredTensor {
    std::string name;
    Tensor tensor;
    bool frozen = false;
};

struct Checkpoint {
    CheckpointKind kind = CheckpointKind::dense;
    ModelConfig config;                   // architecture the forward pass runs
    std::optional<CompressionPlan> plan;  // projected checkpoints only
    std::vector<StoredTensor> tensors;
    std::optional<TrainConfig> train_config;
    std::optional<TrainState> train_state;
};

Checkpoint make_checkpoint(const ModelConfig& config, const TransformerWeights& weights);
Checkpoint make_checkpoint(const ProjectedModel& model);

/// Rebuilds dense weights; frozen flags are restored from the file.
TransformerWeights dense_weights(const Checkpoint& ckpt);
/// Rebuilds a projected model: base frozen, projections and vectors trainable.
ProjectedModel projected_model(const Checkpoint& ckpt);

/// Serializes to bytes / parses bytes. Parsing throws FormatError on a bad
/// magic, unknown version, truncation, length or checksum mismatch.
std::string serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint deserialize_checkpoint(const std::string& bytes);

/// Atomic write (temporary file, then rename).
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

std::uint64_t fnv1a64(const void* data, std::size_t size);

}  // namespace projcomp
