#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "nn/param_set.hpp"

namespace vidial::nn {

inline constexpr std::uint32_t kCheckpointVersion = 1;

// VCKPT1 container: magic, u32 version, u32-length-prefixed JSON header
// (component tag, config, vocabulary), u32 tensor count, then per tensor
// u32 name length, UTF-8 name, u32 rank, u32 dims, float32 payload.
struct CheckpointData {
  std::string header;
  ParamSet params;
};

std::vector<std::uint8_t> serialize_checkpoint(const std::string& header, const ParamSet& params);
CheckpointData parse_checkpoint(std::span<const std::uint8_t> bytes);

void write_checkpoint(const std::filesystem::path& path, const std::string& header, const ParamSet& params);
CheckpointData read_checkpoint(const std::filesystem::path& path);

// Copies tensors from `loaded` into `target` by name; every tensor of target
// must be present with identical shape, else CorruptCheckpoint.
void assign_by_name(ParamSet& target, const ParamSet& loaded);

}  // namespace vidial::nn
