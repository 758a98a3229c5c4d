#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "corpus/vocabulary.hpp"
#include "nn/param_set.hpp"
#include "seqmodel/model_config.hpp"

namespace vidial {

// Component tags stored in checkpoint headers.
namespace component {
inline constexpr const char* kForward = "forward";
inline constexpr const char* kBackward = "backward";
inline constexpr const char* kDiscriminator = "discriminator";
}  // namespace component

struct SavedModel {
  std::string component;
  ModelConfig config;
  Vocabulary vocab;
  nn::ParamSet params;
  nlohmann::json extra;  // component-specific header fields
};

void save_model(const std::filesystem::path& path, const SavedModel& model);

// Raises VersionMismatch when the stored component or mode differs from the
// expected ones, CorruptCheckpoint on any structural problem.
SavedModel load_model(const std::filesystem::path& path, const std::string& expected_component,
                      std::optional<Mode> expected_mode = std::nullopt);

SavedModel parse_model(std::span<const std::uint8_t> bytes, const std::string& expected_component,
                       std::optional<Mode> expected_mode = std::nullopt);

}  // namespace vidial
