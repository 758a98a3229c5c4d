#include "seqmodel/model_io.hpp"

#include "common/binary_io.hpp"
#include "common/error.hpp"
#include "nn/checkpoint.hpp"

namespace vidial {

void save_model(const std::filesystem::path& path, const SavedModel& model) {
  nlohmann::ordered_json header;
  header["component"] = model.component;
  header["config"] = model.config.to_json();
  header["vocab"] = model.vocab.content_tokens();
  header["extra"] = model.extra.is_null() ? nlohmann::json::object() : model.extra;
  nn::write_checkpoint(path, header.dump(), model.params);
}

SavedModel parse_model(std::span<const std::uint8_t> bytes, const std::string& expected_component,
                       std::optional<Mode> expected_mode) {
  nn::CheckpointData data = nn::parse_checkpoint(bytes);
  SavedModel model;
  try {
    const auto header = nlohmann::json::parse(data.header);
    model.component = header.at("component").get<std::string>();
    if (model.component != expected_component) {
      fail(ErrorCode::VersionMismatch,
           "checkpoint holds a " + model.component + " model, expected " + expected_component);
    }
    model.config = ModelConfig::from_json(header.at("config"));
    const auto tokens = header.at("vocab").get<std::vector<std::string>>();
    model.vocab = Vocabulary::from_tokens(tokens);
    model.extra = header.value("extra", nlohmann::json::object());
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::CorruptCheckpoint, std::string("bad checkpoint header: ") + e.what());
  }
  if (expected_mode && model.config.mode != *expected_mode) {
    fail(ErrorCode::VersionMismatch, "checkpoint mode " + std::string(to_string(model.config.mode)) +
                                         " does not match requested " + std::string(to_string(*expected_mode)));
  }
  model.params = std::move(data.params);
  return model;
}

SavedModel load_model(const std::filesystem::path& path, const std::string& expected_component,
                      std::optional<Mode> expected_mode) {
  return parse_model(read_file_bytes(path), expected_component, expected_mode);
}

}  // namespace vidial
