#include "seqmodel/model_config.hpp"

#include <cctype>

#include "common/error.hpp"
#include "corpus/vocabulary.hpp"

namespace vidial {

std::string_view to_string(Mode mode) {
  switch (mode) {
    case Mode::NV: return "NV";
    case Mode::CV: return "CV";
    case Mode::FV: return "FV";
  }
  return "?";
}

Mode parse_mode(std::string_view text) {
  std::string lower;
  for (char c : text) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (lower == "nv") return Mode::NV;
  if (lower == "cv") return Mode::CV;
  if (lower == "fv") return Mode::FV;
  fail(ErrorCode::Usage, "unknown mode '" + std::string(text) + "' (expected nv, cv or fv)");
}

ModelConfig ModelConfig::tiny(Mode mode, int vocab_size, int d_visual) {
  ModelConfig c;
  c.mode = mode;
  c.enc_layers = 2;
  c.dec_layers = 2;
  c.heads = 2;
  c.d_model = 32;
  c.ffn_dim = 64;
  c.dropout = 0.0;
  c.max_src_len = 64;
  c.max_turns = 8;
  c.max_tgt_len = 8;
  c.vocab_size = vocab_size;
  c.d_visual = mode == Mode::NV ? 0 : d_visual;
  return c;
}

void ModelConfig::validate() const {
  auto bad = [](const std::string& why) { fail(ErrorCode::Usage, "model config: " + why); };
  if (enc_layers < 1 || dec_layers < 1) bad("layer counts must be >= 1");
  if (heads < 1 || d_model < 1 || d_model % heads != 0) bad("d_model must be a positive multiple of heads");
  if (ffn_dim < 1) bad("ffn_dim must be >= 1");
  if (!(dropout >= 0.0 && dropout < 1.0)) bad("dropout must be in [0, 1)");
  if (max_src_len < 8) bad("max_src_len must be >= 8");
  if (max_turns < 1) bad("max_turns must be >= 1");
  if (max_tgt_len < 1) bad("max_tgt_len must be >= 1");
  if (vocab_size <= special::kCount) bad("vocab_size must exceed the special block");
  if (mode == Mode::NV && d_visual != 0) bad("NV mode takes no visual features (d_visual must be 0)");
  if (mode != Mode::NV && d_visual < 1) bad("CV/FV modes need d_visual >= 1");
}

nlohmann::json ModelConfig::to_json() const {
  return {{"mode", std::string(to_string(mode))},
          {"enc_layers", enc_layers},
          {"dec_layers", dec_layers},
          {"heads", heads},
          {"d_model", d_model},
          {"ffn_dim", ffn_dim},
          {"dropout", dropout},
          {"max_src_len", max_src_len},
          {"max_turns", max_turns},
          {"max_tgt_len", max_tgt_len},
          {"vocab_size", vocab_size},
          {"d_visual", d_visual}};
}

ModelConfig ModelConfig::from_json(const nlohmann::json& j) {
  try {
    ModelConfig c;
    c.mode = parse_mode(j.at("mode").get<std::string>());
    c.enc_layers = j.at("enc_layers").get<int>();
    c.dec_layers = j.at("dec_layers").get<int>();
    c.heads = j.at("heads").get<int>();
    c.d_model = j.at("d_model").get<int>();
    c.ffn_dim = j.at("ffn_dim").get<int>();
    c.dropout = j.at("dropout").get<double>();
    c.max_src_len = j.at("max_src_len").get<int>();
    c.max_turns = j.at("max_turns").get<int>();
    c.max_tgt_len = j.at("max_tgt_len").get<int>();
    c.vocab_size = j.at("vocab_size").get<int>();
    c.d_visual = j.at("d_visual").get<int>();
    return c;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::CorruptCheckpoint, std::string("model config: ") + e.what());
  }
}

}  // namespace vidial
