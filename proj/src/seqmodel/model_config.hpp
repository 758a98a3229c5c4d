#pragma once

#include <json.hpp>
#include <string>
#include <string_view>

#include "nn/transformer.hpp"

namespace vidial {

enum class Mode { NV, CV, FV };

std::string_view to_string(Mode mode);
Mode parse_mode(std::string_view text);  // "nv"/"cv"/"fv", any case

struct ModelConfig {
  Mode mode = Mode::NV;
  int enc_layers = 3;
  int dec_layers = 3;
  int heads = 8;
  int d_model = 512;
  int ffn_dim = 2048;
  double dropout = 0.1;
  int max_src_len = 256;
  int max_turns = 16;
  int max_tgt_len = 32;
  int vocab_size = 0;
  int d_visual = 0;  // 0 for NV

  // 2 layers, 2 heads, d_model 32.
  static ModelConfig tiny(Mode mode, int vocab_size, int d_visual);

  void validate() const;

  nn::StackConfig encoder_stack() const { return {enc_layers, d_model, heads, ffn_dim, dropout}; }
  nn::StackConfig decoder_stack() const { return {dec_layers, d_model, heads, ffn_dim, dropout}; }

  nlohmann::json to_json() const;
  static ModelConfig from_json(const nlohmann::json& j);

  bool operator==(const ModelConfig&) const = default;
};

}  // namespace vidial
