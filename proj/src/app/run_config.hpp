#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "corpus/synthetic.hpp"
#include "decode/rerank.hpp"
#include "eval/adversarial.hpp"
#include "mi/discriminator.hpp"
#include "seqmodel/model_config.hpp"
#include "seqmodel/trainer.hpp"

namespace vidial {

// Every knob of a run. Config files hold `dotted.key = value` lines with `#`
// comments; unknown keys are rejected and paths resolve against the file's
// directory.
struct RunConfig {
  std::uint64_t seed = 1;

  SyntheticSpec synth;

  std::filesystem::path episodes;
  std::filesystem::path eval_episodes;  // defaults to episodes
  std::filesystem::path coarse;
  std::filesystem::path objects;
  std::size_t vocab_size = 10000;
  std::size_t min_freq = 1;

  ModelConfig model;  // vocab_size and d_visual are filled from the data

  TrainOptions train;

  std::size_t disc_negatives = 1;
  DiscObjective disc_objective = DiscObjective::Bce;
  bool disc_share_encoder = false;
  std::filesystem::path disc_forward_ckpt;

  std::filesystem::path forward_ckpt;
  std::size_t beam_size = 5;
  std::size_t nbest = 5;
  int decode_max_len = 0;

  bool mi = false;
  std::filesystem::path backward_ckpt;
  std::filesystem::path disc_ckpt;
  RerankWeights lambdas;

  bool adversarial = false;
  std::filesystem::path train_split;
  std::filesystem::path test_split;
  AdvConfig adv;

  RunConfig();

  // Applies one key; relative paths resolve against base_dir.
  void set(std::string_view key, std::string_view value, const std::filesystem::path& base_dir = {});
  void parse(std::string_view text, const std::filesystem::path& base_dir);

  static RunConfig load(const std::filesystem::path& path);
  static const std::vector<std::string>& keys();
};

// Honors VIDIAL_SEED when set.
void apply_seed_override(RunConfig& cfg);

}  // namespace vidial
