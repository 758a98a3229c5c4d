#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "corpus/dataset.hpp"
#include "corpus/feature_store.hpp"
#include "corpus/vocabulary.hpp"
#include "decode/generate.hpp"
#include "nn/adam.hpp"
#include "nn/transformer.hpp"

namespace vidial {

struct AdvConfig {
  int layers = 2;
  int heads = 4;
  int width = 256;
  int ffn_dim = 512;
  double dropout = 0.1;
  int max_turns = 16;  // turns per example, oldest dropped beyond this
  int steps = 400;
  int batch_size = 16;
  double peak_lr = 5e-4;
  int warmup_steps = 50;
  std::uint64_t seed = 1;
};

// One dialog seen by the evaluator: per-turn tokens and the image vector of
// that turn. The last turn is the response under judgement.
struct AdvExample {
  std::vector<std::vector<TokenId>> turns;
  std::vector<nn::RowVector> visuals;
  double label = 0.0;  // 1 for a human (gold) final turn
};

// Per-turn vector W f_k + b + mean token embedding, [CLS] in front, learned
// positions, a transformer encoder and a sigmoid on the [CLS] row.
class AdvDiscriminator {
 public:
  AdvDiscriminator(const AdvConfig& cfg, int vocab_size, int d_visual);

  const nn::ParamSet& layout() const { return layout_; }
  nn::ParamSet init_params(std::uint64_t seed) const;

  double logit(const nn::ParamSet& p, const AdvExample& ex) const;
  double probability(const nn::ParamSet& p, const AdvExample& ex) const;
  // Binary cross-entropy of one example; adds scale * gradient into grads.
  double bce_and_gradient(const nn::ParamSet& p, const AdvExample& ex, double scale, nn::ParamSet& grads,
                          Rng* dropout_rng) const;

 private:
  nn::Matrix inputs(const nn::ParamSet& p, const AdvExample& ex) const;

  AdvConfig cfg_;
  int vocab_size_;
  int d_visual_;
  nn::ParamSet layout_;
  nn::ParamId cls_ = 0;
  nn::ParamId position_ = 0;
  nn::ParamId token_ = 0;
  nn::Linear visual_;
  nn::EncoderStack encoder_;
  nn::Linear head_;
};

nn::ParamSet train_adversarial(const AdvDiscriminator& disc, const std::vector<AdvExample>& examples,
                               const AdvConfig& cfg);

std::set<std::string> read_split(const std::filesystem::path& path);  // one episode id per line

struct AdvInputs {
  const Dataset* gold = nullptr;
  const Vocabulary* vocab = nullptr;
  const CoarseFeatureStore* coarse = nullptr;   // used when present
  const ObjectFeatureStore* objects = nullptr;  // pooled otherwise
};

struct AdvSplitExamples {
  std::vector<AdvExample> train;
  std::vector<AdvExample> test;
};

// Responses of each split are shuffled; the first half keep the gold final
// turn (label 1) and the rest carry the generated one (label 0). An odd item
// is dropped. SplitOverlap / Unbalanced on bad splits.
AdvSplitExamples build_adversarial_examples(const AdvInputs& inputs, const std::vector<ResponseRecord>& responses,
                                            const std::set<std::string>& train_ids,
                                            const std::set<std::string>& test_ids, std::uint64_t seed);

// Fraction of generated test examples the trained evaluator calls human.
double adversarial_eval(const AdvInputs& inputs, const std::vector<ResponseRecord>& responses,
                        const std::set<std::string>& train_ids, const std::set<std::string>& test_ids,
                        const AdvConfig& cfg);

}  // namespace vidial
