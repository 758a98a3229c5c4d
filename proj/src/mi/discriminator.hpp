#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "corpus/dataset.hpp"
#include "corpus/feature_store.hpp"
#include "nn/adam.hpp"
#include "seqmodel/model_config.hpp"

namespace vidial {

// Width of the fusion head's hidden layer.
inline constexpr int kFusionWidth = 512;

nn::RowVector mean_pool_objects(const nn::Matrix& objects);

// Visual input of the discriminator for one image: the coarse row in CV mode,
// the mean-pooled object set in FV mode.
nn::RowVector discriminator_visual(Mode mode, std::size_t coarse_idx, std::size_t object_idx,
                                   const CoarseFeatureStore* coarse, const ObjectFeatureStore* objects);

// q(f, x): a dedicated text encoder (token + position embeddings and an
// encoder stack) followed by a per-token fusion head
// sigmoid(w2 . tanh(W1 [t_k; f] + b1) + b2).
// cfg.mode selects the visual kind (CV or FV); cfg.d_visual is its width.
class Discriminator {
 public:
  explicit Discriminator(const ModelConfig& cfg);

  const ModelConfig& config() const { return cfg_; }
  const nn::ParamSet& layout() const { return layout_; }

  nn::ParamSet init_params(std::uint64_t seed) const;
  void zero_head(nn::ParamSet& p) const;

  // Fusion-head logits z_k, one per utterance token.
  std::vector<double> token_logits(const nn::ParamSet& p, std::span<const TokenId> utterance,
                                   const nn::RowVector& visual) const;

  // (1/n) sum_k ln q_k.
  double q_score(const nn::ParamSet& p, std::span<const TokenId> utterance, const nn::RowVector& visual) const;

  // Returns q_score and adds upstream * d(q_score)/dθ into grads.
  double q_score_and_gradient(const nn::ParamSet& p, std::span<const TokenId> utterance, const nn::RowVector& visual,
                              double upstream, nn::ParamSet& grads, Rng* dropout_rng = nullptr) const;

  // Tensors holding the text encoder (token/position embeddings and stack).
  std::vector<nn::ParamId> encoder_tensors() const;

 private:
  std::span<const TokenId> clip(std::span<const TokenId> utterance) const;
  nn::Matrix embed(const nn::ParamSet& p, std::span<const TokenId> tokens) const;

  ModelConfig cfg_;
  nn::ParamSet layout_;
  nn::ParamId token_embed_ = 0;
  nn::ParamId position_embed_ = 0;
  nn::EncoderStack encoder_;
  nn::Linear hidden_;
  nn::Linear score_;
};

// ln(1 - e^s) for s < 0.
double log1mexp(double s);

enum class DiscObjective { Bce, LogRatio };
DiscObjective parse_objective(std::string_view text);

// Uniform draw without replacement of k distinct image ids from the batch,
// excluding the positive's id.
std::vector<std::size_t> sample_negatives(Rng& rng, std::span<const std::size_t> batch_images,
                                          std::size_t positive, std::size_t k);

// Loss for one positive score against its negatives' scores, averaged over
// the (positive, negative) pairs; optionally returns d/ds of each score.
double pair_loss(double s_pos, std::span<const double> s_neg, DiscObjective objective, double* d_pos = nullptr,
                 std::vector<double>* d_neg = nullptr);

struct DiscExample {
  std::vector<TokenId> tokens;
  std::size_t image = 0;  // images with identical features share an id
  nn::RowVector visual;
};

// Every turn of every episode paired with its own image.
std::vector<DiscExample> discriminator_examples(const Dataset& dataset, Mode mode, const CoarseFeatureStore* coarse,
                                                const ObjectFeatureStore* objects);

struct DiscPair {
  std::size_t positive = 0;
  std::vector<std::size_t> negatives;  // example indices
};

double disc_loss(const Discriminator& disc, const nn::ParamSet& p, std::span<const DiscExample> examples,
                 std::span<const DiscPair> pairs, DiscObjective objective);

struct DiscTrainOptions {
  nn::AdamConfig adam;
  int max_steps = 2000;
  int batch_size = 16;
  std::size_t negatives = 1;
  DiscObjective objective = DiscObjective::Bce;
  std::uint64_t seed = 1;
};

struct DiscTrainResult {
  nn::ParamSet params;
  std::vector<double> loss_curve;
};

// Within-batch negative sampling. Parameters flagged 0 in `trainable` stay
// fixed (used when the text encoder is copied from the forward model).
DiscTrainResult train_discriminator(const Discriminator& disc, std::span<const DiscExample> examples,
                                    const DiscTrainOptions& options, const nn::ParamSet* init = nullptr,
                                    const std::vector<std::uint8_t>* trainable = nullptr,
                                    const std::function<void(int, double)>& on_step = {});

// Each example is scored against its own image and against one other image
// drawn from the set; a pair is classified as matched when exp(q_score) > 0.5.
double pair_accuracy(const Discriminator& disc, const nn::ParamSet& p, std::span<const DiscExample> examples,
                     std::uint64_t seed);

}  // namespace vidial
