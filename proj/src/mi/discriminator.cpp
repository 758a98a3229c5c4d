#include "mi/discriminator.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "common/error.hpp"

namespace vidial {

namespace {

constexpr double kEmbedStd = 0.1;

double log_sigmoid(double z) { return z >= 0.0 ? -std::log1p(std::exp(-z)) : z - std::log1p(std::exp(z)); }

// sigma(-z), the derivative of ln sigma(z).
double sigmoid_neg(double z) {
  if (z >= 0.0) {
    const double e = std::exp(-z);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(z));
}

}  // namespace

nn::RowVector mean_pool_objects(const nn::Matrix& objects) {
  if (objects.rows() == 0) fail(ErrorCode::EmptyObjectSet, "cannot pool an empty object set");
  return objects.colwise().mean();
}

nn::RowVector discriminator_visual(Mode mode, std::size_t coarse_idx, std::size_t object_idx,
                                   const CoarseFeatureStore* coarse, const ObjectFeatureStore* objects) {
  if (mode == Mode::CV) {
    if (coarse == nullptr) fail(ErrorCode::Usage, "CV discriminator needs the coarse feature store");
    if (coarse_idx >= coarse->count()) fail(ErrorCode::IndexOutOfRange, "coarse index out of range");
    const auto row = coarse->row(coarse_idx);
    nn::RowVector v(static_cast<Eigen::Index>(row.size()));
    for (std::size_t i = 0; i < row.size(); ++i) v[static_cast<Eigen::Index>(i)] = row[i];
    return v;
  }
  if (mode == Mode::FV) {
    if (objects == nullptr) fail(ErrorCode::Usage, "FV discriminator needs the object feature store");
    if (object_idx >= objects->count()) fail(ErrorCode::IndexOutOfRange, "object index out of range");
    const std::size_t m = objects->objects_in(object_idx);
    const auto data = objects->objects(object_idx);
    nn::Matrix rows(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(objects->dim()));
    for (Eigen::Index k = 0; k < rows.size(); ++k) rows.data()[k] = data[static_cast<std::size_t>(k)];
    return mean_pool_objects(rows);
  }
  fail(ErrorCode::ModeMismatch, "discriminators exist only for CV and FV");
}

Discriminator::Discriminator(const ModelConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  if (cfg_.mode == Mode::NV || cfg_.d_visual <= 0) {
    fail(ErrorCode::ModeMismatch, "a discriminator needs CV or FV mode with d_visual > 0");
  }
  const int d = cfg_.d_model;
  token_embed_ = layout_.add("embed.token", cfg_.vocab_size, d);
  position_embed_ = layout_.add("embed.position", cfg_.max_src_len, d);
  encoder_ = nn::EncoderStack(layout_, "enc", cfg_.encoder_stack());
  hidden_ = nn::Linear::create(layout_, "head.hidden", d + cfg_.d_visual, kFusionWidth);
  score_ = nn::Linear::create(layout_, "head.score", kFusionWidth, 1);
}

nn::ParamSet Discriminator::init_params(std::uint64_t seed) const {
  nn::ParamSet p = layout_.zeros_like();
  Rng rng(seed);
  nn::init_normal(p[token_embed_], kEmbedStd, rng);
  nn::init_normal(p[position_embed_], kEmbedStd, rng);
  encoder_.init(p, rng);
  hidden_.init(p, rng);
  score_.init(p, rng);
  p.round_to_float();
  return p;
}

void Discriminator::zero_head(nn::ParamSet& p) const {
  for (nn::ParamId id : {hidden_.weight, hidden_.bias, score_.weight, score_.bias}) p[id].setZero();
}

std::vector<nn::ParamId> Discriminator::encoder_tensors() const {
  std::vector<nn::ParamId> out{token_embed_, position_embed_};
  for (nn::ParamId i = 0; i < layout_.size(); ++i) {
    if (layout_.name(i).rfind("enc.", 0) == 0) out.push_back(i);
  }
  return out;
}

std::span<const TokenId> Discriminator::clip(std::span<const TokenId> utterance) const {
  if (utterance.empty()) fail(ErrorCode::EmptyUtterance, "cannot score an empty utterance");
  return utterance.first(std::min<std::size_t>(utterance.size(), static_cast<std::size_t>(cfg_.max_src_len)));
}

nn::Matrix Discriminator::embed(const nn::ParamSet& p, std::span<const TokenId> tokens) const {
  nn::Matrix x(static_cast<Eigen::Index>(tokens.size()), cfg_.d_model);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    if (tokens[i] < 0 || tokens[i] >= cfg_.vocab_size) fail(ErrorCode::IndexOutOfRange, "token id out of range");
    x.row(r) = p[token_embed_].row(tokens[i]) + p[position_embed_].row(r);
  }
  return x;
}

std::vector<double> Discriminator::token_logits(const nn::ParamSet& p, std::span<const TokenId> utterance,
                                                const nn::RowVector& visual) const {
  const auto tokens = clip(utterance);
  if (visual.size() != cfg_.d_visual) fail(ErrorCode::DimMismatch, "visual vector has the wrong dimension");
  const nn::Matrix enc = encoder_.forward(p, embed(p, tokens), {}, nullptr, nullptr);
  nn::Matrix fused(enc.rows(), cfg_.d_model + cfg_.d_visual);
  fused.leftCols(cfg_.d_model) = enc;
  fused.rightCols(cfg_.d_visual).rowwise() = visual;
  const nn::Matrix z = score_.forward(p, hidden_.forward(p, fused).array().tanh().matrix());
  return {z.data(), z.data() + z.size()};
}

double Discriminator::q_score(const nn::ParamSet& p, std::span<const TokenId> utterance,
                              const nn::RowVector& visual) const {
  const auto z = token_logits(p, utterance, visual);
  double total = 0.0;
  for (double v : z) total += log_sigmoid(v);
  return total / static_cast<double>(z.size());
}

double Discriminator::q_score_and_gradient(const nn::ParamSet& p, std::span<const TokenId> utterance,
                                           const nn::RowVector& visual, double upstream, nn::ParamSet& grads,
                                           Rng* dropout_rng) const {
  const auto tokens = clip(utterance);
  if (visual.size() != cfg_.d_visual) fail(ErrorCode::DimMismatch, "visual vector has the wrong dimension");
  const double n = static_cast<double>(tokens.size());

  const nn::Matrix x = embed(p, tokens);
  nn::EncoderStack::Cache cache;
  const nn::Matrix enc = encoder_.forward(p, x, {}, &cache, dropout_rng);
  nn::Matrix fused(enc.rows(), cfg_.d_model + cfg_.d_visual);
  fused.leftCols(cfg_.d_model) = enc;
  fused.rightCols(cfg_.d_visual).rowwise() = visual;
  const nn::Matrix act = hidden_.forward(p, fused).array().tanh().matrix();
  const nn::Matrix z = score_.forward(p, act);

  double score = 0.0;
  nn::Matrix dz(z.rows(), 1);
  for (Eigen::Index k = 0; k < z.rows(); ++k) {
    score += log_sigmoid(z(k, 0));
    dz(k, 0) = upstream * sigmoid_neg(z(k, 0)) / n;
  }
  const nn::Matrix dact = score_.backward(p, act, dz, grads);
  const nn::Matrix dpre = (dact.array() * (1.0 - act.array().square())).matrix();
  const nn::Matrix dfused = hidden_.backward(p, fused, dpre, grads);
  const nn::Matrix dx = encoder_.backward(p, cache, dfused.leftCols(cfg_.d_model), grads);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    grads[token_embed_].row(tokens[i]) += dx.row(r);
    grads[position_embed_].row(r) += dx.row(r);
  }
  return score / n;
}

double log1mexp(double s) {
  if (s > -M_LN2) return std::log(-std::expm1(s));
  return std::log1p(-std::exp(s));
}

DiscObjective parse_objective(std::string_view text) {
  if (text == "bce") return DiscObjective::Bce;
  if (text == "log_ratio") return DiscObjective::LogRatio;
  fail(ErrorCode::Usage, "unknown discriminator objective '" + std::string(text) + "'");
}

std::vector<std::size_t> sample_negatives(Rng& rng, std::span<const std::size_t> batch_images, std::size_t positive,
                                          std::size_t k) {
  std::vector<std::size_t> pool(batch_images.begin(), batch_images.end());
  std::sort(pool.begin(), pool.end());
  pool.erase(std::unique(pool.begin(), pool.end()), pool.end());
  pool.erase(std::remove(pool.begin(), pool.end(), positive), pool.end());
  if (pool.empty() || k > pool.size()) {
    fail(ErrorCode::NoNegativesAvailable, "batch has " + std::to_string(pool.size()) + " candidate negatives, " +
                                              std::to_string(k) + " requested");
  }
  for (std::size_t i = 0; i < k; ++i) std::swap(pool[i], pool[i + rng.below(pool.size() - i)]);
  pool.resize(k);
  return pool;
}

double pair_loss(double s_pos, std::span<const double> s_neg, DiscObjective objective, double* d_pos,
                 std::vector<double>* d_neg) {
  if (s_neg.empty()) fail(ErrorCode::NoNegativesAvailable, "positive without negatives");
  const double m = static_cast<double>(s_neg.size());
  double loss = 0.0;
  if (d_neg != nullptr) d_neg->assign(s_neg.size(), 0.0);
  for (std::size_t i = 0; i < s_neg.size(); ++i) {
    if (objective == DiscObjective::Bce) {
      loss -= s_pos + log1mexp(s_neg[i]);
      if (d_neg != nullptr) (*d_neg)[i] = 1.0 / (m * std::expm1(-s_neg[i]));
    } else {
      loss -= s_pos - s_neg[i];
      if (d_neg != nullptr) (*d_neg)[i] = 1.0 / m;
    }
  }
  if (d_pos != nullptr) *d_pos = -1.0;
  return loss / m;
}

std::vector<DiscExample> discriminator_examples(const Dataset& dataset, Mode mode, const CoarseFeatureStore* coarse,
                                                const ObjectFeatureStore* objects) {
  std::map<std::vector<double>, std::size_t> identity;
  std::vector<DiscExample> out;
  for (const Episode& ep : dataset.episodes) {
    for (const Turn& turn : ep.turns) {
      DiscExample ex;
      ex.tokens = turn.tokens;
      ex.visual = discriminator_visual(mode, turn.coarse_idx, turn.object_idx, coarse, objects);
      std::vector<double> key;
      if (mode == Mode::CV) {
        key.assign(ex.visual.data(), ex.visual.data() + ex.visual.size());
      } else {
        const auto data = objects->objects(turn.object_idx);
        key.assign(data.begin(), data.end());
      }
      const std::size_t image = mode == Mode::CV ? turn.coarse_idx : turn.object_idx;
      ex.image = identity.emplace(std::move(key), image).first->second;
      out.push_back(std::move(ex));
    }
  }
  return out;
}

double disc_loss(const Discriminator& disc, const nn::ParamSet& p, std::span<const DiscExample> examples,
                 std::span<const DiscPair> pairs, DiscObjective objective) {
  if (pairs.empty()) fail(ErrorCode::NoNegativesAvailable, "no positive pairs");
  double total = 0.0;
  std::size_t count = 0;
  for (const DiscPair& pair : pairs) {
    const DiscExample& pos = examples[pair.positive];
    const double s_pos = disc.q_score(p, pos.tokens, pos.visual);
    std::vector<double> s_neg;
    for (std::size_t n : pair.negatives) s_neg.push_back(disc.q_score(p, pos.tokens, examples[n].visual));
    total += pair_loss(s_pos, s_neg, objective) * static_cast<double>(s_neg.size());
    count += s_neg.size();
  }
  return total / static_cast<double>(count);
}

DiscTrainResult train_discriminator(const Discriminator& disc, std::span<const DiscExample> examples,
                                    const DiscTrainOptions& options, const nn::ParamSet* init,
                                    const std::vector<std::uint8_t>* trainable,
                                    const std::function<void(int, double)>& on_step) {
  if (examples.empty()) fail(ErrorCode::EmptyDataset, "no discriminator examples");
  if (options.batch_size < 2 || options.max_steps < 0 || options.negatives < 1) {
    fail(ErrorCode::Usage, "discriminator training needs batch_size >= 2 and negatives >= 1");
  }
  {
    std::vector<std::size_t> ids;
    for (const auto& ex : examples) ids.push_back(ex.image);
    std::sort(ids.begin(), ids.end());
    if (std::unique(ids.begin(), ids.end()) - ids.begin() < 2) {
      fail(ErrorCode::NoNegativesAvailable, "training data holds fewer than two distinct images");
    }
  }

  DiscTrainResult result;
  result.params = init != nullptr ? *init : disc.init_params(options.seed);
  nn::Adam adam(result.params, options.adam);
  nn::ParamSet grads = disc.layout().zeros_like();

  Rng order_rng(mix_seed(options.seed, 0x6f72646572ULL));
  Rng negative_rng(mix_seed(options.seed, 0x6e6567ULL));
  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), 0);
  std::size_t cursor = order.size();

  for (int step = 1; step <= options.max_steps; ++step) {
    std::vector<std::size_t> batch;
    while (batch.size() < static_cast<std::size_t>(options.batch_size) && batch.size() < examples.size()) {
      if (cursor == order.size()) {
        order_rng.shuffle(std::span<std::size_t>(order));
        cursor = 0;
      }
      batch.push_back(order[cursor++]);
    }
    std::vector<std::size_t> batch_images;
    for (std::size_t i : batch) batch_images.push_back(examples[i].image);
    std::vector<std::size_t> distinct = batch_images;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

    // Pairs for this step; an image id maps to its first batch member.
    std::vector<DiscPair> pairs;
    std::size_t pair_count = 0;
    for (std::size_t b = 0; b < batch.size(); ++b) {
      const std::size_t available = distinct.size() - 1;
      if (available == 0) break;
      const std::size_t k = std::min(options.negatives, available);
      DiscPair pair{batch[b], {}};
      for (std::size_t image : sample_negatives(negative_rng, batch_images, batch_images[b], k)) {
        const auto at = std::find(batch_images.begin(), batch_images.end(), image) - batch_images.begin();
        pair.negatives.push_back(batch[static_cast<std::size_t>(at)]);
      }
      pair_count += pair.negatives.size();
      pairs.push_back(std::move(pair));
    }

    grads.set_zero();
    Rng dropout_rng(mix_seed(options.seed, static_cast<std::uint64_t>(step)));
    double loss = 0.0;
    for (const DiscPair& pair : pairs) {
      const DiscExample& pos = examples[pair.positive];
      const double weight = static_cast<double>(pair.negatives.size()) / static_cast<double>(pair_count);
      // Scores first, then one backward pass per score with its loss derivative.
      const double s_pos = disc.q_score(result.params, pos.tokens, pos.visual);
      std::vector<double> s_neg;
      for (std::size_t n : pair.negatives) s_neg.push_back(disc.q_score(result.params, pos.tokens, examples[n].visual));
      double d_pos = 0.0;
      std::vector<double> d_neg;
      loss += weight * pair_loss(s_pos, s_neg, options.objective, &d_pos, &d_neg);
      disc.q_score_and_gradient(result.params, pos.tokens, pos.visual, weight * d_pos, grads, &dropout_rng);
      for (std::size_t i = 0; i < pair.negatives.size(); ++i) {
        disc.q_score_and_gradient(result.params, pos.tokens, examples[pair.negatives[i]].visual, weight * d_neg[i],
                                  grads, &dropout_rng);
      }
    }
    if (!std::isfinite(loss) || !grads.all_finite()) {
      fail(ErrorCode::NumericFailure, "non-finite discriminator loss at step " + std::to_string(step));
    }
    adam.step(result.params, grads, trainable);
    result.params.round_to_float();
    result.loss_curve.push_back(loss);
    if (on_step) on_step(step, loss);
  }
  return result;
}

double pair_accuracy(const Discriminator& disc, const nn::ParamSet& p, std::span<const DiscExample> examples,
                     std::uint64_t seed) {
  if (examples.empty()) fail(ErrorCode::EmptyDataset, "no examples to evaluate");
  Rng rng(seed);
  std::size_t correct = 0;
  for (const DiscExample& ex : examples) {
    std::vector<std::size_t> others;
    for (std::size_t j = 0; j < examples.size(); ++j) {
      if (examples[j].image != ex.image) others.push_back(j);
    }
    if (others.empty()) fail(ErrorCode::NoNegativesAvailable, "every example shows the same image");
    const DiscExample& other = examples[others[rng.below(others.size())]];
    if (disc.q_score(p, ex.tokens, ex.visual) > -M_LN2) ++correct;
    if (disc.q_score(p, ex.tokens, other.visual) <= -M_LN2) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(2 * examples.size());
}

}  // namespace vidial
