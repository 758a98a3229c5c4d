#include "eval/adversarial.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "common/binary_io.hpp"
#include "common/error.hpp"
#include "mi/discriminator.hpp"

namespace vidial {

namespace {

constexpr double kEmbedStd = 0.1;

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

}  // namespace

AdvDiscriminator::AdvDiscriminator(const AdvConfig& cfg, int vocab_size, int d_visual)
    : cfg_(cfg), vocab_size_(vocab_size), d_visual_(d_visual) {
  if (cfg_.width % cfg_.heads != 0 || cfg_.layers < 1 || cfg_.max_turns < 1 || vocab_size < 1 || d_visual < 1) {
    fail(ErrorCode::Usage, "invalid adversarial evaluator configuration");
  }
  cls_ = layout_.add("adv.cls", 1, cfg_.width);
  position_ = layout_.add("adv.position", cfg_.max_turns + 1, cfg_.width);
  token_ = layout_.add("adv.token", vocab_size, cfg_.width);
  visual_ = nn::Linear::create(layout_, "adv.visual", d_visual, cfg_.width);
  encoder_ = nn::EncoderStack(layout_, "adv.enc", {cfg_.layers, cfg_.width, cfg_.heads, cfg_.ffn_dim, cfg_.dropout});
  head_ = nn::Linear::create(layout_, "adv.head", cfg_.width, 1);
}

nn::ParamSet AdvDiscriminator::init_params(std::uint64_t seed) const {
  nn::ParamSet p = layout_.zeros_like();
  Rng rng(seed);
  nn::init_normal(p[cls_], kEmbedStd, rng);
  nn::init_normal(p[position_], kEmbedStd, rng);
  nn::init_normal(p[token_], kEmbedStd, rng);
  visual_.init(p, rng);
  encoder_.init(p, rng);
  head_.init(p, rng);
  p.round_to_float();
  return p;
}

nn::Matrix AdvDiscriminator::inputs(const nn::ParamSet& p, const AdvExample& ex) const {
  const auto turns = static_cast<Eigen::Index>(ex.turns.size());
  if (turns == 0 || turns > cfg_.max_turns || ex.visuals.size() != ex.turns.size()) {
    fail(ErrorCode::Usage, "adversarial example has an invalid turn count");
  }
  nn::Matrix visual(turns, d_visual_);
  for (Eigen::Index k = 0; k < turns; ++k) {
    if (ex.visuals[static_cast<std::size_t>(k)].size() != d_visual_) fail(ErrorCode::DimMismatch, "visual width");
    visual.row(k) = ex.visuals[static_cast<std::size_t>(k)];
  }
  nn::Matrix x(turns + 1, cfg_.width);
  x.row(0) = p[cls_].row(0);
  x.bottomRows(turns) = visual_.forward(p, visual);
  for (Eigen::Index k = 0; k < turns; ++k) {
    const auto& tokens = ex.turns[static_cast<std::size_t>(k)];
    if (tokens.empty()) continue;
    nn::RowVector mean = nn::RowVector::Zero(cfg_.width);
    for (TokenId t : tokens) mean += p[token_].row(t);
    x.row(k + 1) += mean / static_cast<double>(tokens.size());
  }
  x += p[position_].topRows(turns + 1);
  return x;
}

double AdvDiscriminator::logit(const nn::ParamSet& p, const AdvExample& ex) const {
  const nn::Matrix h = encoder_.forward(p, inputs(p, ex), {}, nullptr, nullptr);
  return head_.forward(p, h.topRows(1))(0, 0);
}

double AdvDiscriminator::probability(const nn::ParamSet& p, const AdvExample& ex) const {
  return sigmoid(logit(p, ex));
}

double AdvDiscriminator::bce_and_gradient(const nn::ParamSet& p, const AdvExample& ex, double scale,
                                          nn::ParamSet& grads, Rng* dropout_rng) const {
  const nn::Matrix x = inputs(p, ex);
  nn::EncoderStack::Cache cache;
  const nn::Matrix h = encoder_.forward(p, x, {}, &cache, dropout_rng);
  const nn::Matrix cls = h.topRows(1);
  const double z = head_.forward(p, cls)(0, 0);
  const double loss = softplus(z) - ex.label * z;

  nn::Matrix dz(1, 1);
  dz(0, 0) = scale * (sigmoid(z) - ex.label);
  nn::Matrix dh = nn::Matrix::Zero(h.rows(), h.cols());
  dh.topRows(1) = head_.backward(p, cls, dz, grads);
  const nn::Matrix dx = encoder_.backward(p, cache, dh, grads);

  const auto turns = x.rows() - 1;
  grads[cls_].row(0) += dx.row(0);
  grads[position_].topRows(turns + 1) += dx;
  nn::Matrix visual(turns, d_visual_);
  for (Eigen::Index k = 0; k < turns; ++k) visual.row(k) = ex.visuals[static_cast<std::size_t>(k)];
  visual_.backward(p, visual, dx.bottomRows(turns), grads);
  for (Eigen::Index k = 0; k < turns; ++k) {
    const auto& tokens = ex.turns[static_cast<std::size_t>(k)];
    for (TokenId t : tokens) grads[token_].row(t) += dx.row(k + 1) / static_cast<double>(tokens.size());
  }
  return loss;
}

nn::ParamSet train_adversarial(const AdvDiscriminator& disc, const std::vector<AdvExample>& examples,
                               const AdvConfig& cfg) {
  if (examples.empty()) fail(ErrorCode::Unbalanced, "no adversarial training examples");
  nn::ParamSet params = disc.init_params(cfg.seed);
  nn::AdamConfig adam_cfg;
  adam_cfg.peak_lr = cfg.peak_lr;
  adam_cfg.warmup_steps = cfg.warmup_steps;
  nn::Adam adam(params, adam_cfg);
  nn::ParamSet grads = disc.layout().zeros_like();

  Rng order_rng(mix_seed(cfg.seed, 0x6f72646572ULL));
  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), 0);
  std::size_t cursor = order.size();
  const std::size_t batch = std::min<std::size_t>(static_cast<std::size_t>(cfg.batch_size), examples.size());

  for (int step = 1; step <= cfg.steps; ++step) {
    grads.set_zero();
    Rng dropout_rng(mix_seed(cfg.seed, static_cast<std::uint64_t>(step)));
    double loss = 0.0;
    for (std::size_t b = 0; b < batch; ++b) {
      if (cursor == order.size()) {
        order_rng.shuffle(std::span<std::size_t>(order));
        cursor = 0;
      }
      loss += disc.bce_and_gradient(params, examples[order[cursor++]], 1.0 / static_cast<double>(batch), grads,
                                    &dropout_rng);
    }
    if (!std::isfinite(loss) || !grads.all_finite()) {
      fail(ErrorCode::NumericFailure, "non-finite adversarial loss at step " + std::to_string(step));
    }
    adam.step(params, grads);
    params.round_to_float();
  }
  return params;
}

std::set<std::string> read_split(const std::filesystem::path& path) {
  std::set<std::string> ids;
  for (const auto& token : tokenize(read_file_text(path))) ids.insert(token);
  return ids;
}

AdvSplitExamples build_adversarial_examples(const AdvInputs& inputs, const std::vector<ResponseRecord>& responses,
                                            const std::set<std::string>& train_ids,
                                            const std::set<std::string>& test_ids, std::uint64_t seed) {
  for (const auto& id : train_ids) {
    if (test_ids.count(id) != 0) fail(ErrorCode::SplitOverlap, "episode " + id + " is in both splits");
  }
  if (inputs.gold == nullptr || inputs.vocab == nullptr) fail(ErrorCode::Usage, "adversarial inputs incomplete");
  if (inputs.coarse == nullptr && inputs.objects == nullptr) fail(ErrorCode::Usage, "adversarial eval needs features");
  std::map<std::string, const Episode*> by_id;
  for (const Episode& ep : inputs.gold->episodes) by_id[ep.id] = &ep;

  const auto visual_of = [&](const Turn& turn) {
    if (inputs.coarse != nullptr) return discriminator_visual(Mode::CV, turn.coarse_idx, 0, inputs.coarse, nullptr);
    return discriminator_visual(Mode::FV, 0, turn.object_idx, nullptr, inputs.objects);
  };

  const auto build = [&](const std::set<std::string>& ids, std::uint64_t salt, const char* name) {
    std::vector<const ResponseRecord*> items;
    for (const auto& r : responses) {
      if (ids.count(r.episode) != 0) items.push_back(&r);
    }
    Rng rng(mix_seed(seed, salt));
    rng.shuffle(std::span<const ResponseRecord*>(items));
    if (items.size() % 2 == 1) items.pop_back();
    if (items.size() < 2) fail(ErrorCode::Unbalanced, std::string(name) + " split has fewer than two responses");
    std::vector<AdvExample> out;
    for (std::size_t i = 0; i < items.size(); ++i) {
      const ResponseRecord& r = *items[i];
      const auto found = by_id.find(r.episode);
      if (found == by_id.end()) fail(ErrorCode::MalformedRecord, "response for unknown episode " + r.episode);
      const Episode& ep = *found->second;
      if (r.j < 1 || r.j >= ep.turns.size()) fail(ErrorCode::MalformedRecord, "response index out of range");
      AdvExample ex;
      ex.label = i < items.size() / 2 ? 1.0 : 0.0;
      for (std::size_t k = 0; k <= r.j; ++k) {
        ex.turns.push_back(k < r.j || ex.label == 1.0 ? ep.turns[k].tokens : encode_text(*inputs.vocab, r.hypothesis));
        ex.visuals.push_back(visual_of(ep.turns[k]));
      }
      out.push_back(std::move(ex));
    }
    return out;
  };
  return {build(train_ids, 0x747261696eULL, "train"), build(test_ids, 0x74657374ULL, "test")};
}

double adversarial_eval(const AdvInputs& inputs, const std::vector<ResponseRecord>& responses,
                        const std::set<std::string>& train_ids, const std::set<std::string>& test_ids,
                        const AdvConfig& cfg) {
  auto split = build_adversarial_examples(inputs, responses, train_ids, test_ids, cfg.seed);
  const auto clip = [&](std::vector<AdvExample>& xs) {
    for (auto& ex : xs) {
      while (ex.turns.size() > static_cast<std::size_t>(cfg.max_turns)) {
        ex.turns.erase(ex.turns.begin());
        ex.visuals.erase(ex.visuals.begin());
      }
    }
  };
  clip(split.train);
  clip(split.test);
  const int d_visual = static_cast<int>(split.train.front().visuals.front().size());
  const AdvDiscriminator disc(cfg, static_cast<int>(inputs.vocab->size()), d_visual);
  const nn::ParamSet params = train_adversarial(disc, split.train, cfg);
  std::size_t fooled = 0, generated = 0;
  for (const auto& ex : split.test) {
    if (ex.label != 0.0) continue;
    ++generated;
    if (disc.probability(params, ex) > 0.5) ++fooled;
  }
  return static_cast<double>(fooled) / static_cast<double>(generated);
}

}  // namespace vidial
