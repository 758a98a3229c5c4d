#include "app/commands.hpp"

#include <cstdio>
#include <optional>

#include "common/binary_io.hpp"
#include "common/error.hpp"
#include "decode/generate.hpp"
#include "eval/metrics.hpp"
#include "mi/backward_model.hpp"
#include "nn/checkpoint.hpp"
#include "seqmodel/model_io.hpp"

namespace vidial {

namespace {

struct Stores {
  std::optional<CoarseFeatureStore> coarse;
  std::optional<ObjectFeatureStore> objects;

  const CoarseFeatureStore* coarse_ptr() const { return coarse ? &*coarse : nullptr; }
  const ObjectFeatureStore* objects_ptr() const { return objects ? &*objects : nullptr; }
};

Stores load_stores(const RunConfig& cfg, Mode mode) {
  Stores s;
  if (!cfg.coarse.empty()) s.coarse = load_coarse_features(cfg.coarse);
  if (!cfg.objects.empty()) s.objects = load_object_features(cfg.objects);
  if (mode == Mode::CV && !s.coarse) fail(ErrorCode::Usage, "CV mode needs data.coarse");
  if (mode == Mode::FV && !s.objects) fail(ErrorCode::Usage, "FV mode needs data.objects");
  return s;
}

int visual_dim(Mode mode, const Stores& s) {
  if (mode == Mode::CV) return static_cast<int>(s.coarse->dim());
  if (mode == Mode::FV) return static_cast<int>(s.objects->dim());
  return 0;
}

const std::filesystem::path& training_episodes(const RunConfig& cfg) {
  if (cfg.episodes.empty()) fail(ErrorCode::Usage, "data.episodes is not set");
  return cfg.episodes;
}

const std::filesystem::path& evaluation_episodes(const RunConfig& cfg) {
  return cfg.eval_episodes.empty() ? training_episodes(cfg) : cfg.eval_episodes;
}

Vocabulary training_vocab(const RunConfig& cfg, const TextDataset& text) {
  return build_vocab(collect_texts(text), cfg.vocab_size, cfg.min_freq);
}

ModelConfig model_config(const RunConfig& cfg, Mode mode, const Vocabulary& vocab, const Stores& stores) {
  ModelConfig m = cfg.model;
  m.mode = mode;
  m.vocab_size = static_cast<int>(vocab.size());
  m.d_visual = visual_dim(mode, stores);
  m.validate();
  return m;
}

TrainOptions train_options(const RunConfig& cfg) {
  TrainOptions o = cfg.train;
  o.seed = cfg.seed;
  return o;
}

void write_loss_curve(const std::filesystem::path& checkpoint, const std::vector<double>& curve) {
  std::string text;
  char buf[64];
  for (std::size_t i = 0; i < curve.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%zu\t%.17g\n", i + 1, curve[i]);
    text += buf;
  }
  write_file_text(loss_curve_path(checkpoint), text);
}

struct LoadedSeq2Seq {
  SavedModel saved;
  Seq2Seq net;
  nn::ParamSet params;
};

LoadedSeq2Seq load_seq2seq(const std::filesystem::path& path, const char* component,
                           std::optional<Mode> mode = std::nullopt) {
  SavedModel saved = load_model(path, component, mode);
  Seq2Seq net(saved.config);
  nn::ParamSet params = net.layout().zeros_like();
  nn::assign_by_name(params, saved.params);
  return {std::move(saved), std::move(net), std::move(params)};
}

void require_same_vocab(const Vocabulary& a, const Vocabulary& b, const std::string& what) {
  if (!(a == b)) fail(ErrorCode::VersionMismatch, what + " was trained with a different vocabulary");
}

}  // namespace

std::filesystem::path loss_curve_path(const std::filesystem::path& checkpoint) {
  return std::filesystem::path(checkpoint.string() + ".loss");
}

void cmd_synth(const RunConfig& cfg, const std::filesystem::path& out_dir) {
  SyntheticSpec spec = cfg.synth;
  spec.seed = cfg.seed;
  write_synthetic(generate_synthetic(spec), out_dir);
}

void cmd_train(const RunConfig& cfg, std::string_view target, const std::filesystem::path& out) {
  const bool forward = target == "forward";
  const bool backward = target == "backward";
  const bool disc = target == "disc";
  if (!forward && !backward && !disc) {
    fail(ErrorCode::Usage, "unknown training target '" + std::string(target) + "'");
  }
  const Mode mode = backward ? Mode::NV : cfg.model.mode;
  if (disc && mode == Mode::NV) fail(ErrorCode::Usage, "the discriminator needs model.mode cv or fv");

  const Stores stores = load_stores(cfg, mode);
  const TextDataset text = load_episodes(training_episodes(cfg), stores.coarse_ptr(), stores.objects_ptr());
  if (text.empty()) fail(ErrorCode::EmptyDataset, "no training episodes");
  const Vocabulary vocab = training_vocab(cfg, text);
  const Dataset data = encode_dataset(text, vocab);
  const ModelConfig mcfg = model_config(cfg, mode, vocab, stores);
  const TrainOptions options = train_options(cfg);

  SavedModel saved{forward ? component::kForward : backward ? component::kBackward : component::kDiscriminator,
                   mcfg, vocab, {}, nlohmann::json::object()};
  std::vector<double> curve;
  if (forward || backward) {
    TrainResult r = forward ? train_forward(data, mcfg, options, stores.coarse_ptr(), stores.objects_ptr())
                            : train_backward(data, mcfg, options);
    saved.params = std::move(r.params);
    curve = std::move(r.loss_curve);
  } else {
    const Discriminator discriminator(mcfg);
    nn::ParamSet init = discriminator.init_params(options.seed);
    std::vector<std::uint8_t> trainable(init.size(), 1);
    if (cfg.disc_share_encoder) {
      if (cfg.disc_forward_ckpt.empty()) fail(ErrorCode::Usage, "disc.share_encoder needs disc.forward_ckpt");
      const SavedModel fwd = load_model(cfg.disc_forward_ckpt, component::kForward);
      require_same_vocab(fwd.vocab, vocab, "the forward model");
      for (nn::ParamId id : discriminator.encoder_tensors()) {
        const auto found = fwd.params.find(init.name(id));
        if (!found || fwd.params[*found].rows() != init[id].rows() || fwd.params[*found].cols() != init[id].cols()) {
          fail(ErrorCode::VersionMismatch, "forward encoder tensor " + init.name(id) + " does not fit");
        }
        init[id] = fwd.params[*found];
        trainable[id] = 0;
      }
    }
    DiscTrainOptions d;
    d.adam = options.adam;
    d.max_steps = options.max_steps;
    d.batch_size = options.batch_size;
    d.negatives = cfg.disc_negatives;
    d.objective = cfg.disc_objective;
    d.seed = options.seed;
    const auto examples = discriminator_examples(data, mode, stores.coarse_ptr(), stores.objects_ptr());
    DiscTrainResult r = train_discriminator(discriminator, examples, d, &init, &trainable);
    saved.params = std::move(r.params);
    curve = std::move(r.loss_curve);
    saved.extra["share_encoder"] = cfg.disc_share_encoder;
    saved.extra["objective"] = cfg.disc_objective == DiscObjective::Bce ? "bce" : "log_ratio";
  }
  save_model(out, saved);
  write_loss_curve(out, curve);
}

void cmd_generate(const RunConfig& cfg, const std::filesystem::path& out) {
  if (cfg.forward_ckpt.empty()) fail(ErrorCode::Usage, "generate needs a forward checkpoint");
  const auto forward = load_seq2seq(cfg.forward_ckpt, component::kForward);
  const Mode mode = cfg.model.mode;
  const Stores stores = load_stores(cfg, mode);
  const TextDataset text = load_episodes(evaluation_episodes(cfg), stores.coarse_ptr(), stores.objects_ptr());
  const Dataset data = encode_dataset(text, forward.saved.vocab);

  BeamOptions beam;
  beam.beam_size = cfg.beam_size;
  beam.nbest = cfg.nbest;
  beam.max_tgt_len = cfg.decode_max_len;

  std::optional<LoadedSeq2Seq> backward;
  std::optional<SavedModel> disc_saved;
  std::optional<Discriminator> disc;
  nn::ParamSet disc_params;
  std::optional<MiConfig> mi;
  if (cfg.mi) {
    cfg.lambdas.validate();
    if (cfg.backward_ckpt.empty() || cfg.disc_ckpt.empty()) {
      fail(ErrorCode::Usage, "MI reranking needs a backward and a discriminator checkpoint");
    }
    if (forward.saved.config.mode != mode) {
      fail(ErrorCode::ModeMismatch, "forward checkpoint mode does not match the requested mode");
    }
    if (mode == Mode::NV) fail(ErrorCode::ModeMismatch, "MI reranking needs CV or FV mode");
    backward.emplace(load_seq2seq(cfg.backward_ckpt, component::kBackward, Mode::NV));
    disc_saved = load_model(cfg.disc_ckpt, component::kDiscriminator, mode);
    require_same_vocab(backward->saved.vocab, forward.saved.vocab, "the backward model");
    require_same_vocab(disc_saved->vocab, forward.saved.vocab, "the discriminator");
    if (disc_saved->config.d_visual != visual_dim(mode, stores)) {
      fail(ErrorCode::DimMismatch, "discriminator visual width does not match the feature store");
    }
    disc.emplace(disc_saved->config);
    disc_params = disc->layout().zeros_like();
    nn::assign_by_name(disc_params, disc_saved->params);
    mi = MiConfig{{&backward->net, &backward->params}, {&*disc, &disc_params}, cfg.lambdas};
  }
  const auto records = generate_split(forward.net, forward.params, data, forward.saved.vocab, mode,
                                      stores.coarse_ptr(), stores.objects_ptr(), mi ? &*mi : nullptr, beam);
  write_responses(records, out);
}

void cmd_eval(const RunConfig& cfg, const std::filesystem::path& responses, const std::filesystem::path& out) {
  const auto records = read_responses(responses);
  MetricsReport report = evaluate_all(records);
  if (cfg.adversarial) {
    if (cfg.train_split.empty() || cfg.test_split.empty()) {
      fail(ErrorCode::Usage, "adversarial evaluation needs train and test splits");
    }
    const auto train_ids = read_split(cfg.train_split);
    const auto test_ids = read_split(cfg.test_split);
    for (const auto& id : train_ids) {
      if (test_ids.count(id) != 0) fail(ErrorCode::SplitOverlap, "episode " + id + " is in both splits");
    }
    Stores stores;
    if (!cfg.coarse.empty()) stores.coarse = load_coarse_features(cfg.coarse);
    if (!cfg.objects.empty()) stores.objects = load_object_features(cfg.objects);
    if (!stores.coarse && !stores.objects) fail(ErrorCode::Usage, "adversarial evaluation needs visual features");
    const TextDataset train_text = load_episodes(training_episodes(cfg), stores.coarse_ptr(), stores.objects_ptr());
    const Vocabulary vocab = training_vocab(cfg, train_text);
    const TextDataset gold_text = load_episodes(evaluation_episodes(cfg), stores.coarse_ptr(), stores.objects_ptr());
    const Dataset gold = encode_dataset(gold_text, vocab);
    AdvConfig adv = cfg.adv;
    adv.seed = cfg.seed;
    report.adv_success =
        adversarial_eval({&gold, &vocab, stores.coarse_ptr(), stores.objects_ptr()}, records, train_ids, test_ids, adv);
  }
  write_file_text(out, report.to_json());
}

}  // namespace vidial
