#include <doctest.h>

#include <cmath>
#include <string>

#include "nn/checkpoint.hpp"
#include "seqmodel/model_io.hpp"
#include "seqmodel/seq2seq.hpp"
#include "seqmodel/trainer.hpp"
#include "support/expect.hpp"
#include "support/fixtures.hpp"

using namespace vidial;
using vidial::testing::error_code;

namespace {

nn::ParamId id_of(const nn::ParamSet& p, const std::string& name) {
  const auto id = p.find(name);
  REQUIRE(id.has_value());
  return *id;
}

double max_abs_diff(const nn::Matrix& a, const nn::Matrix& b) {
  REQUIRE(a.rows() == b.rows());
  REQUIRE(a.cols() == b.cols());
  return (a - b).cwiseAbs().maxCoeff();
}

Episode hand_episode() {
  Episode ep;
  ep.id = "hand";
  ep.turns = {Turn{{7, 8, 9}, 0, 0}, Turn{{10, 11}, 1, 1}, Turn{{12, 13, 14}, 2, 2}};
  return ep;
}

}  // namespace

TEST_CASE("uniform output logits give ln|V| per token") {
  const auto cfg = ModelConfig::tiny(Mode::NV, 100, 0);
  const Seq2Seq net(cfg);
  auto p = net.init_params(5);
  p[id_of(p, "out.weight")].setZero();
  p[id_of(p, "out.bias")].setZero();
  const auto a = assemble_nv(hand_episode(), 2, cfg);
  const std::vector<TokenId> target{12, 13, 14};
  CHECK(net.sequence_nll(p, a, target) == doctest::Approx(std::log(100.0)).epsilon(1e-12));
  for (double lp : net.token_log_probs(p, a, target)) CHECK(lp == doctest::Approx(-std::log(100.0)));
}

TEST_CASE("a token with probability one costs nothing") {
  const auto cfg = ModelConfig::tiny(Mode::NV, 30, 0);
  const Seq2Seq net(cfg);
  auto p = net.init_params(5);
  p[id_of(p, "out.weight")].setZero();
  auto& bias = p[id_of(p, "out.bias")];
  bias.setZero();
  bias(0, 12) = 1000.0;
  const auto a = assemble_nv(hand_episode(), 2, cfg);
  const std::vector<TokenId> target{12};
  CHECK(net.token_log_probs(p, a, target)[0] == 0.0);
  CHECK(net.sequence_nll(p, a, target) >= 0.0);
}

TEST_CASE("encoding is deterministic") {
  const auto f = testing::make_fixture(testing::small_spec());
  for (Mode m : {Mode::NV, Mode::CV, Mode::FV}) {
    const auto cfg = ModelConfig::tiny(m, static_cast<int>(f.vocab.size()), 8);
    const Seq2Seq net(cfg);
    const auto p = net.init_params(9);
    const auto a = assemble(f.data.episodes[1], 2, cfg, &f.corpus.coarse, &f.corpus.objects);
    CHECK(net.encode(p, a) == net.encode(p, a));
    CHECK(net.init_params(9)[0] == p[0]);
  }
}

TEST_CASE("padding content does not reach real positions") {
  const auto cfg = ModelConfig::tiny(Mode::NV, 30, 0);
  const Seq2Seq net(cfg);
  const auto p = net.init_params(3);
  const auto base = assemble_nv(hand_episode(), 2, cfg);
  auto padded = base;
  pad_to(padded, base.size() + 4);
  auto scrambled = padded;
  for (std::size_t i = base.size(); i < scrambled.size(); ++i) {
    scrambled.ids[i] = static_cast<TokenId>(20 + i);
    scrambled.turn_index[i] = static_cast<int>(i % 3);
  }
  const auto n = static_cast<Eigen::Index>(base.size());
  const auto e_base = net.encode(p, base);
  const nn::Matrix e_pad = net.encode(p, padded).topRows(n);
  const nn::Matrix e_scr = net.encode(p, scrambled).topRows(n);
  CHECK(max_abs_diff(e_base, e_pad) <= 1e-12);
  CHECK(max_abs_diff(e_pad, e_scr) <= 1e-12);

  const std::vector<TokenId> target{12, 13};
  CHECK(net.sequence_nll(p, padded, target) == doctest::Approx(net.sequence_nll(p, base, target)).epsilon(1e-12));
}

TEST_CASE("zero layer weights leave the normalized embedding stream") {
  const auto f = testing::make_fixture(testing::small_spec());
  const auto cfg = ModelConfig::tiny(Mode::NV, static_cast<int>(f.vocab.size()), 0);
  const Seq2Seq net(cfg);
  auto p = net.init_params(2);
  // Every linear map inside the encoder goes to zero; norms keep gain 1, bias 0.
  for (std::size_t i = 0; i < p.size(); ++i) {
    const auto& name = p.name(i);
    if (name.rfind("enc.", 0) == 0 && name.find(".ln") == std::string::npos && name.find("final_norm") == std::string::npos) {
      p[i].setZero();
    }
  }
  const auto a = assemble_nv(f.data.episodes[0], 2, cfg);
  const auto out = net.encode(p, a);

  // Hand trace: token + position + sentence rows, then layer norm.
  const auto& tok = p[id_of(p, "embed.token")];
  const auto& pos = p[id_of(p, "embed.position")];
  const auto& sent = p[id_of(p, "embed.sentence")];
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    nn::RowVector h = tok.row(a.ids[i]) + pos.row(r) + sent.row(a.turn_index[i]);
    const double mean = h.mean();
    const double var = (h.array() - mean).square().mean();
    const nn::RowVector expect = ((h.array() - mean) / std::sqrt(var + 1e-5)).matrix();
    CHECK((out.row(r) - expect).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("empty target is rejected") {
  const auto cfg = ModelConfig::tiny(Mode::NV, 30, 0);
  const Seq2Seq net(cfg);
  const auto p = net.init_params(1);
  const auto a = assemble_nv(hand_episode(), 2, cfg);
  CHECK(error_code([&] { net.sequence_nll(p, a, std::vector<TokenId>{}); }) == ErrorCode::EmptyTarget);
}

TEST_CASE("NV outputs ignore feature stores") {
  const auto f = testing::make_fixture(testing::small_spec());
  auto other = testing::small_spec();
  other.seed = 99;
  other.noise_scale = 3.0;
  const auto g = testing::make_fixture(other);
  const auto cfg = ModelConfig::tiny(Mode::NV, static_cast<int>(f.vocab.size()), 0);
  const Seq2Seq net(cfg);
  const auto p = net.init_params(4);
  const Episode& ep = f.data.episodes[0];
  const auto a = assemble(ep, 2, cfg, &f.corpus.coarse, &f.corpus.objects);
  const auto b = assemble(ep, 2, cfg, &g.corpus.coarse, &g.corpus.objects);
  CHECK(net.sequence_nll(p, a, ep.turns[2].tokens) == net.sequence_nll(p, b, ep.turns[2].tokens));
}

TEST_CASE("CV with a zero visual projection ignores feature contents") {
  const auto f = testing::make_fixture(testing::small_spec());
  const auto cfg = ModelConfig::tiny(Mode::CV, static_cast<int>(f.vocab.size()), 8);
  const Seq2Seq net(cfg);
  auto p = net.init_params(4);
  const Episode& ep = f.data.episodes[0];
  std::vector<float> scrambled(f.corpus.coarse.data().begin(), f.corpus.coarse.data().end());
  for (auto& x : scrambled) x = -2.0f * x + 1.0f;
  const CoarseFeatureStore other(f.corpus.coarse.dim(), scrambled);
  const auto a = assemble_cv(ep, 2, cfg, f.corpus.coarse);
  const auto b = assemble_cv(ep, 2, cfg, other);
  CHECK(a.ids == b.ids);
  CHECK(net.sequence_nll(p, a, ep.turns[2].tokens) != net.sequence_nll(p, b, ep.turns[2].tokens));
  p[id_of(p, "embed.visual_proj")].setZero();
  CHECK(net.additive_visual(p, a).isZero(0.0));
  CHECK(net.sequence_nll(p, a, ep.turns[2].tokens) == net.sequence_nll(p, b, ep.turns[2].tokens));
}

TEST_CASE("training is deterministic and logs one loss per step") {
  const auto f = testing::make_fixture(testing::small_spec());
  const auto cfg = ModelConfig::tiny(Mode::CV, static_cast<int>(f.vocab.size()), 8);
  TrainOptions opts;
  opts.max_steps = 6;
  opts.batch_size = 4;
  opts.adam.warmup_steps = 3;
  opts.seed = 17;
  int calls = 0;
  const auto r1 = train_forward(f.data, cfg, opts, &f.corpus.coarse, &f.corpus.objects, [&](int, double) { ++calls; });
  const auto r2 = train_forward(f.data, cfg, opts, &f.corpus.coarse, &f.corpus.objects);
  CHECK(calls == 6);
  REQUIRE(r1.loss_curve.size() == 6);
  CHECK(r1.loss_curve == r2.loss_curve);
  for (std::size_t i = 0; i < r1.params.size(); ++i) CHECK(r1.params[i] == r2.params[i]);

  opts.seed = 18;
  CHECK(train_forward(f.data, cfg, opts, &f.corpus.coarse, &f.corpus.objects).loss_curve != r1.loss_curve);

  CHECK(error_code([&] { train_forward(Dataset{}, cfg, opts, &f.corpus.coarse, &f.corpus.objects); }) ==
        ErrorCode::EmptyDataset);
}

TEST_CASE("forward examples cover every item") {
  const auto f = testing::make_fixture(testing::small_spec());
  const auto cfg = ModelConfig::tiny(Mode::NV, static_cast<int>(f.vocab.size()), 0);
  std::size_t items = 0;
  for (const auto& ep : f.data.episodes) items += ep.turns.size() - 1;
  CHECK(forward_examples(f.data, cfg, nullptr, nullptr).size() == items);
}

TEST_CASE("saved models reproduce the same loss") {
  const auto f = testing::make_fixture(testing::small_spec());
  const auto cfg = ModelConfig::tiny(Mode::FV, static_cast<int>(f.vocab.size()), 8);
  const Seq2Seq net(cfg);
  const auto p = net.init_params(21);
  const auto path = testing::scratch_path("fv.ckpt");
  save_model(path, SavedModel{component::kForward, cfg, f.vocab, p, {}});

  const auto loaded = load_model(path, component::kForward, Mode::FV);
  CHECK(loaded.config == cfg);
  CHECK(loaded.vocab == f.vocab);
  auto q = net.layout().zeros_like();
  nn::assign_by_name(q, loaded.params);
  const Episode& ep = f.data.episodes[2];
  const auto a = assemble(ep, 1, cfg, &f.corpus.coarse, &f.corpus.objects);
  CHECK(net.sequence_nll(q, a, ep.turns[1].tokens) == net.sequence_nll(p, a, ep.turns[1].tokens));

  CHECK(error_code([&] { load_model(path, component::kForward, Mode::NV); }) == ErrorCode::VersionMismatch);
  CHECK(error_code([&] { load_model(path, component::kBackward); }) == ErrorCode::VersionMismatch);
}
