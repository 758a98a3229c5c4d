#include <doctest.h>

#include <json.hpp>

#include "common/random.hpp"
#include "eval/adversarial.hpp"
#include "eval/metrics.hpp"
#include "seqmodel/grad_check.hpp"
#include "support/expect.hpp"
#include "support/fixtures.hpp"
#include "support/metric_oracle.hpp"

using namespace vidial;
using vidial::testing::error_code;

namespace {

std::vector<TokenSeq> seqs(std::initializer_list<std::initializer_list<const char*>> lists) {
  std::vector<TokenSeq> out;
  for (const auto& l : lists) {
    TokenSeq s;
    for (const char* w : l) s.emplace_back(w);
    out.push_back(s);
  }
  return out;
}

std::vector<TokenSeq> random_seqs(Rng& rng, std::size_t count) {
  static const char* words[] = {"a", "b", "c", "d", "e", "f"};
  std::vector<TokenSeq> out(count);
  for (auto& s : out) {
    const auto len = 1 + rng.below(7);
    for (std::size_t i = 0; i < len; ++i) s.emplace_back(words[rng.below(6)]);
  }
  return out;
}

}  // namespace

TEST_CASE("BLEU hand cases") {
  const auto cand = seqs({{"the", "the", "the"}});
  const auto ref = seqs({{"the", "cat"}});
  CHECK(bleu_n(cand, ref, 1) == doctest::Approx(100.0 / 3.0).epsilon(1e-12));
  const auto same = seqs({{"a", "b", "c", "d"}, {"x", "y", "z", "w", "v"}});
  for (int n : {1, 2, 4}) CHECK(bleu_n(same, same, n) == doctest::Approx(100.0));
  const auto other = seqs({{"p", "q"}, {"r"}});
  CHECK(bleu_n(same, other, 1) == 0.0);

  CHECK(error_code([&] { bleu_n(cand, same, 1); }) == ErrorCode::LengthMismatch);
  CHECK(error_code([&] { bleu_n(cand, ref, 0); }) == ErrorCode::InvalidOrder);
  CHECK(error_code([&] { bleu_n(std::vector<TokenSeq>{}, std::vector<TokenSeq>{}, 1); }) == ErrorCode::LengthMismatch);
}

TEST_CASE("Dist hand cases") {
  const auto abab = seqs({{"a", "b", "a", "b"}});
  CHECK(dist_n(abab, 1) == doctest::Approx(0.5));
  CHECK(dist_n(abab, 2) == doctest::Approx(0.5));
  CHECK(dist_n(seqs({{"a", "b"}, {"a", "b"}}), 1) == doctest::Approx(0.5));
  CHECK(error_code([&] { dist_n(abab, 0); }) == ErrorCode::InvalidOrder);
}

TEST_CASE("ROUGE hand cases") {
  const auto ref = seqs({{"a", "b", "c", "d"}});
  CHECK(rouge_n_f(ref, ref, 1) == doctest::Approx(1.0));
  CHECK(rouge_n_f(seqs({{"x", "y"}}), ref, 1) == 0.0);
  CHECK(rouge_n_f(seqs({{"a", "b"}}), ref, 1) == doctest::Approx(2.0 / 3.0));
  CHECK(error_code([&] { rouge_n_f(ref, seqs({{"a"}, {"b"}}), 1); }) == ErrorCode::LengthMismatch);
}

TEST_CASE("metrics agree with the brute-force oracle") {
  Rng rng(31);
  for (int trial = 0; trial < 5; ++trial) {
    const auto cands = random_seqs(rng, 100);
    const auto refs = random_seqs(rng, 100);
    for (int n : {1, 2, 3, 4}) {
      CAPTURE(n);
      CHECK(std::abs(bleu_n(cands, refs, n) - testing::oracle::bleu(cands, refs, n)) <= 1e-9);
      CHECK(std::abs(dist_n(cands, n) - testing::oracle::dist(cands, n)) <= 1e-9);
      CHECK(std::abs(rouge_n_f(cands, refs, n) - testing::oracle::rouge(cands, refs, n)) <= 1e-9);
      const double d1 = dist_n(cands, 1);
      CHECK((d1 >= 0.0 && d1 <= 1.0));
    }
  }
}

TEST_CASE("metrics are permutation invariant over pairs") {
  Rng rng(5);
  auto cands = random_seqs(rng, 30);
  auto refs = random_seqs(rng, 30);
  const double b = bleu_n(cands, refs, 2);
  const double r = rouge_n_f(cands, refs, 2);
  const double d = dist_n(cands, 2);
  std::vector<std::size_t> order(30);
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng.shuffle(std::span<std::size_t>(order));
  std::vector<TokenSeq> pc, pr;
  for (auto i : order) {
    pc.push_back(cands[i]);
    pr.push_back(refs[i]);
  }
  CHECK(bleu_n(pc, pr, 2) == doctest::Approx(b).epsilon(1e-12));
  CHECK(rouge_n_f(pc, pr, 2) == doctest::Approx(r).epsilon(1e-12));
  CHECK(dist_n(pc, 2) == doctest::Approx(d).epsilon(1e-12));
}

TEST_CASE("report over a responses list") {
  std::vector<ResponseRecord> recs{{"a", 1, "x y z", "x y z", -1.0, std::nullopt},
                                   {"b", 1, "p q r s", "p q r s", -2.0, std::nullopt}};
  const auto rep = evaluate_all(recs);
  CHECK(rep.bleu1 == doctest::Approx(100.0));
  CHECK(rep.bleu4 == doctest::Approx(100.0));
  CHECK(rep.rouge1_f == doctest::Approx(1.0));
  CHECK(rep.rouge4_f == doctest::Approx(0.5));  // "x y z" has no 4-gram
  CHECK(rep.responses == 2);
  CHECK(rep.tokens == 7);
  const auto j = nlohmann::json::parse(rep.to_json());
  for (const char* key : {"bleu1", "bleu2", "bleu4", "dist1", "dist2", "dist3", "dist4", "rouge1_f", "rouge2_f",
                          "rouge4_f", "adv_success"}) {
    CAPTURE(key);
    CHECK(j.contains(key));
  }
  CHECK(j["adv_success"].is_null());
  CHECK(error_code([] { evaluate_all({}); }) == ErrorCode::MalformedRecord);
}

TEST_CASE("adversarial split checks") {
  const auto f = testing::make_fixture(testing::small_spec());
  std::vector<ResponseRecord> recs;
  for (const auto& ep : f.corpus.episodes) recs.push_back({ep.id, 1, ep.turns[1].text, ep.turns[1].text, -1.0, {}});
  const AdvInputs in{&f.data, &f.vocab, &f.corpus.coarse, nullptr};
  const auto& eps = f.corpus.episodes;
  const std::set<std::string> train{eps[0].id, eps[1].id};
  const std::set<std::string> test{eps[2].id, eps[3].id};
  const auto split = build_adversarial_examples(in, recs, train, test, 3);
  REQUIRE(split.train.size() == 2);
  CHECK(split.train[0].label + split.train[1].label == 1.0);
  CHECK(split.train[0].turns.size() == 2);

  CHECK(error_code([&] { build_adversarial_examples(in, recs, train, {eps[1].id, eps[2].id}, 3); }) ==
        ErrorCode::SplitOverlap);
  CHECK(error_code([&] { build_adversarial_examples(in, recs, {eps[0].id}, test, 3); }) == ErrorCode::Unbalanced);
  auto unknown = recs;
  unknown.push_back({"ghost", 1, "x", "x", -1.0, {}});
  CHECK(error_code([&] { build_adversarial_examples(in, unknown, train, {eps[2].id, eps[3].id, "ghost"}, 3); }) ==
        ErrorCode::MalformedRecord);
}

TEST_CASE("adversarial evaluator gradient") {
  AdvConfig cfg;
  cfg.layers = 1;
  cfg.heads = 2;
  cfg.width = 8;
  cfg.ffn_dim = 12;
  cfg.dropout = 0.0;
  const AdvDiscriminator disc(cfg, 20, 3);
  const auto p = disc.init_params(2);
  AdvExample ex;
  ex.turns = {{7, 8, 9}, {10}, {}};
  for (int k = 0; k < 3; ++k) {
    nn::RowVector v(3);
    v << 0.2 * k, -0.5, 1.0 - k;
    ex.visuals.push_back(v);
  }
  ex.label = 1.0;
  auto g = p.zeros_like();
  disc.bce_and_gradient(p, ex, 1.0, g, nullptr);
  const auto loss = [&](const nn::ParamSet& x) {
    auto scratch = x.zeros_like();
    return disc.bce_and_gradient(x, ex, 1.0, scratch, nullptr);
  };
  GradCheckOptions opts;
  opts.samples_per_tensor = 30;
  const auto r = compare_gradients(p, g, loss, opts);
  CAPTURE(r.worst_tensor);
  CHECK(r.max_rel_error < 1e-4);
  const double prob = disc.probability(p, ex);
  CHECK((prob > 0.0 && prob < 1.0));
  CHECK(loss(p) == doctest::Approx(-std::log(prob)).epsilon(1e-12));
}
