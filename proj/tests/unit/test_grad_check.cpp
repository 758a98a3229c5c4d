#include <doctest.h>

#include "seqmodel/grad_check.hpp"
#include "support/fixtures.hpp"

using namespace vidial;

namespace {

struct Setup {
  testing::Fixture f;
  ModelConfig cfg;
  Seq2Seq net;
  nn::ParamSet params;
  ContextAssembly assembly;
  std::vector<TokenId> target;

  explicit Setup(Mode mode)
      : f(testing::make_fixture(testing::small_spec())),
        cfg(ModelConfig::tiny(mode, static_cast<int>(f.vocab.size()), 8)),
        net(cfg),
        params(net.init_params(11)) {
    const Episode& ep = f.data.episodes[0];
    assembly = assemble(ep, 2, cfg, &f.corpus.coarse, &f.corpus.objects);
    target = ep.turns[2].tokens;
  }
};

}  // namespace

TEST_CASE("relative error definition") {
  CHECK(relative_error(1.0, 1.0) == 0.0);
  CHECK(relative_error(2.0, 1.0) == doctest::Approx(0.5));
  CHECK(relative_error(1e-9, -5e-9) == 0.0);
  CHECK(relative_error(0.0, 1e-3) == doctest::Approx(1.0));
}

TEST_CASE("analytic gradients match finite differences in every mode") {
  for (Mode m : {Mode::NV, Mode::CV, Mode::FV}) {
    CAPTURE(to_string(m));
    const Setup s(m);
    const auto r = grad_check(s.net, s.params, s.assembly, s.target);
    CAPTURE(r.worst_tensor);
    CHECK(r.max_rel_error < 1e-4);
    for (const auto& t : r.tensors) CHECK(t.coordinates > 0);
  }
}

TEST_CASE("unused image table in NV has zero gradient and zero error") {
  const Setup s(Mode::NV);
  const auto g = sequence_nll_gradient(s.net, s.params, s.assembly, s.target);
  const auto image = *g.find("embed.image");
  CHECK(g[image].isZero(0.0));
  GradCheckOptions opts;
  opts.samples_per_tensor = 20;
  const auto r = grad_check(s.net, s.params, s.assembly, s.target, opts);
  for (const auto& t : r.tensors) {
    if (t.name == "embed.image") CHECK(t.max_rel_error == 0.0);
  }
}

TEST_CASE("a gradient scaled by two is caught") {
  const Setup s(Mode::CV);
  auto g = sequence_nll_gradient(s.net, s.params, s.assembly, s.target);
  const auto id = *g.find("embed.visual_proj");
  g[id] *= 2.0;
  GradCheckOptions opts;
  opts.samples_per_tensor = 30;
  const auto loss = [&](const nn::ParamSet& p) { return s.net.sequence_nll(p, s.assembly, s.target); };
  const auto r = compare_gradients(s.params, g, loss, opts);
  CHECK(r.max_rel_error > 0.3);
  CHECK(r.worst_tensor == "embed.visual_proj");
}
