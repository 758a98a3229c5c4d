#include <doctest.h>

#include "seqmodel/assembly.hpp"
#include "support/expect.hpp"

using namespace vidial;
using vidial::testing::error_code;

namespace {

// Turns with the given token lengths; turn k uses image k.
Episode episode_of(std::initializer_list<std::size_t> lengths) {
  Episode ep;
  ep.id = "hand";
  TokenId next = 10;
  std::size_t k = 0;
  for (std::size_t n : lengths) {
    Turn t;
    for (std::size_t i = 0; i < n; ++i) t.tokens.push_back(next++);
    t.coarse_idx = k;
    t.object_idx = k;
    ep.turns.push_back(t);
    ++k;
  }
  return ep;
}

ModelConfig config(Mode mode, int d_visual = 4) {
  auto cfg = ModelConfig::tiny(mode, 50, mode == Mode::NV ? 0 : d_visual);
  return cfg;
}

CoarseFeatureStore coarse_store(std::size_t images, std::size_t dim) {
  std::vector<float> data(images * dim);
  for (std::size_t i = 0; i < data.size(); ++i) data[i] = static_cast<float>(i);
  return {dim, data};
}

ObjectFeatureStore object_store(std::initializer_list<std::size_t> counts, std::size_t dim) {
  ObjectFeatureStore s(dim);
  float v = 0.0f;
  for (std::size_t m : counts) {
    std::vector<float> block(m * dim);
    for (auto& x : block) x = v++;
    s.add_image(block);
  }
  return s;
}

}  // namespace

TEST_CASE("NV layout") {
  const auto ep = episode_of({3, 2, 4});
  const auto a = assemble_nv(ep, 2, config(Mode::NV));
  CHECK(a.size() == 7);
  CHECK(a.ids == std::vector<TokenId>{10, 11, 12, special::kSep, 13, 14, special::kSep});
  CHECK(a.turn_index == std::vector<int>{1, 1, 1, 1, 2, 2, 2});
  CHECK(a.size() == nv_length(ep, 2));

  const auto single = assemble_nv(episode_of({4, 1}), 1, config(Mode::NV));
  CHECK(single.size() == 5);
  for (int t : single.turn_index) CHECK(t == 1);
}

TEST_CASE("NV truncation drops the oldest turns whole") {
  auto cfg = config(Mode::NV);
  cfg.max_src_len = 6;
  const auto a = assemble_nv(episode_of({3, 2, 4}), 2, cfg);
  CHECK(a.size() == 3);
  CHECK(a.ids == std::vector<TokenId>{13, 14, special::kSep});
  CHECK(a.turns_kept == 1);

  cfg.max_src_len = 2;
  CHECK(error_code([&] { assemble_nv(episode_of({3, 2, 4}), 2, cfg); }) == ErrorCode::ContextEmpty);
}

TEST_CASE("CV layout") {
  const auto ep = episode_of({3, 2, 4});
  const auto store = coarse_store(3, 4);
  const auto a = assemble_cv(ep, 2, config(Mode::CV), store);
  CHECK(a.size() == 10);
  CHECK(a.size() == cv_length(ep, 2));
  CHECK(a.ids == std::vector<TokenId>{special::kCls, 10, 11, 12, special::kSep, 13, 14, special::kSep, kVisualSlot,
                                      special::kSep});
  // Turn tokens carry their own image; the slot carries the next one.
  REQUIRE(a.visuals.rows() == 3);
  CHECK(a.additive_row[1] == 0);
  CHECK(a.additive_row[5] == 1);
  CHECK(a.additive_row[4] == -1);
  CHECK(a.content_row[8] == 2);
  CHECK(a.visuals(2, 0) == 8.0);
  CHECK(a.visuals(0, 3) == 3.0);

  CHECK(error_code([&] { assemble_cv(ep, 2, config(Mode::CV, 8), store); }) == ErrorCode::DimMismatch);
}

TEST_CASE("FV layout") {
  const auto ep = episode_of({3, 2, 4});
  const auto store = object_store({2, 1, 2}, 4);
  const auto a = assemble_fv(ep, 2, config(Mode::FV), store);
  CHECK(a.prefix_length == 7);
  CHECK(a.size() == 14);
  CHECK(a.size() == fv_length(ep, 2, store));
  CHECK(a.ids.front() == special::kCls);
  CHECK(a.ids[6] == special::kEoi);
  const std::vector<int> image_ids(a.image_index.begin() + 1, a.image_index.begin() + 6);
  CHECK(image_ids == std::vector<int>{1, 1, 2, 3, 3});
  for (std::size_t p = 1; p < 6; ++p) CHECK(a.ids[p] == kVisualSlot);
  CHECK(a.visuals(2, 0) == 8.0);

  const auto small = assemble_fv(episode_of({3, 1}), 1, config(Mode::FV), object_store({1, 1}, 4));
  CHECK(small.size() == 1 + 2 + 1 + 3 + 1);

  CHECK(error_code([&] { assemble_fv(ep, 2, config(Mode::FV, 8), store); }) == ErrorCode::DimMismatch);
}

TEST_CASE("FV truncation drops image and turn together") {
  auto cfg = config(Mode::FV);
  cfg.max_src_len = 10;
  const auto ep = episode_of({3, 2, 4});
  const auto a = assemble_fv(ep, 2, cfg, object_store({2, 1, 2}, 4));
  // Keeping turn 2 only: [CLS] + 1 + 2 objects + [EOI] + 2 tokens + [SEP].
  CHECK(a.size() == 8);
  CHECK(a.turns_kept == 1);
  CHECK(a.image_index[1] == 1);
  CHECK(a.image_index[3] == 2);
}

TEST_CASE("padding appends masked positions") {
  auto a = assemble_nv(episode_of({2, 2}), 1, config(Mode::NV));
  pad_to(a, 6);
  CHECK(a.size() == 6);
  CHECK(a.real_length() == 3);
  CHECK(a.ids[5] == special::kPad);
  CHECK(a.valid[4] == 0);
}

TEST_CASE("item bounds") {
  const auto ep = episode_of({2, 2});
  CHECK(error_code([&] { assemble_nv(ep, 0, config(Mode::NV)); }) == ErrorCode::IndexOutOfRange);
  CHECK(error_code([&] { assemble_nv(ep, 2, config(Mode::NV)); }) == ErrorCode::IndexOutOfRange);
}
