#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <limits>
#include <map>

#include "common/binary_io.hpp"
#include "common/error.hpp"
#include "support/bytes.hpp"
#include "support/expect.hpp"
#include "support/fixtures.hpp"

using namespace vidial;
using vidial::testing::Bytes;
using vidial::testing::error_code;
using vidial::testing::scratch_path;

TEST_CASE("vocabulary ranks by frequency with lexicographic ties") {
  const std::vector<std::string> texts{"a b", "b c"};
  const auto v = build_vocab(texts, 100, 1);
  REQUIRE(v.size() == 10);
  CHECK(v.token(7) == "b");
  CHECK(v.token(8) == "a");
  CHECK(v.token(9) == "c");
  CHECK(v.token(special::kUnk) == "[UNK]");

  const auto v2 = build_vocab(texts, 100, 2);
  CHECK(v2.size() == 8);
  CHECK(v2.token(7) == "b");

  CHECK(build_vocab(std::vector<std::string>{}, 100, 1).size() == 7);
  CHECK(build_vocab(texts, 8, 1).size() == 8);
  CHECK(error_code([&] { build_vocab(texts, 7, 1); }) == ErrorCode::Usage);
}

TEST_CASE("encode_text lowercases, splits on whitespace and maps unknowns") {
  const std::vector<std::string> texts{"a b", "b c"};
  const auto v = build_vocab(texts, 100, 1);
  CHECK(encode_text(v, "b a") == std::vector<TokenId>{7, 8});
  CHECK(encode_text(v, "  B\tA ") == std::vector<TokenId>{7, 8});
  CHECK(encode_text(v, "zzz") == std::vector<TokenId>{special::kUnk});
  CHECK(encode_text(v, "").empty());
  for (TokenId id : encode_text(v, "a zz [CLS] c q")) {
    CHECK(id < static_cast<TokenId>(v.size()));
    CHECK((!is_special(id) || id == special::kUnk));
  }
}

TEST_CASE("VDF1 parsing") {
  Bytes ok;
  ok.text("VDF1").u32(2).u32(4);
  for (int i = 0; i < 8; ++i) ok.f32(static_cast<float>(i) * 0.5f);
  const auto store = parse_coarse_features(ok.data);
  CHECK(store.count() == 2);
  CHECK(store.dim() == 4);
  CHECK(store.row(1)[3] == doctest::Approx(3.5));
  CHECK(serialize_coarse_features(store) == ok.data);

  Bytes magic;
  magic.text("XXXX").u32(2).u32(4);
  CHECK(error_code([&] { parse_coarse_features(magic.data); }) == ErrorCode::BadMagic);

  Bytes zero;
  zero.text("VDF1").u32(2).u32(0);
  CHECK(error_code([&] { parse_coarse_features(zero.data); }) == ErrorCode::ZeroDim);

  Bytes short_payload;
  short_payload.text("VDF1").u32(3).u32(4);
  for (int i = 0; i < 8; ++i) short_payload.f32(1.0f);
  CHECK(error_code([&] { parse_coarse_features(short_payload.data); }) == ErrorCode::Truncated);

  Bytes nan;
  nan.text("VDF1").u32(1).u32(2).f32(1.0f).f32(std::numeric_limits<float>::quiet_NaN());
  CHECK(error_code([&] { parse_coarse_features(nan.data); }) == ErrorCode::NonFinite);

  Bytes extra = ok;
  extra.f32(1.0f);
  CHECK(error_code([&] { parse_coarse_features(extra.data); }) == ErrorCode::TrailingData);
}

TEST_CASE("VOF1 parsing") {
  Bytes ok;
  ok.text("VOF1").u32(1).u32(3).u32(2);
  for (int i = 0; i < 6; ++i) ok.f32(static_cast<float>(i));
  const auto store = parse_object_features(ok.data);
  CHECK(store.count() == 1);
  CHECK(store.objects_in(0) == 2);
  CHECK(store.objects(0)[5] == 5.0f);
  CHECK(serialize_object_features(store) == ok.data);

  Bytes empty;
  empty.text("VOF1").u32(2).u32(3).u32(1).f32(0).f32(0).f32(0).u32(0);
  CHECK(error_code([&] { parse_object_features(empty.data); }) == ErrorCode::EmptyObjectSet);

  Bytes short_payload = ok;
  short_payload.data.resize(short_payload.data.size() - 4);
  CHECK(error_code([&] { parse_object_features(short_payload.data); }) == ErrorCode::Truncated);

  Bytes magic;
  magic.text("VDF1").u32(1).u32(3);
  CHECK(error_code([&] { parse_object_features(magic.data); }) == ErrorCode::BadMagic);
}

TEST_CASE("feature files round-trip byte for byte") {
  const auto corpus = generate_synthetic(testing::small_spec());
  const auto coarse_path = scratch_path("rt.vdf");
  const auto objects_path = scratch_path("rt.vof");
  write_coarse_features(corpus.coarse, coarse_path);
  write_object_features(corpus.objects, objects_path);
  const auto coarse_bytes = read_file_bytes(coarse_path);
  const auto object_bytes = read_file_bytes(objects_path);
  CHECK(serialize_coarse_features(load_coarse_features(coarse_path)) == coarse_bytes);
  CHECK(serialize_object_features(load_object_features(objects_path)) == object_bytes);
}

TEST_CASE("episode loading validates structure and indices") {
  CoarseFeatureStore coarse(2, std::vector<float>{1, 2, 3, 4});
  ObjectFeatureStore objects(2);
  objects.add_image(std::vector<float>{1, 2});
  objects.add_image(std::vector<float>{3, 4});

  const std::string two_turns =
      R"({"id": "e1", "turns": [{"text": "hi there", "coarse": 0, "objects": 0}, {"text": "ok", "coarse": 1, "objects": 1}]})";
  const auto eps = parse_episodes(two_turns, &coarse, &objects);
  REQUIRE(eps.size() == 1);
  CHECK(eps[0].turns.size() == 2);

  const std::string bad_index =
      R"({"id": "e1", "turns": [{"text": "a", "coarse": 2, "objects": 0}, {"text": "b", "coarse": 1, "objects": 1}]})";
  CHECK(error_code([&] { parse_episodes(bad_index, &coarse, &objects); }) == ErrorCode::IndexOutOfRange);

  const std::string one_turn = R"({"id": "e1", "turns": [{"text": "a", "coarse": 0, "objects": 0}]})";
  CHECK(error_code([&] { parse_episodes(one_turn, &coarse, &objects); }) == ErrorCode::EpisodeTooShort);

  CHECK(error_code([&] { parse_episodes("{not json", &coarse, &objects); }) == ErrorCode::MalformedRecord);
  CHECK(error_code([&] { parse_episodes(R"({"id": "e1"})", &coarse, &objects); }) == ErrorCode::MalformedRecord);

  // Without stores nothing is range-checked.
  CHECK(parse_episodes(bad_index).size() == 1);
}

TEST_CASE("episode file round trip") {
  const auto corpus = generate_synthetic(testing::small_spec());
  const auto text = serialize_episodes(corpus.episodes);
  const auto back = parse_episodes(text, &corpus.coarse, &corpus.objects);
  CHECK(serialize_episodes(back) == text);
}

TEST_CASE("synthetic generator is deterministic and honors its settings") {
  SyntheticSpec spec;
  spec.num_episodes = 50;
  spec.turns_min = 4;
  spec.turns_max = 8;
  const auto a = generate_synthetic(spec);
  const auto b = generate_synthetic(spec);
  CHECK(serialize_episodes(a.episodes) == serialize_episodes(b.episodes));
  CHECK(serialize_coarse_features(a.coarse) == serialize_coarse_features(b.coarse));
  CHECK(serialize_object_features(a.objects) == serialize_object_features(b.objects));
  CHECK(a.manifest.to_json() == b.manifest.to_json());

  REQUIRE(a.episodes.size() == 50);
  for (const auto& ep : a.episodes) {
    CHECK(ep.turns.size() >= 4);
    CHECK(ep.turns.size() <= 8);
  }

  spec.seed = 2;
  CHECK(serialize_episodes(generate_synthetic(spec).episodes) != serialize_episodes(a.episodes));
}

TEST_CASE("synthetic text follows the latent class band") {
  SyntheticSpec spec;
  spec.num_episodes = 50;
  const auto corpus = generate_synthetic(spec);
  // Counting oracle: per class, the band holding most of its turns' tokens.
  std::map<std::size_t, std::map<std::size_t, int>> counts;
  for (const auto& ep : corpus.episodes) {
    for (const auto& turn : ep.turns) {
      const std::size_t cls = corpus.manifest.image_classes.at(turn.coarse);
      for (const auto& tok : tokenize(turn.text)) ++counts[cls][synthetic_band(spec, tok)];
    }
  }
  std::size_t matched = 0;
  for (const auto& [cls, bands] : counts) {
    std::size_t best = 0;
    int best_count = -1;
    for (const auto& [band, c] : bands) {
      if (c > best_count) {
        best_count = c;
        best = band;
      }
    }
    matched += best == cls;
  }
  CHECK(counts.size() == spec.num_classes);
  CHECK(static_cast<double>(matched) >= 0.95 * static_cast<double>(counts.size()));
}

TEST_CASE("synthetic generator settings are validated") {
  SyntheticSpec spec;
  spec.turns_min = 1;
  CHECK(error_code([&] { spec.validate(); }) == ErrorCode::SpecInvalid);
  spec = {};
  spec.num_classes = 1;
  CHECK(error_code([&] { spec.validate(); }) == ErrorCode::SpecInvalid);
  spec = {};
  spec.vocab_size = 7 + spec.num_classes;
  CHECK(error_code([&] { spec.validate(); }) == ErrorCode::SpecInvalid);
  spec = {};
  spec.turns_max = spec.turns_min - 1;
  CHECK(error_code([&] { spec.validate(); }) == ErrorCode::SpecInvalid);
}

TEST_CASE("synthetic corpus written to disk loads back") {
  const auto corpus = generate_synthetic(testing::small_spec());
  const auto dir = scratch_path("synth_dir");
  std::filesystem::remove_all(dir);
  write_synthetic(corpus, dir);
  const auto coarse = load_coarse_features(dir / synthetic_files::kCoarse);
  const auto objects = load_object_features(dir / synthetic_files::kObjects);
  const auto eps = load_episodes(dir / synthetic_files::kEpisodes, &coarse, &objects);
  CHECK(eps.size() == corpus.episodes.size());
  CHECK(std::filesystem::exists(dir / synthetic_files::kManifest));
}

TEST_CASE("enumerate_items covers every (episode, j)") {
  Dataset d;
  for (std::size_t n : {2u, 3u, 4u}) {
    Episode ep;
    ep.id = "e" + std::to_string(n);
    ep.turns.resize(n, Turn{{7}, 0, 0});
    d.episodes.push_back(ep);
  }
  const auto items = enumerate_items(d);
  CHECK(items.size() == 6);
  CHECK(items.front() == ItemRef{0, 1});
  CHECK(items.back() == ItemRef{2, 3});
}
