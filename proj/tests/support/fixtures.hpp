#pragma once

#include "corpus/dataset.hpp"
#include "corpus/synthetic.hpp"
#include "corpus/vocabulary.hpp"

namespace vidial::testing {

struct Fixture {
  SyntheticCorpus corpus;
  Vocabulary vocab;
  Dataset data;
};

inline Fixture make_fixture(const SyntheticSpec& spec) {
  Fixture f;
  f.corpus = generate_synthetic(spec);
  const auto texts = collect_texts(f.corpus.episodes);
  f.vocab = build_vocab(texts, spec.vocab_size, 1);
  f.data = encode_dataset(f.corpus.episodes, f.vocab);
  return f;
}

inline SyntheticSpec small_spec(std::uint64_t seed = 3) {
  SyntheticSpec s;
  s.num_episodes = 4;
  s.turns_min = 3;
  s.turns_max = 4;
  s.vocab_size = 32;
  s.num_classes = 4;
  s.coarse_dim = 8;
  s.objects_per_image = 2;
  s.seed = seed;
  return s;
}

}  // namespace vidial::testing
