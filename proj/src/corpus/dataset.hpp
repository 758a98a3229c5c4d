#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "corpus/feature_store.hpp"
#include "corpus/vocabulary.hpp"

namespace vidial {

// Episodes as they appear in the episode file, before tokenization.
struct TextTurn {
  std::string text;
  std::size_t coarse = 0;
  std::size_t objects = 0;
};

struct TextEpisode {
  std::string id;
  std::vector<TextTurn> turns;
};

using TextDataset = std::vector<TextEpisode>;

struct Turn {
  std::vector<TokenId> tokens;
  std::size_t coarse_idx = 0;
  std::size_t object_idx = 0;
};

struct Episode {
  std::string id;
  std::vector<Turn> turns;
};

struct Dataset {
  std::vector<Episode> episodes;
};

// A prediction item: generate turn j+1 (1-based) of an episode from turns 1..j.
struct ItemRef {
  std::size_t episode = 0;
  std::size_t j = 0;

  bool operator==(const ItemRef&) const = default;
};

// Parses the one-record-per-line episode file. Feature indices are validated
// against whichever stores are supplied.
TextDataset parse_episodes(std::string_view text, const CoarseFeatureStore* coarse = nullptr,
                           const ObjectFeatureStore* objects = nullptr);
TextDataset load_episodes(const std::filesystem::path& path, const CoarseFeatureStore* coarse = nullptr,
                          const ObjectFeatureStore* objects = nullptr);

std::string serialize_episodes(const TextDataset& episodes);
void write_episodes(const TextDataset& episodes, const std::filesystem::path& path);

std::vector<std::string> collect_texts(const TextDataset& episodes);

Dataset encode_dataset(const TextDataset& episodes, const Vocabulary& vocab);

Dataset load_dataset(const std::filesystem::path& episodes_path, const Vocabulary& vocab,
                     const CoarseFeatureStore* coarse, const ObjectFeatureStore* objects);

// Every (episode, j) with 1 <= j < n, in episode order then j order.
std::vector<ItemRef> enumerate_items(const Dataset& dataset);

}  // namespace vidial
