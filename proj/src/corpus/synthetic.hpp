#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "corpus/dataset.hpp"
#include "corpus/feature_store.hpp"

namespace vidial {

// Desk-scale stand-in corpus. Every turn gets a latent class c; its image
// features sit on the class centroid (axis c) and its text draws from the
// class's band of the content vocabulary. With copy_previous, each turn after
// the first ends with the first token of the preceding turn.
struct SyntheticSpec {
  std::size_t num_episodes = 50;
  std::size_t turns_min = 4;
  std::size_t turns_max = 8;
  std::size_t vocab_size = 64;  // including the 7 specials
  std::size_t num_classes = 4;
  std::size_t coarse_dim = 16;
  std::size_t objects_per_image = 3;
  double noise_scale = 0.1;
  std::uint64_t seed = 1;
  std::size_t tokens_per_turn = 3;  // band tokens per turn, before the copied token
  bool copy_previous = true;
  bool deterministic_text = false;  // band tokens are a fixed function of the class

  void validate() const;
  std::size_t band_size() const;
};

struct SyntheticManifest {
  SyntheticSpec spec;
  std::vector<std::size_t> image_classes;  // latent class per image index

  std::string to_json() const;
};

struct SyntheticCorpus {
  TextDataset episodes;
  CoarseFeatureStore coarse;
  ObjectFeatureStore objects;
  SyntheticManifest manifest;
};

SyntheticCorpus generate_synthetic(const SyntheticSpec& spec);

// Surface form of content token k ("w<k>").
std::string synthetic_token(std::size_t k);

// Band of a surface token, or num_classes when it lies outside every band.
std::size_t synthetic_band(const SyntheticSpec& spec, const std::string& token);

// Writes episodes.jsonl, coarse.vdf, objects.vof and manifest.json.
void write_synthetic(const SyntheticCorpus& corpus, const std::filesystem::path& dir);

namespace synthetic_files {
inline constexpr const char* kEpisodes = "episodes.jsonl";
inline constexpr const char* kCoarse = "coarse.vdf";
inline constexpr const char* kObjects = "objects.vof";
inline constexpr const char* kManifest = "manifest.json";
}  // namespace synthetic_files

}  // namespace vidial
