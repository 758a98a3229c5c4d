#include "corpus/synthetic.hpp"

#include <json.hpp>

#include "common/binary_io.hpp"
#include "common/error.hpp"
#include "common/random.hpp"

namespace vidial {

void SyntheticSpec::validate() const {
  auto bad = [](const std::string& why) { fail(ErrorCode::SpecInvalid, why); };
  if (num_episodes == 0) bad("num_episodes must be >= 1");
  if (turns_min < 2) bad("turns_min must be >= 2");
  if (turns_max < turns_min) bad("turns_max must be >= turns_min");
  if (num_classes < 2) bad("num_classes must be >= 2");
  if (vocab_size <= special::kCount + num_classes) bad("vocab_size must exceed 7 + num_classes");
  if (coarse_dim < num_classes) bad("coarse_dim must be >= num_classes");
  if (objects_per_image == 0) bad("objects_per_image must be >= 1");
  if (tokens_per_turn == 0) bad("tokens_per_turn must be >= 1");
  if (!(noise_scale >= 0.0)) bad("noise_scale must be >= 0");
}

std::size_t SyntheticSpec::band_size() const { return (vocab_size - special::kCount) / num_classes; }

std::string synthetic_token(std::size_t k) { return "w" + std::to_string(k); }

std::size_t synthetic_band(const SyntheticSpec& spec, const std::string& token) {
  if (token.size() < 2 || token[0] != 'w') return spec.num_classes;
  std::size_t k = 0;
  for (std::size_t i = 1; i < token.size(); ++i) {
    if (token[i] < '0' || token[i] > '9') return spec.num_classes;
    k = k * 10 + static_cast<std::size_t>(token[i] - '0');
  }
  const std::size_t band = k / spec.band_size();
  return band < spec.num_classes ? band : spec.num_classes;
}

std::string SyntheticManifest::to_json() const {
  nlohmann::ordered_json j;
  j["num_episodes"] = spec.num_episodes;
  j["turns_min"] = spec.turns_min;
  j["turns_max"] = spec.turns_max;
  j["vocab_size"] = spec.vocab_size;
  j["num_classes"] = spec.num_classes;
  j["coarse_dim"] = spec.coarse_dim;
  j["objects_per_image"] = spec.objects_per_image;
  j["noise_scale"] = spec.noise_scale;
  j["seed"] = spec.seed;
  j["tokens_per_turn"] = spec.tokens_per_turn;
  j["copy_previous"] = spec.copy_previous;
  j["deterministic_text"] = spec.deterministic_text;
  j["band_size"] = spec.band_size();
  j["image_classes"] = image_classes;
  return j.dump(2) + "\n";
}

SyntheticCorpus generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  const std::size_t band = spec.band_size();
  const std::size_t dim = spec.coarse_dim;

  SyntheticCorpus corpus;
  corpus.manifest.spec = spec;
  std::vector<float> coarse_data;
  ObjectFeatureStore objects(dim);
  std::vector<float> object_block(spec.objects_per_image * dim);

  auto noisy_centroid = [&](std::size_t cls, std::span<float> out) {
    for (std::size_t d = 0; d < dim; ++d) {
      const double centre = d == cls ? 1.0 : 0.0;
      out[d] = static_cast<float>(centre + spec.noise_scale * rng.normal());
    }
  };

  std::size_t image = 0;
  for (std::size_t e = 0; e < spec.num_episodes; ++e) {
    TextEpisode episode;
    episode.id = "ep" + std::to_string(e);
    const std::size_t turns = spec.turns_min + rng.below(spec.turns_max - spec.turns_min + 1);
    std::string previous_first;
    for (std::size_t t = 0; t < turns; ++t, ++image) {
      const std::size_t cls = rng.below(spec.num_classes);
      corpus.manifest.image_classes.push_back(cls);

      std::vector<std::string> words;
      for (std::size_t k = 0; k < spec.tokens_per_turn; ++k) {
        const std::size_t offset = spec.deterministic_text ? k % band : rng.below(band);
        words.push_back(synthetic_token(cls * band + offset));
      }
      const std::string first = words.front();
      if (spec.copy_previous && t > 0) words.push_back(previous_first);
      previous_first = first;

      std::string text;
      for (const auto& w : words) {
        if (!text.empty()) text.push_back(' ');
        text += w;
      }
      episode.turns.push_back(TextTurn{text, image, image});

      const std::size_t row = coarse_data.size();
      coarse_data.resize(row + dim);
      noisy_centroid(cls, std::span<float>(coarse_data).subspan(row, dim));
      for (std::size_t o = 0; o < spec.objects_per_image; ++o) {
        noisy_centroid(cls, std::span<float>(object_block).subspan(o * dim, dim));
      }
      objects.add_image(object_block);
    }
    corpus.episodes.push_back(std::move(episode));
  }
  corpus.coarse = CoarseFeatureStore(dim, std::move(coarse_data));
  corpus.objects = std::move(objects);
  return corpus;
}

void write_synthetic(const SyntheticCorpus& corpus, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail(ErrorCode::Io, "cannot create " + dir.string() + ": " + ec.message());
  write_episodes(corpus.episodes, dir / synthetic_files::kEpisodes);
  write_coarse_features(corpus.coarse, dir / synthetic_files::kCoarse);
  write_object_features(corpus.objects, dir / synthetic_files::kObjects);
  write_file_text(dir / synthetic_files::kManifest, corpus.manifest.to_json());
}

}  // namespace vidial
