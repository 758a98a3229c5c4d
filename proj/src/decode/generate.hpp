#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "corpus/dataset.hpp"
#include "corpus/vocabulary.hpp"
#include "decode/rerank.hpp"

namespace vidial {

struct MiConfig {
  ScoredModel backward;
  ScoredDiscriminator disc;
  RerankWeights weights;
};

struct ResponseRecord {
  std::string episode;
  std::size_t j = 0;  // context turns 1..j, response to turn j+1
  std::string hypothesis;
  std::string reference;
  double forward_logprob = 0.0;
  std::optional<double> rerank_score;  // null unless reranking had effect
};

// One record per (episode, j), in episode then j order. With mi present and
// weights other than (1,0,0) the N-best is reranked; otherwise the forward
// top-1 is kept and rerank_score stays null.
std::vector<ResponseRecord> generate_split(const Seq2Seq& net, const nn::ParamSet& params, const Dataset& dataset,
                                          const Vocabulary& vocab, Mode mode, const CoarseFeatureStore* coarse,
                                          const ObjectFeatureStore* objects, const MiConfig* mi,
                                          const BeamOptions& beam);

std::string serialize_responses(const std::vector<ResponseRecord>& records);
std::vector<ResponseRecord> parse_responses(std::string_view text);
void write_responses(const std::vector<ResponseRecord>& records, const std::filesystem::path& path);
std::vector<ResponseRecord> read_responses(const std::filesystem::path& path);

}  // namespace vidial
