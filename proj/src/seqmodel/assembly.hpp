#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "corpus/dataset.hpp"
#include "corpus/feature_store.hpp"
#include "nn/param_set.hpp"
#include "seqmodel/model_config.hpp"

namespace vidial {

inline constexpr TokenId kVisualSlot = -1;

// Encoder input for one prediction item. Each position is either a token
// (ids[p] >= 0) or a visual content slot (ids[p] == kVisualSlot) whose
// embedding is the projected feature row visuals.row(content_row[p]).
struct ContextAssembly {
  Mode mode = Mode::NV;
  std::vector<TokenId> ids;
  std::vector<int> turn_index;    // sentence position; 0 for [CLS] and the object prefix
  std::vector<int> image_index;   // 1-based image position for object slots, else 0
  std::vector<int> content_row;   // -1 unless a visual content slot
  std::vector<int> additive_row;  // CV: feature row added to the token embedding, else -1
  std::vector<std::uint8_t> valid;
  nn::Matrix visuals;             // raw feature rows (d_visual columns)
  std::size_t prefix_length = 0;  // FV: [CLS] + objects + [EOI]
  std::size_t turns_kept = 0;     // context turns that survived truncation

  std::size_t size() const { return ids.size(); }
  std::size_t real_length() const;
};

// x_1 [SEP] x_2 [SEP] ... x_j [SEP]
ContextAssembly assemble_nv(const Episode& episode, std::size_t j, const ModelConfig& cfg);

// [CLS] x_1 [SEP] ... x_j [SEP] <f_{j+1}> [SEP]; token positions of turn k
// also carry f_k additively.
ContextAssembly assemble_cv(const Episode& episode, std::size_t j, const ModelConfig& cfg,
                            const CoarseFeatureStore& coarse);

// [CLS] O_1 ... O_{j+1} [EOI] x_1 [SEP] ... x_j [SEP]
ContextAssembly assemble_fv(const Episode& episode, std::size_t j, const ModelConfig& cfg,
                            const ObjectFeatureStore& objects);

// Dispatches on cfg.mode; stores may be null for modes that do not read them.
ContextAssembly assemble(const Episode& episode, std::size_t j, const ModelConfig& cfg,
                         const CoarseFeatureStore* coarse, const ObjectFeatureStore* objects);

// Single-utterance NV source, as used by the backward model: x [SEP].
ContextAssembly assemble_utterance(std::span<const TokenId> utterance, const ModelConfig& cfg);

// Appends masked [PAD] positions up to `length`.
void pad_to(ContextAssembly& assembly, std::size_t length);

// Untruncated lengths.
std::size_t nv_length(const Episode& episode, std::size_t j);
std::size_t cv_length(const Episode& episode, std::size_t j);
std::size_t fv_length(const Episode& episode, std::size_t j, const ObjectFeatureStore& objects);

}  // namespace vidial
