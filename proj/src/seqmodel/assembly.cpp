#include "seqmodel/assembly.hpp"

#include <algorithm>
#include <string>

#include "common/error.hpp"

namespace vidial {

namespace {

void check_item(const Episode& episode, std::size_t j) {
  if (j < 1 || j >= episode.turns.size()) {
    fail(ErrorCode::IndexOutOfRange, "episode " + episode.id + ": context length j=" + std::to_string(j) +
                                         " outside 1.." + std::to_string(episode.turns.size() - 1));
  }
}

void push(ContextAssembly& a, TokenId id, int turn, int image = 0, int content = -1, int additive = -1) {
  a.ids.push_back(id);
  a.turn_index.push_back(turn);
  a.image_index.push_back(image);
  a.content_row.push_back(content);
  a.additive_row.push_back(additive);
  a.valid.push_back(1);
}

int append_visual(ContextAssembly& a, std::span<const float> row) {
  const Eigen::Index r = a.visuals.rows();
  a.visuals.conservativeResize(r + 1, static_cast<Eigen::Index>(row.size()));
  for (std::size_t d = 0; d < row.size(); ++d) a.visuals(r, static_cast<Eigen::Index>(d)) = row[d];
  return static_cast<int>(r);
}

// First context turn (0-based) kept once at most max_turns turns remain and
// fixed + Σ per-turn costs fits into max_src_len. Returns j when nothing fits.
template <typename TurnCost>
std::size_t first_kept_turn(std::size_t j, const ModelConfig& cfg, std::size_t fixed, TurnCost cost) {
  std::size_t first = j > static_cast<std::size_t>(cfg.max_turns) ? j - static_cast<std::size_t>(cfg.max_turns) : 0;
  std::size_t total = fixed;
  for (std::size_t k = first; k < j; ++k) total += cost(k);
  while (first < j && total > static_cast<std::size_t>(cfg.max_src_len)) {
    total -= cost(first);
    ++first;
  }
  return first;
}

void require_nonempty(const Episode& episode, std::size_t first, std::size_t j) {
  if (first >= j) fail(ErrorCode::ContextEmpty, "episode " + episode.id + ": every context turn was truncated away");
}

}  // namespace

std::size_t ContextAssembly::real_length() const {
  return static_cast<std::size_t>(std::count(valid.begin(), valid.end(), std::uint8_t{1}));
}

std::size_t nv_length(const Episode& episode, std::size_t j) {
  std::size_t n = 0;
  for (std::size_t k = 0; k < j; ++k) n += episode.turns[k].tokens.size() + 1;
  return n;
}

std::size_t cv_length(const Episode& episode, std::size_t j) { return nv_length(episode, j) + 3; }

std::size_t fv_length(const Episode& episode, std::size_t j, const ObjectFeatureStore& objects) {
  std::size_t n = 2 + nv_length(episode, j);
  for (std::size_t k = 0; k <= j; ++k) n += objects.objects_in(episode.turns[k].object_idx);
  return n;
}

ContextAssembly assemble_nv(const Episode& episode, std::size_t j, const ModelConfig& cfg) {
  check_item(episode, j);
  const std::size_t first =
      first_kept_turn(j, cfg, 0, [&](std::size_t k) { return episode.turns[k].tokens.size() + 1; });
  require_nonempty(episode, first, j);

  ContextAssembly a;
  a.mode = Mode::NV;
  for (std::size_t k = first; k < j; ++k) {
    const int turn = static_cast<int>(k - first + 1);
    for (TokenId id : episode.turns[k].tokens) push(a, id, turn);
    push(a, special::kSep, turn);
  }
  a.turns_kept = j - first;
  return a;
}

ContextAssembly assemble_cv(const Episode& episode, std::size_t j, const ModelConfig& cfg,
                            const CoarseFeatureStore& coarse) {
  check_item(episode, j);
  if (static_cast<int>(coarse.dim()) != cfg.d_visual) {
    fail(ErrorCode::DimMismatch, "coarse store dim " + std::to_string(coarse.dim()) + " vs model d_visual " +
                                     std::to_string(cfg.d_visual));
  }
  const std::size_t first =
      first_kept_turn(j, cfg, 3, [&](std::size_t k) { return episode.turns[k].tokens.size() + 1; });
  require_nonempty(episode, first, j);

  ContextAssembly a;
  a.mode = Mode::CV;
  push(a, special::kCls, 0);
  for (std::size_t k = first; k < j; ++k) {
    const int turn = static_cast<int>(k - first + 1);
    const int row = append_visual(a, coarse.row(episode.turns[k].coarse_idx));
    for (TokenId id : episode.turns[k].tokens) push(a, id, turn, 0, -1, row);
    push(a, special::kSep, turn);
  }
  const int next_turn = static_cast<int>(j - first + 1);
  const int next_row = append_visual(a, coarse.row(episode.turns[j].coarse_idx));
  push(a, kVisualSlot, next_turn, 0, next_row);
  push(a, special::kSep, next_turn);
  a.turns_kept = j - first;
  return a;
}

ContextAssembly assemble_fv(const Episode& episode, std::size_t j, const ModelConfig& cfg,
                            const ObjectFeatureStore& objects) {
  check_item(episode, j);
  if (static_cast<int>(objects.dim()) != cfg.d_visual) {
    fail(ErrorCode::DimMismatch, "object store dim " + std::to_string(objects.dim()) + " vs model d_visual " +
                                     std::to_string(cfg.d_visual));
  }
  auto objects_of = [&](std::size_t k) { return objects.objects_in(episode.turns[k].object_idx); };
  const std::size_t fixed = 2 + objects_of(j);
  const std::size_t first = first_kept_turn(
      j, cfg, fixed, [&](std::size_t k) { return objects_of(k) + episode.turns[k].tokens.size() + 1; });
  require_nonempty(episode, first, j);

  ContextAssembly a;
  a.mode = Mode::FV;
  push(a, special::kCls, 0);
  for (std::size_t k = first; k <= j; ++k) {
    const int image = static_cast<int>(k - first + 1);
    const std::size_t dim = objects.dim();
    const auto block = objects.objects(episode.turns[k].object_idx);
    for (std::size_t o = 0; o < block.size() / dim; ++o) {
      const int row = append_visual(a, block.subspan(o * dim, dim));
      push(a, kVisualSlot, 0, image, row);
    }
  }
  push(a, special::kEoi, 0);
  a.prefix_length = a.size();
  for (std::size_t k = first; k < j; ++k) {
    const int turn = static_cast<int>(k - first + 1);
    for (TokenId id : episode.turns[k].tokens) push(a, id, turn);
    push(a, special::kSep, turn);
  }
  a.turns_kept = j - first;
  return a;
}

ContextAssembly assemble(const Episode& episode, std::size_t j, const ModelConfig& cfg,
                         const CoarseFeatureStore* coarse, const ObjectFeatureStore* objects) {
  switch (cfg.mode) {
    case Mode::NV: return assemble_nv(episode, j, cfg);
    case Mode::CV:
      if (coarse == nullptr) fail(ErrorCode::Usage, "CV mode needs a coarse feature store");
      return assemble_cv(episode, j, cfg, *coarse);
    case Mode::FV:
      if (objects == nullptr) fail(ErrorCode::Usage, "FV mode needs an object feature store");
      return assemble_fv(episode, j, cfg, *objects);
  }
  fail(ErrorCode::Usage, "unknown mode");
}

ContextAssembly assemble_utterance(std::span<const TokenId> utterance, const ModelConfig& cfg) {
  if (utterance.empty()) fail(ErrorCode::EmptyUtterance, "source utterance is empty");
  Episode pseudo{"utterance", {Turn{{utterance.begin(), utterance.end()}, 0, 0}, Turn{{special::kUnk}, 0, 0}}};
  ModelConfig nv = cfg;
  nv.mode = Mode::NV;
  return assemble_nv(pseudo, 1, nv);
}

void pad_to(ContextAssembly& a, std::size_t length) {
  while (a.size() < length) {
    push(a, special::kPad, 0);
    a.valid.back() = 0;
  }
}

}  // namespace vidial
