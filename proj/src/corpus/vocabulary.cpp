#include "corpus/vocabulary.hpp"

#include <algorithm>
#include <cctype>
#include <map>

#include "common/error.hpp"

namespace vidial {

namespace {
constexpr const char* kSpecialSurface[special::kCount] = {"[PAD]", "[CLS]", "[SEP]", "[EOI]",
                                                          "[BOS]", "[EOS]", "[UNK]"};
}

Vocabulary::Vocabulary() {
  for (const char* s : kSpecialSurface) append(s);
}

Vocabulary Vocabulary::from_tokens(std::span<const std::string> content_tokens) {
  Vocabulary v;
  for (const auto& t : content_tokens) {
    if (v.ids_.contains(t)) fail(ErrorCode::MalformedRecord, "duplicate vocabulary token '" + t + "'");
    v.append(t);
  }
  return v;
}

void Vocabulary::append(std::string token) {
  ids_.emplace(token, static_cast<TokenId>(tokens_.size()));
  tokens_.push_back(std::move(token));
}

const std::string& Vocabulary::token(TokenId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size()) {
    fail(ErrorCode::IndexOutOfRange, "token id " + std::to_string(id));
  }
  return tokens_[static_cast<std::size_t>(id)];
}

TokenId Vocabulary::id(std::string_view token) const {
  auto it = ids_.find(std::string(token));
  return it == ids_.end() ? special::kUnk : it->second;
}

std::vector<std::string> Vocabulary::content_tokens() const {
  return {tokens_.begin() + special::kCount, tokens_.end()};
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string current;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!current.empty()) out.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
  }
  if (!current.empty()) out.push_back(std::move(current));
  return out;
}

Vocabulary build_vocab(std::span<const std::string> texts, std::size_t max_size, std::size_t min_freq) {
  if (max_size <= special::kCount) {
    fail(ErrorCode::Usage, "vocabulary max_size must exceed the 7 special tokens");
  }
  std::map<std::string, std::size_t> counts;
  for (const auto& text : texts) {
    for (auto& tok : tokenize(text)) ++counts[tok];
  }
  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });

  std::vector<std::string> kept;
  for (auto& [tok, n] : ranked) {
    if (n < min_freq) continue;
    if (kept.size() + special::kCount >= max_size) break;
    kept.push_back(tok);
  }
  return Vocabulary::from_tokens(kept);
}

std::vector<TokenId> encode_text(const Vocabulary& vocab, std::string_view text) {
  std::vector<TokenId> ids;
  for (const auto& tok : tokenize(text)) ids.push_back(vocab.id(tok));
  return ids;
}

std::string decode_ids(const Vocabulary& vocab, std::span<const TokenId> ids) {
  std::string out;
  for (TokenId id : ids) {
    if (is_special(id) && id != special::kUnk) continue;
    if (!out.empty()) out.push_back(' ');
    out += vocab.token(id);
  }
  return out;
}

}  // namespace vidial
