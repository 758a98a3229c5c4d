#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace vidial {

using TokenId = int;

namespace special {
inline constexpr TokenId kPad = 0;
inline constexpr TokenId kCls = 1;
inline constexpr TokenId kSep = 2;
inline constexpr TokenId kEoi = 3;
inline constexpr TokenId kBos = 4;
inline constexpr TokenId kEos = 5;
inline constexpr TokenId kUnk = 6;
inline constexpr TokenId kCount = 7;
}  // namespace special

inline bool is_special(TokenId id) { return id >= 0 && id < special::kCount; }

// Token <-> id mapping. Ids 0..6 are always the special tokens; corpus tokens
// follow densely from 7.
class Vocabulary {
 public:
  Vocabulary();

  // Builds from surface tokens that follow the special block, in id order.
  static Vocabulary from_tokens(std::span<const std::string> content_tokens);

  std::size_t size() const { return tokens_.size(); }
  const std::string& token(TokenId id) const;
  TokenId id(std::string_view token) const;  // kUnk when absent

  // Content tokens only (ids >= 7), in id order.
  std::vector<std::string> content_tokens() const;

  bool operator==(const Vocabulary& other) const { return tokens_ == other.tokens_; }

 private:
  void append(std::string token);

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> ids_;
};

// Lowercased whitespace split.
std::vector<std::string> tokenize(std::string_view text);

// Frequency-ranked vocabulary: count desc, ties broken lexicographically,
// tokens below min_freq dropped, at most max_size entries including specials.
Vocabulary build_vocab(std::span<const std::string> texts, std::size_t max_size, std::size_t min_freq);

std::vector<TokenId> encode_text(const Vocabulary& vocab, std::string_view text);

// Inverse of encode_text for display; specials are skipped except [UNK].
std::string decode_ids(const Vocabulary& vocab, std::span<const TokenId> ids);

}  // namespace vidial
