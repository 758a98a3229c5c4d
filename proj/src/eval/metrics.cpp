#include "eval/metrics.hpp"

#include <cmath>
#include <json.hpp>
#include <map>

#include "common/error.hpp"

namespace vidial {

namespace {

using NgramCounts = std::map<std::vector<std::string>, std::size_t>;

NgramCounts count_ngrams(const TokenSeq& seq, int n) {
  NgramCounts counts;
  const auto len = static_cast<int>(seq.size());
  for (int i = 0; i + n <= len; ++i) ++counts[TokenSeq(seq.begin() + i, seq.begin() + i + n)];
  return counts;
}

std::size_t ngram_total(const TokenSeq& seq, int n) {
  return seq.size() >= static_cast<std::size_t>(n) ? seq.size() - static_cast<std::size_t>(n) + 1 : 0;
}

std::size_t clipped_overlap(const NgramCounts& cand, const NgramCounts& ref) {
  std::size_t overlap = 0;
  for (const auto& [gram, c] : cand) {
    const auto it = ref.find(gram);
    if (it != ref.end()) overlap += std::min(c, it->second);
  }
  return overlap;
}

void check_pairs(std::size_t a, std::size_t b, int n) {
  if (a != b) fail(ErrorCode::LengthMismatch, "candidate and reference counts differ");
  if (a == 0) fail(ErrorCode::LengthMismatch, "no candidate/reference pairs");
  if (n < 1) fail(ErrorCode::InvalidOrder, "n-gram order must be at least 1");
}

}  // namespace

double bleu_n(std::span<const TokenSeq> candidates, std::span<const TokenSeq> references, int n) {
  check_pairs(candidates.size(), references.size(), n);
  double log_sum = 0.0;
  for (int k = 1; k <= n; ++k) {
    std::size_t matched = 0, total = 0;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      matched += clipped_overlap(count_ngrams(candidates[i], k), count_ngrams(references[i], k));
      total += ngram_total(candidates[i], k);
    }
    if (matched == 0) return 0.0;
    log_sum += std::log(static_cast<double>(matched) / static_cast<double>(total));
  }
  std::size_t c = 0, r = 0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    c += candidates[i].size();
    r += references[i].size();
  }
  const double bp = c > r ? 1.0 : std::exp(1.0 - static_cast<double>(r) / static_cast<double>(c));
  return 100.0 * bp * std::exp(log_sum / n);
}

double dist_n(std::span<const TokenSeq> candidates, int n) {
  if (n < 1) fail(ErrorCode::InvalidOrder, "n-gram order must be at least 1");
  NgramCounts distinct;
  std::size_t tokens = 0;
  for (const auto& c : candidates) {
    for (const auto& [gram, count] : count_ngrams(c, n)) distinct[gram] += count;
    tokens += c.size();
  }
  return tokens == 0 ? 0.0 : static_cast<double>(distinct.size()) / static_cast<double>(tokens);
}

double rouge_n_f(std::span<const TokenSeq> candidates, std::span<const TokenSeq> references, int n) {
  check_pairs(candidates.size(), references.size(), n);
  double total = 0.0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto overlap = static_cast<double>(
        clipped_overlap(count_ngrams(candidates[i], n), count_ngrams(references[i], n)));
    const auto nc = static_cast<double>(ngram_total(candidates[i], n));
    const auto nr = static_cast<double>(ngram_total(references[i], n));
    const double p = nc > 0 ? overlap / nc : 0.0;
    const double r = nr > 0 ? overlap / nr : 0.0;
    total += p + r > 0 ? 2.0 * p * r / (p + r) : 0.0;
  }
  return total / static_cast<double>(candidates.size());
}

MetricsReport evaluate_all(const std::vector<ResponseRecord>& records) {
  if (records.empty()) fail(ErrorCode::MalformedRecord, "no responses to evaluate");
  std::vector<TokenSeq> cand, ref;
  MetricsReport report;
  for (const auto& r : records) {
    cand.push_back(tokenize(r.hypothesis));
    ref.push_back(tokenize(r.reference));
    report.tokens += cand.back().size();
  }
  report.responses = records.size();
  report.bleu1 = bleu_n(cand, ref, 1);
  report.bleu2 = bleu_n(cand, ref, 2);
  report.bleu4 = bleu_n(cand, ref, 4);
  report.dist1 = dist_n(cand, 1);
  report.dist2 = dist_n(cand, 2);
  report.dist3 = dist_n(cand, 3);
  report.dist4 = dist_n(cand, 4);
  report.rouge1_f = rouge_n_f(cand, ref, 1);
  report.rouge2_f = rouge_n_f(cand, ref, 2);
  report.rouge4_f = rouge_n_f(cand, ref, 4);
  return report;
}

std::string MetricsReport::to_json() const {
  nlohmann::ordered_json j;
  j["bleu1"] = bleu1;
  j["bleu2"] = bleu2;
  j["bleu4"] = bleu4;
  j["dist1"] = dist1;
  j["dist2"] = dist2;
  j["dist3"] = dist3;
  j["dist4"] = dist4;
  j["rouge1_f"] = rouge1_f;
  j["rouge2_f"] = rouge2_f;
  j["rouge4_f"] = rouge4_f;
  j["adv_success"] = adv_success ? nlohmann::ordered_json(*adv_success) : nlohmann::ordered_json(nullptr);
  j["responses"] = responses;
  j["tokens"] = tokens;
  return j.dump(2) + "\n";
}

}  // namespace vidial
