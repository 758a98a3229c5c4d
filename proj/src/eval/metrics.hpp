#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "decode/generate.hpp"

namespace vidial {

using TokenSeq = std::vector<std::string>;

// Corpus BLEU with clipped n-gram precisions p_1..p_n, uniform geometric mean,
// brevity penalty min(1, e^{1-r/c}); 0..100. No smoothing.
double bleu_n(std::span<const TokenSeq> candidates, std::span<const TokenSeq> references, int n);

// Distinct n-grams over all candidates divided by the total token count.
double dist_n(std::span<const TokenSeq> candidates, int n);

// Mean over pairs of the n-gram overlap F1.
double rouge_n_f(std::span<const TokenSeq> candidates, std::span<const TokenSeq> references, int n);

struct MetricsReport {
  double bleu1 = 0, bleu2 = 0, bleu4 = 0;
  double dist1 = 0, dist2 = 0, dist3 = 0, dist4 = 0;
  double rouge1_f = 0, rouge2_f = 0, rouge4_f = 0;
  std::optional<double> adv_success;
  std::size_t responses = 0;
  std::size_t tokens = 0;

  std::string to_json() const;
};

MetricsReport evaluate_all(const std::vector<ResponseRecord>& records);

}  // namespace vidial
