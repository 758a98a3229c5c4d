#include "decode/beam_search.hpp"

#include <algorithm>
#include <limits>

#include "common/error.hpp"

namespace vidial {

bool better_hypothesis(const Hypothesis& a, const Hypothesis& b) {
  if (a.forward_logprob != b.forward_logprob) return a.forward_logprob > b.forward_logprob;
  return a.tokens < b.tokens;
}

std::vector<TokenId> strip_eos(const std::vector<TokenId>& tokens) {
  std::vector<TokenId> out = tokens;
  if (!out.empty() && out.back() == special::kEos) out.pop_back();
  return out;
}

NBestList beam_nbest(const Seq2Seq& net, const nn::ParamSet& params, const ContextAssembly& assembly,
                     const BeamOptions& options) {
  if (options.nbest < 1 || options.beam_size < options.nbest) {
    fail(ErrorCode::Usage, "beam search needs beam_size >= nbest >= 1");
  }
  const int max_len = options.max_tgt_len > 0 ? options.max_tgt_len : net.config().max_tgt_len;
  if (max_len > net.config().max_tgt_len + 1) fail(ErrorCode::Usage, "max_tgt_len exceeds the model's target positions");

  const auto state = net.start_decoding(params, assembly);
  std::vector<Hypothesis> alive{Hypothesis{}};
  std::vector<Hypothesis> done;

  for (int step = 0; step < max_len && !alive.empty(); ++step) {
    std::vector<Hypothesis> candidates;
    for (const Hypothesis& h : alive) {
      const auto prefix = with_bos(h.tokens);
      const nn::RowVector lp = net.next_log_probs(params, state, prefix);
      for (Eigen::Index t = 0; t < lp.size(); ++t) {
        const auto id = static_cast<TokenId>(t);
        if (is_special(id) && id != special::kEos) continue;
        Hypothesis next{h.tokens, h.forward_logprob + lp[t]};
        next.tokens.push_back(id);
        candidates.push_back(std::move(next));
      }
    }
    std::sort(candidates.begin(), candidates.end(), better_hypothesis);
    alive.clear();
    for (Hypothesis& c : candidates) {
      if (alive.size() == options.beam_size) break;
      const bool finished = c.tokens.back() == special::kEos || static_cast<int>(c.tokens.size()) == max_len;
      if (finished) {
        done.push_back(std::move(c));
      } else {
        alive.push_back(std::move(c));
      }
    }
    // Log-probs only decrease, so nothing alive can overtake a full N-best.
    if (done.size() >= options.nbest) {
      std::sort(done.begin(), done.end(), better_hypothesis);
      const double floor = done[options.nbest - 1].forward_logprob;
      if (alive.empty() || alive.front().forward_logprob < floor) break;
    }
  }
  std::sort(done.begin(), done.end(), better_hypothesis);
  if (done.size() > options.nbest) done.resize(options.nbest);
  return done;
}

}  // namespace vidial
