#include "seqmodel/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "common/random.hpp"

namespace vidial {

double relative_error(double analytic, double numeric) {
  const double scale = std::max(std::abs(analytic), std::abs(numeric));
  if (scale < 1e-8) return 0.0;
  return std::abs(analytic - numeric) / scale;
}

GradCheckResult compare_gradients(const nn::ParamSet& params, const nn::ParamSet& analytic,
                                  const std::function<double(const nn::ParamSet&)>& loss,
                                  const GradCheckOptions& options) {
  GradCheckResult result;
  nn::ParamSet probe = params;
  Rng rng(options.seed);
  for (nn::ParamId t = 0; t < params.size(); ++t) {
    const auto n = static_cast<std::size_t>(params[t].size());
    std::vector<std::size_t> coords(n);
    std::iota(coords.begin(), coords.end(), 0);
    const auto take = std::min<std::size_t>(n, static_cast<std::size_t>(options.samples_per_tensor));
    if (take < n) {
      rng.shuffle(std::span<std::size_t>(coords));
      coords.resize(take);
    }
    TensorCheck check{params.name(t), static_cast<int>(take), 0.0};
    for (std::size_t c : coords) {
      double& slot = probe[t].data()[c];
      const double original = slot;
      slot = original + options.epsilon;
      const double up = loss(probe);
      slot = original - options.epsilon;
      const double down = loss(probe);
      slot = original;
      const double numeric = (up - down) / (2.0 * options.epsilon);
      check.max_rel_error = std::max(check.max_rel_error, relative_error(analytic[t].data()[c], numeric));
    }
    if (result.worst_tensor.empty() || check.max_rel_error > result.max_rel_error) {
      result.max_rel_error = check.max_rel_error;
      result.worst_tensor = check.name;
    }
    result.tensors.push_back(std::move(check));
  }
  return result;
}

nn::ParamSet sequence_nll_gradient(const Seq2Seq& net, const nn::ParamSet& params, const ContextAssembly& assembly,
                                   std::span<const TokenId> target) {
  nn::ParamSet grads = params.zeros_like();
  net.nll_and_gradient(params, assembly, target, 1.0 / static_cast<double>(target.size() + 1), grads, nullptr);
  return grads;
}

GradCheckResult grad_check(const Seq2Seq& net, const nn::ParamSet& params, const ContextAssembly& assembly,
                           std::span<const TokenId> target, const GradCheckOptions& options) {
  const nn::ParamSet analytic = sequence_nll_gradient(net, params, assembly, target);
  return compare_gradients(params, analytic,
                           [&](const nn::ParamSet& p) { return net.sequence_nll(p, assembly, target); }, options);
}

}  // namespace vidial
