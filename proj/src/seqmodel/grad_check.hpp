#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "seqmodel/seq2seq.hpp"

namespace vidial {

struct GradCheckOptions {
  double epsilon = 1e-4;
  int samples_per_tensor = 200;  // every coordinate when the tensor is smaller
  std::uint64_t seed = 1;
};

struct TensorCheck {
  std::string name;
  int coordinates = 0;
  double max_rel_error = 0.0;
};

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst_tensor;
  std::vector<TensorCheck> tensors;
};

// |a - n| / max(|a|, |n|), and 0 when both magnitudes are below 1e-8.
double relative_error(double analytic, double numeric);

// Compares `analytic` against central differences of `loss` at `params`.
GradCheckResult compare_gradients(const nn::ParamSet& params, const nn::ParamSet& analytic,
                                  const std::function<double(const nn::ParamSet&)>& loss,
                                  const GradCheckOptions& options);

// Gradient of sequence_nll (dropout off) against finite differences.
GradCheckResult grad_check(const Seq2Seq& net, const nn::ParamSet& params, const ContextAssembly& assembly,
                           std::span<const TokenId> target, const GradCheckOptions& options = {});

// Analytic gradient of sequence_nll.
nn::ParamSet sequence_nll_gradient(const Seq2Seq& net, const nn::ParamSet& params, const ContextAssembly& assembly,
                                   std::span<const TokenId> target);

}  // namespace vidial
