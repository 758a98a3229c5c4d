#pragma once

#include <cstdint>
#include <vector>

#include "nn/param_set.hpp"

namespace vidial::nn {

struct AdamConfig {
  double peak_lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.98;
  double eps = 1e-9;
  int warmup_steps = 6000;
  double max_grad_norm = 0.0;  // 0 disables clipping
};

// Linear warmup to peak_lr, then peak_lr * sqrt(warmup / step). Steps are 1-based.
double inverse_sqrt_lr(double peak_lr, int warmup_steps, int step);

class Adam {
 public:
  Adam(const ParamSet& layout, AdamConfig cfg);

  // Applies one update with the scheduled LR and returns the LR used.
  // Entries of `trainable` that are 0 leave that parameter untouched.
  double step(ParamSet& params, ParamSet& grads, const std::vector<std::uint8_t>* trainable = nullptr);

  int steps_taken() const { return step_; }

 private:
  AdamConfig cfg_;
  ParamSet m_;
  ParamSet v_;
  int step_ = 0;
};

}  // namespace vidial::nn
