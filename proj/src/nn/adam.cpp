#include "nn/adam.hpp"

#include <cmath>

namespace vidial::nn {

double inverse_sqrt_lr(double peak_lr, int warmup_steps, int step) {
  if (warmup_steps <= 0) return peak_lr / std::sqrt(static_cast<double>(std::max(step, 1)));
  if (step <= warmup_steps) return peak_lr * static_cast<double>(step) / static_cast<double>(warmup_steps);
  return peak_lr * std::sqrt(static_cast<double>(warmup_steps) / static_cast<double>(step));
}

Adam::Adam(const ParamSet& layout, AdamConfig cfg) : cfg_(cfg), m_(layout.zeros_like()), v_(layout.zeros_like()) {}

double Adam::step(ParamSet& params, ParamSet& grads, const std::vector<std::uint8_t>* trainable) {
  ++step_;
  const double lr = inverse_sqrt_lr(cfg_.peak_lr, cfg_.warmup_steps, step_);
  if (cfg_.max_grad_norm > 0.0) {
    const double norm = std::sqrt(grads.squared_norm());
    if (norm > cfg_.max_grad_norm) {
      for (std::size_t i = 0; i < grads.size(); ++i) grads[i] *= cfg_.max_grad_norm / norm;
    }
  }
  const double c1 = 1.0 - std::pow(cfg_.beta1, step_);
  const double c2 = 1.0 - std::pow(cfg_.beta2, step_);
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (trainable != nullptr && (*trainable)[i] == 0) continue;
    m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * grads[i];
    v_[i] = cfg_.beta2 * v_[i] + (1.0 - cfg_.beta2) * grads[i].cwiseAbs2();
    params[i].array() -= lr * (m_[i].array() / c1) / ((v_[i].array() / c2).sqrt() + cfg_.eps);
  }
  return lr;
}

}  // namespace vidial::nn
