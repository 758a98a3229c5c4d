#include "nn/param_set.hpp"

#include "common/error.hpp"

namespace vidial::nn {

ParamId ParamSet::add(std::string name, Eigen::Index rows, Eigen::Index cols, int rank) {
  if (index_.contains(name)) fail(ErrorCode::Usage, "duplicate parameter " + name);
  const ParamId id = values_.size();
  index_.emplace(name, id);
  names_.push_back(std::move(name));
  ranks_.push_back(rank);
  values_.push_back(Matrix::Zero(rows, cols));
  return id;
}

std::optional<ParamId> ParamSet::find(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

ParamSet ParamSet::zeros_like() const {
  ParamSet out = *this;
  out.set_zero();
  return out;
}

void ParamSet::set_zero() {
  for (auto& v : values_) v.setZero();
}

void ParamSet::add_scaled(const ParamSet& other, double scale) {
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += scale * other.values_[i];
}

double ParamSet::squared_norm() const {
  double total = 0.0;
  for (const auto& v : values_) total += v.squaredNorm();
  return total;
}

std::size_t ParamSet::scalar_count() const {
  std::size_t n = 0;
  for (const auto& v : values_) n += static_cast<std::size_t>(v.size());
  return n;
}

bool ParamSet::all_finite() const {
  for (const auto& v : values_) {
    if (!v.allFinite()) return false;
  }
  return true;
}

bool ParamSet::same_layout(const ParamSet& other) const {
  if (names_ != other.names_ || ranks_ != other.ranks_) return false;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (values_[i].rows() != other.values_[i].rows() || values_[i].cols() != other.values_[i].cols()) return false;
  }
  return true;
}

void ParamSet::round_to_float() {
  for (auto& v : values_) {
    v = v.unaryExpr([](double x) { return static_cast<double>(static_cast<float>(x)); });
  }
}

}  // namespace vidial::nn
