#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace vidial::nn {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowVector = Eigen::Matrix<double, 1, Eigen::Dynamic>;

using ParamId = std::size_t;

// Ordered collection of named parameter tensors. Vectors are stored as 1 x n
// matrices with rank 1; everything else is rank 2. A gradient buffer is a
// ParamSet with the same layout.
class ParamSet {
 public:
  ParamId add(std::string name, Eigen::Index rows, Eigen::Index cols, int rank = 2);
  ParamId add_vector(std::string name, Eigen::Index n) { return add(std::move(name), 1, n, 1); }

  std::size_t size() const { return values_.size(); }
  Matrix& operator[](ParamId id) { return values_[id]; }
  const Matrix& operator[](ParamId id) const { return values_[id]; }
  const std::string& name(ParamId id) const { return names_[id]; }
  int rank(ParamId id) const { return ranks_[id]; }
  std::optional<ParamId> find(std::string_view name) const;

  ParamSet zeros_like() const;
  void set_zero();
  void add_scaled(const ParamSet& other, double scale);
  double squared_norm() const;
  std::size_t scalar_count() const;
  bool all_finite() const;
  bool same_layout(const ParamSet& other) const;

  // Rounds every entry to the nearest float32 so the set survives a
  // float32 checkpoint round trip bit-exactly.
  void round_to_float();

 private:
  std::vector<std::string> names_;
  std::vector<int> ranks_;
  std::vector<Matrix> values_;
  std::unordered_map<std::string, ParamId> index_;
};

}  // namespace vidial::nn
