#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace vidial {

// One pooled vector per image, row-major count x dim (VDF1 on disk).
class CoarseFeatureStore {
 public:
  CoarseFeatureStore() = default;
  CoarseFeatureStore(std::size_t dim, std::vector<float> data);

  std::size_t count() const { return dim_ == 0 ? 0 : data_.size() / dim_; }
  std::size_t dim() const { return dim_; }
  std::span<const float> row(std::size_t image) const;
  std::span<const float> data() const { return data_; }

 private:
  std::size_t dim_ = 0;
  std::vector<float> data_;
};

// A set of m_j >= 1 object vectors per image (VOF1 on disk).
class ObjectFeatureStore {
 public:
  ObjectFeatureStore() = default;
  explicit ObjectFeatureStore(std::size_t dim) : dim_(dim) { offsets_.push_back(0); }

  void add_image(std::span<const float> objects);  // size must be a multiple of dim

  std::size_t count() const { return object_counts_.size(); }
  std::size_t dim() const { return dim_; }
  std::size_t objects_in(std::size_t image) const;
  // Row-major objects_in(image) x dim block.
  std::span<const float> objects(std::size_t image) const;

 private:
  std::size_t dim_ = 0;
  std::vector<std::uint32_t> object_counts_;
  std::vector<std::size_t> offsets_;
  std::vector<float> data_;
};

CoarseFeatureStore load_coarse_features(const std::filesystem::path& path);
CoarseFeatureStore parse_coarse_features(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> serialize_coarse_features(const CoarseFeatureStore& store);
void write_coarse_features(const CoarseFeatureStore& store, const std::filesystem::path& path);

ObjectFeatureStore load_object_features(const std::filesystem::path& path);
ObjectFeatureStore parse_object_features(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> serialize_object_features(const ObjectFeatureStore& store);
void write_object_features(const ObjectFeatureStore& store, const std::filesystem::path& path);

}  // namespace vidial
