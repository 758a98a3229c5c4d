#include "corpus/feature_store.hpp"

#include <cmath>
#include <string>

#include "common/binary_io.hpp"
#include "common/error.hpp"

namespace vidial {

namespace {

constexpr std::string_view kCoarseMagic = "VDF1";
constexpr std::string_view kObjectMagic = "VOF1";

void check_magic(ByteReader& in, std::string_view expected) {
  const auto magic = in.bytes(4, "magic");
  if (magic != expected) {
    fail(ErrorCode::BadMagic, "expected " + std::string(expected) + ", found '" + std::string(magic) + "'");
  }
}

void check_finite(std::span<const float> values, std::size_t first_index) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      fail(ErrorCode::NonFinite, "non-finite value at element " + std::to_string(first_index + i));
    }
  }
}

}  // namespace

CoarseFeatureStore::CoarseFeatureStore(std::size_t dim, std::vector<float> data)
    : dim_(dim), data_(std::move(data)) {
  if (dim_ == 0) fail(ErrorCode::ZeroDim, "coarse feature dim is 0");
  if (data_.size() % dim_ != 0) fail(ErrorCode::Truncated, "payload is not a whole number of rows");
  check_finite(data_, 0);
}

std::span<const float> CoarseFeatureStore::row(std::size_t image) const {
  if (image >= count()) fail(ErrorCode::IndexOutOfRange, "coarse image " + std::to_string(image));
  return std::span<const float>(data_).subspan(image * dim_, dim_);
}

void ObjectFeatureStore::add_image(std::span<const float> objects) {
  if (dim_ == 0) fail(ErrorCode::ZeroDim, "object feature dim is 0");
  if (objects.empty()) fail(ErrorCode::EmptyObjectSet, "image " + std::to_string(count()) + " has no objects");
  if (objects.size() % dim_ != 0) fail(ErrorCode::Truncated, "object block is not a whole number of rows");
  check_finite(objects, data_.size());
  data_.insert(data_.end(), objects.begin(), objects.end());
  object_counts_.push_back(static_cast<std::uint32_t>(objects.size() / dim_));
  offsets_.push_back(data_.size());
}

std::size_t ObjectFeatureStore::objects_in(std::size_t image) const {
  if (image >= count()) fail(ErrorCode::IndexOutOfRange, "object image " + std::to_string(image));
  return object_counts_[image];
}

std::span<const float> ObjectFeatureStore::objects(std::size_t image) const {
  if (image >= count()) fail(ErrorCode::IndexOutOfRange, "object image " + std::to_string(image));
  return std::span<const float>(data_).subspan(offsets_[image], offsets_[image + 1] - offsets_[image]);
}

CoarseFeatureStore parse_coarse_features(std::span<const std::uint8_t> bytes) {
  ByteReader in(bytes, ErrorCode::Truncated);
  check_magic(in, kCoarseMagic);
  const std::uint32_t count = in.u32("count");
  const std::uint32_t dim = in.u32("dim");
  if (dim == 0) fail(ErrorCode::ZeroDim, "coarse feature dim is 0");
  const std::uint64_t values = static_cast<std::uint64_t>(count) * dim;
  if (values * 4 > in.remaining()) {
    fail(ErrorCode::Truncated, "header declares " + std::to_string(count) + " rows of dim " +
                                   std::to_string(dim) + " but payload holds " +
                                   std::to_string(in.remaining()) + " bytes");
  }
  std::vector<float> data(values);
  for (auto& v : data) v = in.f32("payload");
  if (in.remaining() != 0) fail(ErrorCode::TrailingData, std::to_string(in.remaining()) + " bytes after payload");
  return CoarseFeatureStore(dim, std::move(data));
}

CoarseFeatureStore load_coarse_features(const std::filesystem::path& path) {
  return parse_coarse_features(read_file_bytes(path));
}

std::vector<std::uint8_t> serialize_coarse_features(const CoarseFeatureStore& store) {
  ByteWriter out;
  out.bytes(kCoarseMagic);
  out.u32(static_cast<std::uint32_t>(store.count()));
  out.u32(static_cast<std::uint32_t>(store.dim()));
  for (float v : store.data()) out.f32(v);
  return out.data();
}

void write_coarse_features(const CoarseFeatureStore& store, const std::filesystem::path& path) {
  write_file_bytes(path, serialize_coarse_features(store));
}

ObjectFeatureStore parse_object_features(std::span<const std::uint8_t> bytes) {
  ByteReader in(bytes, ErrorCode::Truncated);
  check_magic(in, kObjectMagic);
  const std::uint32_t images = in.u32("num_images");
  const std::uint32_t dim = in.u32("dim");
  if (dim == 0) fail(ErrorCode::ZeroDim, "object feature dim is 0");
  ObjectFeatureStore store(dim);
  std::vector<float> block;
  for (std::uint32_t i = 0; i < images; ++i) {
    const std::uint32_t m = in.u32("object count");
    if (m == 0) fail(ErrorCode::EmptyObjectSet, "image " + std::to_string(i) + " declares 0 objects");
    const std::uint64_t values = static_cast<std::uint64_t>(m) * dim;
    if (values * 4 > in.remaining()) {
      fail(ErrorCode::Truncated, "image " + std::to_string(i) + " declares " + std::to_string(m) +
                                     " objects but payload holds " + std::to_string(in.remaining()) + " bytes");
    }
    block.resize(values);
    for (auto& v : block) v = in.f32("payload");
    store.add_image(block);
  }
  if (in.remaining() != 0) fail(ErrorCode::TrailingData, std::to_string(in.remaining()) + " bytes after payload");
  return store;
}

ObjectFeatureStore load_object_features(const std::filesystem::path& path) {
  return parse_object_features(read_file_bytes(path));
}

std::vector<std::uint8_t> serialize_object_features(const ObjectFeatureStore& store) {
  ByteWriter out;
  out.bytes(kObjectMagic);
  out.u32(static_cast<std::uint32_t>(store.count()));
  out.u32(static_cast<std::uint32_t>(store.dim()));
  for (std::size_t i = 0; i < store.count(); ++i) {
    out.u32(static_cast<std::uint32_t>(store.objects_in(i)));
    for (float v : store.objects(i)) out.f32(v);
  }
  return out.data();
}

void write_object_features(const ObjectFeatureStore& store, const std::filesystem::path& path) {
  write_file_bytes(path, serialize_object_features(store));
}

}  // namespace vidial
