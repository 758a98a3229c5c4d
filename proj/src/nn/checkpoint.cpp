#include "nn/checkpoint.hpp"

#include "common/binary_io.hpp"
#include "common/error.hpp"

namespace vidial::nn {

namespace {
constexpr std::string_view kMagic = "VCKPT1";
}

std::vector<std::uint8_t> serialize_checkpoint(const std::string& header, const ParamSet& params) {
  ByteWriter out;
  out.bytes(kMagic);
  out.u32(kCheckpointVersion);
  out.u32(static_cast<std::uint32_t>(header.size()));
  out.bytes(header);
  out.u32(static_cast<std::uint32_t>(params.size()));
  for (ParamId i = 0; i < params.size(); ++i) {
    const Matrix& m = params[i];
    out.u32(static_cast<std::uint32_t>(params.name(i).size()));
    out.bytes(params.name(i));
    out.u32(static_cast<std::uint32_t>(params.rank(i)));
    if (params.rank(i) == 1) {
      out.u32(static_cast<std::uint32_t>(m.cols()));
    } else {
      out.u32(static_cast<std::uint32_t>(m.rows()));
      out.u32(static_cast<std::uint32_t>(m.cols()));
    }
    for (Eigen::Index k = 0; k < m.size(); ++k) out.f32(static_cast<float>(m.data()[k]));
  }
  return out.data();
}

CheckpointData parse_checkpoint(std::span<const std::uint8_t> bytes) {
  ByteReader in(bytes, ErrorCode::CorruptCheckpoint);
  if (in.bytes(kMagic.size(), "magic") != kMagic) fail(ErrorCode::CorruptCheckpoint, "not a VCKPT1 file");
  const std::uint32_t version = in.u32("version");
  if (version != kCheckpointVersion) {
    fail(ErrorCode::VersionMismatch, "checkpoint format version " + std::to_string(version));
  }
  CheckpointData data;
  data.header = std::string(in.bytes(in.u32("header length"), "header"));
  const std::uint32_t tensors = in.u32("tensor count");
  for (std::uint32_t t = 0; t < tensors; ++t) {
    std::string name(in.bytes(in.u32("name length"), "name"));
    const std::uint32_t rank = in.u32("rank");
    if (rank != 1 && rank != 2) fail(ErrorCode::CorruptCheckpoint, "tensor " + name + " has rank " + std::to_string(rank));
    const std::uint32_t rows = rank == 1 ? 1 : in.u32("dims");
    const std::uint32_t cols = in.u32("dims");
    const std::uint64_t count = static_cast<std::uint64_t>(rows) * cols;
    in.require(count * 4, "tensor payload");
    const ParamId id = data.params.add(name, rows, cols, static_cast<int>(rank));
    Matrix& m = data.params[id];
    for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = static_cast<double>(in.f32("payload"));
  }
  if (in.remaining() != 0) fail(ErrorCode::CorruptCheckpoint, "trailing bytes after tensors");
  return data;
}

void write_checkpoint(const std::filesystem::path& path, const std::string& header, const ParamSet& params) {
  write_file_bytes(path, serialize_checkpoint(header, params));
}

CheckpointData read_checkpoint(const std::filesystem::path& path) { return parse_checkpoint(read_file_bytes(path)); }

void assign_by_name(ParamSet& target, const ParamSet& loaded) {
  for (ParamId i = 0; i < target.size(); ++i) {
    const auto found = loaded.find(target.name(i));
    if (!found) fail(ErrorCode::CorruptCheckpoint, "missing tensor " + target.name(i));
    const Matrix& src = loaded[*found];
    if (src.rows() != target[i].rows() || src.cols() != target[i].cols()) {
      fail(ErrorCode::CorruptCheckpoint, "shape mismatch for tensor " + target.name(i));
    }
    target[i] = src;
  }
  if (loaded.size() != target.size()) fail(ErrorCode::CorruptCheckpoint, "unexpected extra tensors");
}

}  // namespace vidial::nn
