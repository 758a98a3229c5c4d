#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "common/error.hpp"

namespace vidial {

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
std::string read_file_text(const std::filesystem::path& path);
void write_file_text(const std::filesystem::path& path, std::string_view text);

// Little-endian append-only encoder.
class ByteWriter {
 public:
  void bytes(std::string_view raw) { buffer_.insert(buffer_.end(), raw.begin(), raw.end()); }

  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buffer_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }

  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }

  const std::vector<std::uint8_t>& data() const { return buffer_; }

 private:
  std::vector<std::uint8_t> buffer_;
};

// Little-endian cursor over a byte buffer. Reads past the end raise
// `short_code` so each file format can report its own truncation error.
class ByteReader {
 public:
  ByteReader(std::span<const std::uint8_t> data, ErrorCode short_code)
      : data_(data), short_code_(short_code) {}

  std::size_t remaining() const { return data_.size() - pos_; }
  std::size_t position() const { return pos_; }

  void require(std::size_t n, const char* what) const {
    if (remaining() < n) {
      fail(short_code_, std::string("need ") + std::to_string(n) + " bytes for " + what +
                            ", have " + std::to_string(remaining()));
    }
  }

  std::string_view bytes(std::size_t n, const char* what) {
    require(n, what);
    std::string_view out(reinterpret_cast<const char*>(data_.data() + pos_), n);
    pos_ += n;
    return out;
  }

  std::uint32_t u32(const char* what) {
    require(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(data_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }

  float f32(const char* what) { return std::bit_cast<float>(u32(what)); }

 private:
  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
  ErrorCode short_code_;
};

}  // namespace vidial
