#pragma once

#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

namespace vidial::testing {

// Little-endian byte assembly written independently of the library writer.
struct Bytes {
  std::vector<std::uint8_t> data;

  Bytes& text(const std::string& s) {
    data.insert(data.end(), s.begin(), s.end());
    return *this;
  }
  Bytes& u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) data.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xffu));
    return *this;
  }
  Bytes& f32(float f) {
    std::uint32_t v;
    std::memcpy(&v, &f, 4);
    return u32(v);
  }
};

}  // namespace vidial::testing
