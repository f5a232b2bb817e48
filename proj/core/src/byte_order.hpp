#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <string>

namespace lantern::detail {

template <typename U>
U byteswap_if_big(U v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    U out = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      out = static_cast<U>((out << 8) | ((v >> (8 * i)) & 0xFF));
    }
    return out;
  }
}

inline void put_u64(std::string& out, std::uint64_t v) {
  v = byteswap_if_big(v);
  char buf[8];
  std::memcpy(buf, &v, 8);
  out.append(buf, 8);
}

inline void put_f64(std::string& out, double d) { put_u64(out, std::bit_cast<std::uint64_t>(d)); }

inline void put_f32(std::string& out, float f) {
  auto v = byteswap_if_big(std::bit_cast<std::uint32_t>(f));
  char buf[4];
  std::memcpy(buf, &v, 4);
  out.append(buf, 4);
}

inline std::uint64_t get_u64(const char* p) {
  std::uint64_t v;
  std::memcpy(&v, p, 8);
  return byteswap_if_big(v);
}

inline double get_f64(const char* p) { return std::bit_cast<double>(get_u64(p)); }

inline float get_f32(const char* p) {
  std::uint32_t v;
  std::memcpy(&v, p, 4);
  return std::bit_cast<float>(byteswap_if_big(v));
}

}  // namespace lantern::detail
