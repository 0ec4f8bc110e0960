#pragma once

// Little-endian double payloads and the 64-bit FNV-1a checksum shared by the
// field, corpus, and checkpoint formats.

#include <bit>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "driftdecomp/error.hpp"

namespace driftdecomp::detail {

inline std::uint64_t to_le(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    std::uint64_t r = 0;
    for (int i = 0; i < 8; ++i) r |= ((v >> (8 * i)) & 0xffu) << (8 * (7 - i));
    return r;
  }
}

inline void append_doubles(std::string& buf, std::span<const double> values) {
  const std::size_t offset = buf.size();
  buf.resize(offset + 8 * values.size());
  char* out = buf.data() + offset;
  for (double v : values) {
    const std::uint64_t bits = to_le(std::bit_cast<std::uint64_t>(v));
    for (int b = 0; b < 8; ++b) *out++ = static_cast<char>((bits >> (8 * b)) & 0xffu);
  }
}

inline void append_u64(std::string& buf, std::uint64_t v) {
  for (int b = 0; b < 8; ++b) buf.push_back(static_cast<char>((v >> (8 * b)) & 0xffu));
}

inline std::uint64_t load_u64(const char* p) {
  std::uint64_t v = 0;
  for (int b = 0; b < 8; ++b) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(p[b])) << (8 * b);
  return v;
}

inline void load_doubles(const char* p, std::span<double> out) {
  for (double& v : out) {
    v = std::bit_cast<double>(load_u64(p));
    p += 8;
  }
}

inline std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ull;
  }
  return h;
}

/// Shortest text form that parses back to the same double.
inline std::string exact(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& bytes);

}  // namespace driftdecomp::detail
