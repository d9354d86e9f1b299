#pragma once

#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>

#include "fas/error.hpp"

// Little-endian primitives for the dataset and checkpoint containers.
namespace fas::binary {

template <typename UInt>
void write_le(std::ostream& out, UInt v) {
  char bytes[sizeof(UInt)];
  for (std::size_t i = 0; i < sizeof(UInt); ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(bytes, sizeof(UInt));
}

inline void write_f32(std::ostream& out, float v) { write_le(out, std::bit_cast<std::uint32_t>(v)); }
inline void write_f64(std::ostream& out, double v) { write_le(out, std::bit_cast<std::uint64_t>(v)); }

template <typename UInt>
UInt read_le(std::istream& in, const std::string& context) {
  unsigned char bytes[sizeof(UInt)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(UInt))) {
    throw Error(ErrorKind::io, context + ": unexpected end of file");
  }
  UInt v = 0;
  for (std::size_t i = 0; i < sizeof(UInt); ++i) v |= static_cast<UInt>(bytes[i]) << (8 * i);
  return v;
}

inline float read_f32(std::istream& in, const std::string& context) {
  return std::bit_cast<float>(read_le<std::uint32_t>(in, context));
}
inline double read_f64(std::istream& in, const std::string& context) {
  return std::bit_cast<double>(read_le<std::uint64_t>(in, context));
}

inline std::string read_bytes(std::istream& in, std::size_t n, const std::string& context) {
  std::string s(n, '\0');
  if (n && !in.read(s.data(), static_cast<std::streamsize>(n))) {
    throw Error(ErrorKind::io, context + ": unexpected end of file");
  }
  return s;
}

}  // namespace fas::binary
