#pragma once

// Little-endian primitives for the model and feature files.

#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <string_view>

#include "mmd/error.hpp"
#include "mmd/matrix.hpp"

namespace mmd::binary {

inline void write_u64(std::ostream& out, std::uint64_t v) {
  char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(bytes, 8);
}

inline void write_u32(std::ostream& out, std::uint32_t v) {
  char bytes[4];
  for (int i = 0; i < 4; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(bytes, 4);
}

inline void write_f64(std::ostream& out, double v) { write_u64(out, std::bit_cast<std::uint64_t>(v)); }

inline void write_f64s(std::ostream& out, std::span<const double> values) {
  for (double v : values) write_f64(out, v);
}

inline void write_magic(std::ostream& out, std::string_view magic) {
  out.write(magic.data(), static_cast<std::streamsize>(magic.size()));
}

/// rows, cols as u64 then row-major data.
inline void write_matrix(std::ostream& out, const Matrix& m) {
  write_u64(out, m.rows());
  write_u64(out, m.cols());
  write_f64s(out, m.values());
}

inline void read_exact(std::istream& in, char* dst, std::size_t n, std::string_view what) {
  in.read(dst, static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n) {
    fail(ErrorKind::Parse, "truncated file while reading " + std::string(what));
  }
}

inline std::uint64_t read_u64(std::istream& in, std::string_view what) {
  unsigned char bytes[8];
  read_exact(in, reinterpret_cast<char*>(bytes), 8, what);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  return v;
}

inline std::uint32_t read_u32(std::istream& in, std::string_view what) {
  unsigned char bytes[4];
  read_exact(in, reinterpret_cast<char*>(bytes), 4, what);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes[i]) << (8 * i);
  return v;
}

inline double read_f64(std::istream& in, std::string_view what) {
  return std::bit_cast<double>(read_u64(in, what));
}

inline void read_f64s(std::istream& in, std::span<double> dst, std::string_view what) {
  for (double& v : dst) v = read_f64(in, what);
}

inline void expect_magic(std::istream& in, std::string_view magic) {
  std::string got(magic.size(), '\0');
  in.read(got.data(), static_cast<std::streamsize>(magic.size()));
  if (static_cast<std::size_t>(in.gcount()) != magic.size() || got != magic) {
    fail(ErrorKind::Parse, "bad file header, expected " + std::string(magic));
  }
}

inline Matrix read_matrix(std::istream& in, std::string_view what) {
  const std::uint64_t rows = read_u64(in, what);
  const std::uint64_t cols = read_u64(in, what);
  if (rows > (1u << 24) || cols > (1u << 24)) {
    fail(ErrorKind::Parse, "implausible matrix shape in " + std::string(what));
  }
  Matrix m(rows, cols);
  read_f64s(in, m.values(), what);
  return m;
}

}  // namespace mmd::binary
