#pragma once

#include <cstring>
#include <fstream>
#include <string>

#include "mhr/common.hpp"

namespace mhr {

/// Binary matrix cache. 16-byte little-endian header:
///   bytes 0-3  magic "MHRM"
///   byte  4    dtype code (1 = float64)
///   byte  5    kind (0 = kernel, 1 = laplacian, 2 = hessian)
///   bytes 6-7  reserved (zero)
///   bytes 8-15 n as uint64
/// followed by n*n float64 values in row-major order.
inline void save_matrix_cache(const std::string& path, const Matrix& m, std::uint8_t kind = 0) {
  if (m.rows() != m.cols()) throw Error("io", "cache format is for square matrices");
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("io", "cannot write " + path);
  char header[16] = {'M', 'H', 'R', 'M', 1, static_cast<char>(kind), 0, 0};
  const std::uint64_t n = static_cast<std::uint64_t>(m.rows());
  std::memcpy(header + 8, &n, 8);
  f.write(header, 16);
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) {
      const double v = m(i, j);
      f.write(reinterpret_cast<const char*>(&v), 8);
    }
}

inline Matrix load_matrix_cache(const std::string& path, std::uint8_t* kind = nullptr) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("io", "cannot read " + path);
  char header[16];
  f.read(header, 16);
  if (!f || std::memcmp(header, "MHRM", 4) != 0) throw Error("io", "bad cache magic in " + path);
  if (header[4] != 1) throw Error("io", "unsupported dtype code in " + path);
  if (kind) *kind = static_cast<std::uint8_t>(header[5]);
  std::uint64_t n = 0;
  std::memcpy(&n, header + 8, 8);
  Matrix m(static_cast<Index>(n), static_cast<Index>(n));
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) {
      double v;
      f.read(reinterpret_cast<char*>(&v), 8);
      m(i, j) = v;
    }
  if (!f) throw Error("io", "truncated cache file " + path);
  return m;
}

}  // namespace mhr
