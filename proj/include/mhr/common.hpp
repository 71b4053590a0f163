#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace mhr {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Error carrying the name of the pipeline stage that raised it.
class Error : public std::runtime_error {
 public:
  Error(std::string stage, const std::string& what)
      : std::runtime_error(stage + ": " + what), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

// FNV-1a over raw bytes, used for dataset/model fingerprints.
inline std::uint64_t fnv1a(const void* data, std::size_t len,
                           std::uint64_t h = 0xcbf29ce484222325ull) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::uint64_t fnv1a(const Matrix& m, std::uint64_t h = 0xcbf29ce484222325ull) {
  for (Index j = 0; j < m.cols(); ++j)
    h = fnv1a(m.col(j).data(), sizeof(double) * static_cast<std::size_t>(m.rows()), h);
  return h;
}

}  // namespace mhr
