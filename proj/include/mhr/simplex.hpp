#pragma once

#include <algorithm>
#include <numeric>
#include <vector>

#include "mhr/common.hpp"

namespace mhr {

constexpr double kSimplexTol = 1e-12;

/// Nonnegative weight vector summing to one. Used for both the kernel
/// weights theta and the regularizer weights beta.
class SimplexWeights {
 public:
  explicit SimplexWeights(Vector w) : w_(std::move(w)) { validate(); }

  static SimplexWeights uniform(Index n) {
    if (n < 1) throw Error("simplex", "empty weight vector");
    return SimplexWeights(Vector::Constant(n, 1.0 / static_cast<double>(n)));
  }

  const Vector& vec() const { return w_; }
  double operator[](Index i) const { return w_(i); }
  Index size() const { return w_.size(); }

 private:
  void validate() const {
    if (w_.size() == 0) throw Error("simplex", "empty weight vector");
    if (w_.minCoeff() < -kSimplexTol)
      throw Error("simplex", "negative weight " + std::to_string(w_.minCoeff()));
    if (std::abs(w_.sum() - 1.0) > 1e-10)
      throw Error("simplex", "weights sum to " + std::to_string(w_.sum()));
  }

  Vector w_;
};

/// Euclidean projection onto {w >= 0, sum w = 1}.
inline SimplexWeights project_simplex(const Vector& v) {
  const Index n = v.size();
  if (n == 0) throw Error("simplex", "cannot project empty vector");
  if (!v.allFinite()) throw Error("simplex", "non-finite entries");

  std::vector<double> sorted(v.data(), v.data() + n);
  std::sort(sorted.begin(), sorted.end(), std::greater<double>());
  double cum = 0.0;
  double tau = 0.0;
  Index rho = 0;
  for (Index i = 0; i < n; ++i) {
    cum += sorted[static_cast<std::size_t>(i)];
    const double t = (cum - 1.0) / static_cast<double>(i + 1);
    if (sorted[static_cast<std::size_t>(i)] - t > 0) {
      tau = t;
      rho = i + 1;
    }
  }
  (void)rho;
  Vector w = (v.array() - tau).cwiseMax(0.0);
  w /= w.sum();  // renormalize away rounding drift
  return SimplexWeights(std::move(w));
}

}  // namespace mhr
