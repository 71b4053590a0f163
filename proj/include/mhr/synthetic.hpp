#pragma once

#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "mhr/dataset.hpp"

namespace mhr {

/// Desk-scale generator request. `latent_dim`/`ambient_dim` are used by
/// `linear_manifold` only.
struct SyntheticSpec {
  std::string name;          // two_moons_views | linear_manifold | noisy_redundant
  Index n = 100;
  double noise = 0.1;
  std::uint64_t seed = 0;
  Index latent_dim = 2;
  Index ambient_dim = 5;
};

/// Generated dataset plus the latent coordinates that produced it (needed by
/// manifold diagnostics: functions linear in `latent` should have zero
/// Hessian energy on noise-free data).
struct SyntheticData {
  MultiviewDataset dataset;
  Matrix latent;  // n x m, rows aligned with dataset rows (post permutation)
};

namespace detail {

inline SyntheticData two_moons_views(const SyntheticSpec& spec) {
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, std::numbers::pi);

  const Index n = spec.n;
  Matrix v1(n, 2), v2(n, 2), latent(n, 2);
  std::vector<Label> labels(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    const bool upper = (i % 2 == 0);
    const double t = unif(rng);
    double x = std::cos(t), y = std::sin(t);
    if (!upper) {
      x = 1.0 - x;
      y = 0.5 - y;
    }
    latent(i, 0) = t;
    latent(i, 1) = upper ? 1.0 : -1.0;
    labels[static_cast<std::size_t>(i)] = upper ? Label::positive : Label::negative;
    // view 1: the moons as-is; view 2: a warped second look at the same latent
    v1(i, 0) = x + spec.noise * gauss(rng);
    v1(i, 1) = y + spec.noise * gauss(rng);
    v2(i, 0) = std::sin(2.0 * t) + (upper ? 0.0 : 1.5) + spec.noise * gauss(rng);
    v2(i, 1) = t * (upper ? 1.0 : -1.0) + spec.noise * gauss(rng);
  }
  SyntheticData out;
  out.dataset = make_dataset({v1, v2}, {"moon_a", "moon_b"}, labels);
  out.latent = Matrix(n, 2);
  for (Index i = 0; i < n; ++i) out.latent.row(i) = latent.row(out.dataset.perm[static_cast<std::size_t>(i)]);
  return out;
}

inline SyntheticData linear_manifold(const SyntheticSpec& spec) {
  const Index m = spec.latent_dim, d = spec.ambient_dim, n = spec.n;
  if (m < 1 || d < m) throw Error("dataset", "linear_manifold needs 1 <= m <= d");
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);

  Matrix basis(d, m);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < m; ++j) basis(i, j) = gauss(rng);
  const Eigen::HouseholderQR<Matrix> qr(basis);
  const Matrix q = Matrix(qr.householderQ()).leftCols(m);

  Vector offset(d);
  for (Index i = 0; i < d; ++i) offset(i) = gauss(rng);

  Matrix latent(n, m);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < m; ++j) latent(i, j) = unif(rng);

  Matrix x = latent * q.transpose();
  x.rowwise() += offset.transpose();
  if (spec.noise > 0)
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < d; ++j) x(i, j) += spec.noise * gauss(rng);

  std::vector<Label> labels(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i)
    labels[static_cast<std::size_t>(i)] = latent(i, 0) >= 0 ? Label::positive : Label::negative;

  SyntheticData out;
  out.dataset = make_dataset({x}, {"ambient"}, labels);
  out.latent = Matrix(n, m);
  for (Index i = 0; i < n; ++i) out.latent.row(i) = latent.row(out.dataset.perm[static_cast<std::size_t>(i)]);
  return out;
}

inline SyntheticData noisy_redundant(const SyntheticSpec& spec) {
  const Index n = spec.n;
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  Matrix informative(n, 2), noise_view(n, 3), latent(n, 1);
  std::vector<Label> labels(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    const bool pos = (i % 2 == 0);
    labels[static_cast<std::size_t>(i)] = pos ? Label::positive : Label::negative;
    const double shift = pos ? 2.0 : -2.0;
    latent(i, 0) = shift;
    informative(i, 0) = shift + spec.noise * gauss(rng);
    informative(i, 1) = spec.noise * gauss(rng);
    for (Index j = 0; j < 3; ++j) noise_view(i, j) = gauss(rng);  // class-independent
  }
  SyntheticData out;
  out.dataset = make_dataset({informative, noise_view}, {"informative", "noise"}, labels);
  out.latent = Matrix(n, 1);
  for (Index i = 0; i < n; ++i) out.latent.row(i) = latent.row(out.dataset.perm[static_cast<std::size_t>(i)]);
  return out;
}

}  // namespace detail

inline SyntheticData make_synthetic(const SyntheticSpec& spec) {
  if (spec.n <= 0) throw Error("dataset", "generator needs n > 0");
  if (spec.name == "two_moons_views") return detail::two_moons_views(spec);
  if (spec.name == "linear_manifold") return detail::linear_manifold(spec);
  if (spec.name == "noisy_redundant") return detail::noisy_redundant(spec);
  throw Error("dataset", "unknown generator '" + spec.name + "'");
}

}  // namespace mhr
