#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "mhr/kernels.hpp"
#include "mhr/synthetic.hpp"

using namespace mhr;

namespace {

Matrix random_psd(Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss;
  Matrix a(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) a(i, j) = gauss(rng);
  return a * a.transpose();
}

Vector random_simplex(Index n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = unif(rng);
  return v / v.sum();
}

}  // namespace

TEST_CASE("gaussian gram has unit diagonal") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> gauss;
  Matrix x(7, 3);
  for (Index i = 0; i < 7; ++i)
    for (Index j = 0; j < 3; ++j) x(i, j) = gauss(rng);
  const auto k = gram(x, {.family = KernelFamily::gaussian_rbf, .bandwidth = 1.3});
  CHECK(k.matrix.diagonal().isApproxToConstant(1.0, 1e-15));
  CHECK((k.matrix - k.matrix.transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("linear kernel on orthonormal rows is the identity") {
  Matrix x = Matrix::Identity(2, 3);
  const auto k = gram(x, {.family = KernelFamily::linear});
  CHECK(k.matrix.isApprox(Matrix::Identity(2, 2), 1e-15));
}

TEST_CASE("gaussian off-diagonal matches exp(-d^2/(2 sigma^2))") {
  Matrix x(2, 1);
  x << 0.0, 2.0;
  const auto k = gram(x, {.family = KernelFamily::gaussian_rbf, .bandwidth = 1.0});
  CHECK(k.matrix(0, 1) == Catch::Approx(std::exp(-2.0)).epsilon(1e-12));
}

TEST_CASE("gram rejects non-finite features and bad specs") {
  Matrix x(2, 1);
  x << 0.0, std::nan("");
  CHECK_THROWS_AS(gram(x, {.family = KernelFamily::linear}), Error);
  Matrix ok = Matrix::Ones(2, 1);
  CHECK_THROWS_AS(gram(ok, {.family = KernelFamily::gaussian_rbf, .bandwidth = -1.0}), Error);
  CHECK_THROWS_AS(gram(ok, KernelSpec{.family = KernelFamily::polynomial, .degree = 0}), Error);
}

TEST_CASE("combine_kernels with a unit weight returns that kernel") {
  std::mt19937_64 rng(2);
  std::vector<GramKernel> ks{{random_psd(4, rng), "a"}, {random_psd(4, rng), "b"}};
  Vector th(2);
  th << 1.0, 0.0;
  const auto k = combine_kernels(ks, SimplexWeights(th));
  CHECK(k.matrix.isApprox(ks[0].matrix, 1e-15));
}

TEST_CASE("convex combination of scaled identities") {
  std::vector<GramKernel> ks{{2.0 * Matrix::Identity(3, 3), "a"},
                             {4.0 * Matrix::Identity(3, 3), "b"}};
  Vector th(2);
  th << 0.5, 0.5;
  const auto k = combine_kernels(ks, SimplexWeights(th));
  CHECK(k.matrix.isApprox(3.0 * Matrix::Identity(3, 3), 1e-15));
}

TEST_CASE("combined kernels stay PSD (eigendecomposition oracle)") {
  std::mt19937_64 rng(3);
  for (int rep = 0; rep < 30; ++rep) {
    std::vector<GramKernel> ks{{random_psd(5, rng), "a"}, {random_psd(5, rng), "b"}};
    const auto k = combine_kernels(ks, SimplexWeights(random_simplex(2, rng)));
    const auto psd = check_psd(k.matrix);
    CHECK(psd.is_psd);
    CHECK(psd.min_eig >= -1e-8 * std::max(1.0, psd.max_eig));
  }
}

TEST_CASE("combine_kernels is linear in the weights") {
  std::mt19937_64 rng(4);
  std::vector<GramKernel> ks{{random_psd(4, rng), "a"}, {random_psd(4, rng), "b"},
                             {random_psd(4, rng), "c"}};
  const Vector t1 = random_simplex(3, rng), t2 = random_simplex(3, rng);
  const double a = 0.3;
  const Vector mix = a * t1 + (1 - a) * t2;
  const Matrix lhs = combine_kernels(ks, SimplexWeights(mix)).matrix;
  const Matrix rhs = a * combine_kernels(ks, SimplexWeights(t1)).matrix +
                     (1 - a) * combine_kernels(ks, SimplexWeights(t2)).matrix;
  CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("combine_kernels validates dimensions and weights") {
  std::mt19937_64 rng(5);
  std::vector<GramKernel> ks{{random_psd(4, rng), "a"}, {random_psd(5, rng), "b"}};
  CHECK_THROWS_AS(combine_kernels(ks, SimplexWeights::uniform(2)), Error);
  std::vector<GramKernel> ok{{random_psd(4, rng), "a"}};
  CHECK_THROWS_AS(combine_kernels(ok, SimplexWeights::uniform(2)), Error);
}

TEST_CASE("check_psd worked examples") {
  CHECK(check_psd(Matrix::Identity(3, 3)).is_psd);
  CHECK(check_psd(Matrix::Identity(3, 3)).min_eig == Catch::Approx(1.0));

  Matrix m(2, 2);
  m << 1, 2, 2, 1;  // eigenvalues 3 and -1
  const auto r = check_psd(m);
  CHECK_FALSE(r.is_psd);
  CHECK(r.min_eig == Catch::Approx(-1.0).margin(1e-12));
  CHECK(r.max_eig == Catch::Approx(3.0).margin(1e-12));

  const auto z = check_psd(Matrix::Zero(4, 4));
  CHECK(z.is_psd);
  CHECK(z.min_eig == Catch::Approx(0.0).margin(1e-15));
}

TEST_CASE("check_psd rejects asymmetric input") {
  Matrix m(2, 2);
  m << 1, 2, 0, 1;
  CHECK_THROWS_AS(check_psd(m), Error);
}

TEST_CASE("average_kernel equals uniform combination") {
  std::mt19937_64 rng(6);
  std::vector<GramKernel> ks;
  for (int i = 0; i < 15; ++i) ks.push_back({random_psd(6, rng), "v"});
  const Matrix avg = average_kernel(ks).matrix;
  const Matrix comb = combine_kernels(ks, SimplexWeights::uniform(15)).matrix;
  CHECK((avg - comb).cwiseAbs().maxCoeff() < 1e-12);

  std::vector<GramKernel> one{{random_psd(3, rng), "a"}};
  CHECK(average_kernel(one).matrix.isApprox(one[0].matrix, 1e-15));
}

TEST_CASE("concat_views stacks widths and preserves rows") {
  const auto gen = make_synthetic({.name = "two_moons_views", .n = 9, .noise = 0.1, .seed = 8});
  const auto wide = concat_views(gen.dataset);
  CHECK(wide.n_views() == 1);
  CHECK(wide.views[0].cols() == 4);
  CHECK(wide.views[0].row(0).head(2) == gen.dataset.views[0].row(0));
  CHECK(wide.views[0].row(0).tail(2) == gen.dataset.views[1].row(0));

  MultiviewDataset single = gen.dataset;
  single.views = {gen.dataset.views[0]};
  single.view_names = {"only"};
  const auto same = concat_views(single);
  CHECK(same.views[0] == single.views[0]);
}

TEST_CASE("gram row duplication duplicates row and column") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> gauss;
  Matrix x(5, 2);
  for (Index i = 0; i < 5; ++i)
    for (Index j = 0; j < 2; ++j) x(i, j) = gauss(rng);
  Matrix xd(6, 2);
  xd.topRows(5) = x;
  xd.row(5) = x.row(2);
  const KernelSpec spec{.family = KernelFamily::gaussian_rbf, .bandwidth = 0.9};
  const Matrix k = gram(x, spec).matrix;
  const Matrix kd = gram(xd, spec).matrix;
  CHECK((kd.topLeftCorner(5, 5) - k).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((kd.row(5).head(5) - k.row(2)).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("gram_cross agrees with gram on the training block") {
  std::mt19937_64 rng(10);
  std::normal_distribution<double> gauss;
  Matrix x(6, 3);
  for (Index i = 0; i < 6; ++i)
    for (Index j = 0; j < 3; ++j) x(i, j) = gauss(rng);
  for (const auto& spec :
       {KernelSpec{.family = KernelFamily::linear},
        KernelSpec{.family = KernelFamily::gaussian_rbf, .bandwidth = 1.1},
        KernelSpec{.family = KernelFamily::polynomial, .degree = 3, .offset = 0.5}}) {
    const Matrix full = gram(x, spec).matrix;
    const Matrix cross = gram_cross(x.topRows(2), x, spec);
    CHECK((cross - full.topRows(2)).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("median_bandwidth is positive and scale-tracking") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> gauss;
  Matrix x(40, 2);
  for (Index i = 0; i < 40; ++i)
    for (Index j = 0; j < 2; ++j) x(i, j) = gauss(rng);
  const double b1 = median_bandwidth(x);
  const double b2 = median_bandwidth(Matrix(3.0 * x));
  CHECK(b1 > 0);
  CHECK(b2 == Catch::Approx(3.0 * b1).epsilon(1e-12));
}
