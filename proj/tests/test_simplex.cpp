#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "mhr/simplex.hpp"

using namespace mhr;

TEST_CASE("project_simplex leaves feasible points alone") {
  Vector v(2);
  v << 0.5, 0.5;
  const auto w = project_simplex(v);
  CHECK(w[0] == Catch::Approx(0.5).margin(1e-14));
  CHECK(w[1] == Catch::Approx(0.5).margin(1e-14));
}

TEST_CASE("project_simplex clamps dominated coordinates") {
  Vector v(2);
  v << 2.0, 0.0;
  const auto w = project_simplex(v);
  CHECK(w[0] == Catch::Approx(1.0).margin(1e-14));
  CHECK(w[1] == Catch::Approx(0.0).margin(1e-14));
}

TEST_CASE("project_simplex interior case matches the KKT solution") {
  // subtract lambda = (1.2 - 1)/2 = 0.1 from both coordinates
  Vector v(2);
  v << 0.8, 0.4;
  const auto w = project_simplex(v);
  CHECK(w[0] == Catch::Approx(0.7).margin(1e-14));
  CHECK(w[1] == Catch::Approx(0.3).margin(1e-14));
}

TEST_CASE("project_simplex rejects empty input") {
  CHECK_THROWS_AS(project_simplex(Vector()), Error);
}

TEST_CASE("projection is idempotent and feasible on random vectors") {
  std::mt19937_64 rng(42);
  std::normal_distribution<double> gauss(0.0, 3.0);
  for (int rep = 0; rep < 200; ++rep) {
    Vector v(1 + rep % 7);
    for (Index i = 0; i < v.size(); ++i) v(i) = gauss(rng);
    const auto w = project_simplex(v);
    CHECK(w.vec().minCoeff() >= 0.0);
    CHECK(w.vec().sum() == Catch::Approx(1.0).margin(1e-12));
    const auto w2 = project_simplex(w.vec());
    CHECK((w.vec() - w2.vec()).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("projection minimizes euclidean distance (random oracle)") {
  // compare against a dense grid on the 1-simplex
  std::mt19937_64 rng(7);
  std::normal_distribution<double> gauss(0.0, 2.0);
  for (int rep = 0; rep < 50; ++rep) {
    Vector v(2);
    v << gauss(rng), gauss(rng);
    const auto w = project_simplex(v);
    double best = 1e100, best_t = 0;
    for (int i = 0; i <= 10000; ++i) {
      const double t = i / 10000.0;
      const double d = (t - v(0)) * (t - v(0)) + (1 - t - v(1)) * (1 - t - v(1));
      if (d < best) {
        best = d;
        best_t = t;
      }
    }
    CHECK(w[0] == Catch::Approx(best_t).margin(2e-4));
  }
}

TEST_CASE("SimplexWeights rejects invalid vectors") {
  Vector bad(2);
  bad << 0.7, 0.7;
  CHECK_THROWS_AS(SimplexWeights(bad), Error);
  bad << -0.2, 1.2;
  CHECK_THROWS_AS(SimplexWeights(bad), Error);
}
