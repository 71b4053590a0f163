#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "mhr/config.hpp"
#include "mhr/matrix_io.hpp"
#include "mhr/model_io.hpp"

using namespace mhr;
namespace fs = std::filesystem;

namespace {

fs::path temp_path(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("mhr_io_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("matrix cache round-trips bit-exactly") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> gauss;
  Matrix m(7, 7);
  for (Index i = 0; i < 7; ++i)
    for (Index j = 0; j < 7; ++j) m(i, j) = gauss(rng);
  const auto p = temp_path("cache.bin");
  save_matrix_cache(p.string(), m, 2);
  std::uint8_t kind = 0;
  const Matrix back = load_matrix_cache(p.string(), &kind);
  CHECK(kind == 2);
  CHECK(back == m);  // exact, not approximate
  CHECK(fs::file_size(p) == 16 + 7 * 7 * 8);
}

TEST_CASE("matrix cache rejects non-square input, bad magic, truncation") {
  CHECK_THROWS_AS(save_matrix_cache(temp_path("x.bin").string(), Matrix::Zero(2, 3)), Error);

  const auto bad = temp_path("bad.bin");
  std::ofstream(bad) << "not a cache file at all";
  CHECK_THROWS_AS(load_matrix_cache(bad.string()), Error);

  const auto p = temp_path("trunc.bin");
  save_matrix_cache(p.string(), Matrix::Identity(5, 5));
  fs::resize_file(p, 16 + 11 * 8);
  CHECK_THROWS_AS(load_matrix_cache(p.string()), Error);

  CHECK_THROWS_AS(load_matrix_cache("/nonexistent/nowhere.bin"), Error);
}

TEST_CASE("model files round-trip every field") {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> gauss;
  TrainedModel m;
  m.alpha = Vector(5);
  for (Index i = 0; i < 5; ++i) m.alpha(i) = gauss(rng);
  Vector th(2), be(2);
  th << 0.25, 0.75;
  be << 0.6, 0.4;
  m.theta = SimplexWeights(th);
  m.beta = SimplexWeights(be);
  m.config.loss = LossKind::hinge;
  m.config.gamma_A = 0.125;
  m.config.gamma_I = 0.5;
  m.config.gamma_theta = 2e-3;
  m.config.gamma_beta = 3e-3;
  m.config.mu = 0.02;
  m.kernel_specs = {{.family = KernelFamily::gaussian_rbf, .bandwidth = 1.7},
                    {.family = KernelFamily::polynomial, .degree = 3, .offset = 0.5}};
  m.kernel_scales = {1.0, 2.5};
  m.objective_trace = {3.0, 2.0, 1.5, 1.5};
  m.data_fingerprint = 0xdeadbeefcafe1234ull;

  const auto p = temp_path("model.bin");
  save_model(p.string(), m);
  const TrainedModel b = load_model(p.string());
  CHECK(b.alpha == m.alpha);
  CHECK(b.theta.vec() == m.theta.vec());
  CHECK(b.beta.vec() == m.beta.vec());
  CHECK(b.config.loss == LossKind::hinge);
  CHECK(b.config.gamma_A == 0.125);
  CHECK(b.config.gamma_I == 0.5);
  CHECK(b.config.gamma_theta == 2e-3);
  CHECK(b.config.gamma_beta == 3e-3);
  CHECK(b.config.mu == 0.02);
  REQUIRE(b.kernel_specs.size() == 2);
  CHECK(b.kernel_specs[0].family == KernelFamily::gaussian_rbf);
  CHECK(b.kernel_specs[0].bandwidth == 1.7);
  CHECK(b.kernel_specs[1].degree == 3);
  CHECK(b.kernel_specs[1].offset == 0.5);
  CHECK(b.kernel_scales == m.kernel_scales);
  CHECK(b.objective_trace == m.objective_trace);
  CHECK(b.data_fingerprint == m.data_fingerprint);
}

TEST_CASE("model loader rejects garbage and truncation") {
  const auto bad = temp_path("badmodel.bin");
  std::ofstream(bad) << "MHRMODEX plus junk";
  CHECK_THROWS_AS(load_model(bad.string()), Error);

  TrainedModel m;
  m.alpha = Vector::Ones(3);
  const auto p = temp_path("truncmodel.bin");
  save_model(p.string(), m);
  fs::resize_file(p, fs::file_size(p) - 4);
  CHECK_THROWS_AS(load_model(p.string()), Error);
}

TEST_CASE("config parser handles every section") {
  std::istringstream in(R"(# full example
[dataset]
generator = two_moons_views
n = 120
noise = 0.15   # inline comment
seed = 9
label_fraction = 0.2
test_n = 60
standardize = true

[kernel]
family = gaussian
bandwidth = 1.5
trace_normalize = yes

[kernel.moon_b]
family = polynomial
degree = 2
offset = 1.0

[manifold]
kind = laplacian
k = 12
m = 2
bandwidth = 0.8
threshold = 0.9

[objective]
gamma_A = 1e-3
gamma_I = 0.1
gamma_theta = 0.01
gamma_beta = 0.02
loss = hinge
mu = 0.05
max_inner_iters = 300
max_outer_rounds = 7
tol_inner = 1e-7
tol_outer = 1e-4

[eval]
methods = LS, mHesLS , HesSVM:moon_a
fractions = 0.05, 0.1
repeats = 4
base_seed = 17
)");
  const RunConfig cfg = parse_config_text(in);
  CHECK(cfg.generator.name == "two_moons_views");
  CHECK(cfg.generator.n == 120);
  CHECK(cfg.generator.noise == 0.15);
  CHECK(cfg.generator.seed == 9);
  CHECK(cfg.label_fraction == 0.2);
  CHECK(cfg.test_n == 60);
  CHECK(cfg.standardize);
  CHECK(cfg.kernel.family == KernelFamily::gaussian_rbf);
  CHECK(cfg.kernel.bandwidth == 1.5);
  CHECK(cfg.trace_normalize);
  REQUIRE(cfg.kernel_overrides.count("moon_b"));
  CHECK(cfg.kernel_overrides.at("moon_b").family == KernelFamily::polynomial);
  CHECK(cfg.kernel_overrides.at("moon_b").degree == 2);
  CHECK(cfg.manifold_kind == "laplacian");
  CHECK(cfg.knn_k == 12);
  CHECK(cfg.intrinsic_dim == 2);
  CHECK(cfg.laplacian_bandwidth == 0.8);
  CHECK(cfg.dim_threshold == 0.9);
  CHECK(cfg.objective.gamma_A == 1e-3);
  CHECK(cfg.objective.loss == LossKind::hinge);
  CHECK(cfg.objective.max_outer_rounds == 7);
  CHECK(cfg.methods == std::vector<std::string>{"LS", "mHesLS", "HesSVM:moon_a"});
  CHECK(cfg.fractions == std::vector<double>{0.05, 0.1});
  CHECK(cfg.repeats == 4);
  CHECK(cfg.base_seed == 17);

  const SweepConfig sw = cfg.to_sweep_config();
  CHECK(sw.methods == cfg.methods);
  CHECK(sw.standardize_views);
  CHECK(sw.trace_normalize_kernels);
  CHECK(sw.knn_k == 12);
}

TEST_CASE("config parser rejects unknown keys, sections, and bad values") {
  const auto expect_error = [](const std::string& text, const std::string& needle) {
    std::istringstream in(text);
    try {
      parse_config_text(in);
      FAIL("expected a config error for: " + text);
    } catch (const Error& e) {
      CHECK_THAT(e.what(), Catch::Matchers::ContainsSubstring(needle));
    }
  };
  expect_error("[dataset]\nbanana = 1\n", "unknown key");
  expect_error("[mystery]\n", "unknown section");
  expect_error("stray = 1\n", "outside any section");
  expect_error("[dataset]\nn == 5\n", "bad value");
  expect_error("[dataset]\nnoise = soup\n", "bad value");
  expect_error("[dataset]\nstandardize = maybe\n", "boolean");
  expect_error("[manifold]\nkind = fractal\n", "laplacian or hessian");
  expect_error("[objective]\nloss = cubic\n", "unknown loss");
  expect_error("[dataset\nn = 5\n", "bad section header");
  expect_error("[dataset]\njust a line\n", "key = value");

  CHECK_THROWS_AS(load_config("/nonexistent/run.cfg"), Error);
}
