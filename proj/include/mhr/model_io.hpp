#pragma once

#include <cstring>
#include <fstream>
#include <string>

#include "mhr/solvers.hpp"

namespace mhr {

namespace detail {

template <typename T>
void write_pod(std::ofstream& f, const T& v) {
  f.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T read_pod(std::ifstream& f) {
  T v{};
  f.read(reinterpret_cast<char*>(&v), sizeof v);
  return v;
}

inline void write_vec(std::ofstream& f, const Vector& v) {
  write_pod(f, static_cast<std::uint64_t>(v.size()));
  f.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(8 * v.size()));
}

inline Vector read_vec(std::ifstream& f) {
  const auto n = read_pod<std::uint64_t>(f);
  Vector v(static_cast<Index>(n));
  f.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(8 * n));
  return v;
}

}  // namespace detail

/// Single-file model dump: header, gammas, alpha/theta/beta, kernel specs,
/// and the training-data fingerprint so predict can refuse mismatched input.
inline void save_model(const std::string& path, const TrainedModel& m) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("io", "cannot write " + path);
  f.write("MHRMODEL", 8);
  detail::write_pod(f, std::uint32_t{1});  // version
  detail::write_pod(f, static_cast<std::uint64_t>(m.alpha.size()));
  detail::write_pod(f, static_cast<std::uint64_t>(m.kernel_specs.size()));
  detail::write_pod(f, static_cast<std::uint8_t>(m.config.loss == LossKind::hinge ? 1 : 0));
  detail::write_pod(f, m.config.gamma_A);
  detail::write_pod(f, m.config.gamma_I);
  detail::write_pod(f, m.config.gamma_theta);
  detail::write_pod(f, m.config.gamma_beta);
  detail::write_pod(f, m.config.mu);
  detail::write_vec(f, m.alpha);
  detail::write_vec(f, m.theta.vec());
  detail::write_vec(f, m.beta.vec());
  for (const auto& spec : m.kernel_specs) {
    detail::write_pod(f, static_cast<std::uint8_t>(spec.family));
    detail::write_pod(f, spec.bandwidth);
    detail::write_pod(f, static_cast<std::int32_t>(spec.degree));
    detail::write_pod(f, spec.offset);
  }
  detail::write_pod(f, static_cast<std::uint64_t>(m.kernel_scales.size()));
  for (double s : m.kernel_scales) detail::write_pod(f, s);
  detail::write_pod(f, static_cast<std::uint64_t>(m.objective_trace.size()));
  for (double v : m.objective_trace) detail::write_pod(f, v);
  detail::write_pod(f, m.data_fingerprint);
}

inline TrainedModel load_model(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("io", "cannot read " + path);
  char magic[8];
  f.read(magic, 8);
  if (!f || std::memcmp(magic, "MHRMODEL", 8) != 0) throw Error("io", "bad model magic in " + path);
  const auto version = detail::read_pod<std::uint32_t>(f);
  if (version != 1) throw Error("io", "unsupported model version");
  detail::read_pod<std::uint64_t>(f);  // n, implied by alpha
  const auto n_specs = detail::read_pod<std::uint64_t>(f);
  TrainedModel m;
  m.config.loss = detail::read_pod<std::uint8_t>(f) ? LossKind::hinge : LossKind::squared;
  m.config.gamma_A = detail::read_pod<double>(f);
  m.config.gamma_I = detail::read_pod<double>(f);
  m.config.gamma_theta = detail::read_pod<double>(f);
  m.config.gamma_beta = detail::read_pod<double>(f);
  m.config.mu = detail::read_pod<double>(f);
  m.alpha = detail::read_vec(f);
  m.theta = SimplexWeights(detail::read_vec(f));
  m.beta = SimplexWeights(detail::read_vec(f));
  for (std::uint64_t i = 0; i < n_specs; ++i) {
    KernelSpec spec;
    spec.family = static_cast<KernelFamily>(detail::read_pod<std::uint8_t>(f));
    spec.bandwidth = detail::read_pod<double>(f);
    spec.degree = static_cast<int>(detail::read_pod<std::int32_t>(f));
    spec.offset = detail::read_pod<double>(f);
    m.kernel_specs.push_back(spec);
  }
  const auto n_scales = detail::read_pod<std::uint64_t>(f);
  for (std::uint64_t i = 0; i < n_scales; ++i) m.kernel_scales.push_back(detail::read_pod<double>(f));
  const auto n_trace = detail::read_pod<std::uint64_t>(f);
  for (std::uint64_t i = 0; i < n_trace; ++i)
    m.objective_trace.push_back(detail::read_pod<double>(f));
  m.data_fingerprint = detail::read_pod<std::uint64_t>(f);
  if (!f) throw Error("io", "truncated model file " + path);
  return m;
}

}  // namespace mhr
