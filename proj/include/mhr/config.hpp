#pragma once

#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "mhr/eval.hpp"

namespace mhr {

/// Everything a reproducible run needs. Parses from `key = value` files with
/// `#` comments and [dataset] / [kernel] / [kernel.<view>] / [manifold] /
/// [objective] / [eval] sections. Unknown keys are errors.
struct RunConfig {
  // [dataset]
  std::string dataset_path;          // directory with labels.csv + view_*.csv
  SyntheticSpec generator;           // used when dataset_path is empty
  double label_fraction = 0.1;       // mask applied to ground-truth labels
  Index test_n = 0;                  // generator test split size (0 = same as n)
  bool standardize = false;

  // [kernel] defaults + per-view overrides
  KernelSpec kernel;                 // bandwidth <= 0 -> median heuristic
  std::map<std::string, KernelSpec> kernel_overrides;
  bool trace_normalize = false;

  // [manifold]
  std::string manifold_kind = "hessian";
  Index knn_k = 0;                   // 0 -> min(100, n-1)
  Index intrinsic_dim = 0;           // 0 -> estimate
  double laplacian_bandwidth = 0;    // <= 0 -> median heuristic
  double dim_threshold = 0.95;

  // [objective]
  ObjectiveConfig objective;

  // [eval]
  std::vector<std::string> methods = {"mHesLS"};
  std::vector<double> fractions = {0.1};
  int repeats = 10;
  std::uint64_t base_seed = 0;

  SweepConfig to_sweep_config() const {
    SweepConfig s;
    s.methods = methods;
    s.fractions = fractions;
    s.repeats = repeats;
    s.base_seed = base_seed;
    s.objective = objective;
    s.kernel = kernel;
    s.knn_k = knn_k;
    s.intrinsic_dim = intrinsic_dim;
    s.laplacian_bandwidth = laplacian_bandwidth;
    s.standardize_views = standardize;
    s.trace_normalize_kernels = trace_normalize;
    return s;
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

inline bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw Error("config", "expected boolean for '" + key + "', got '" + v + "'");
}

inline std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

inline void apply_kernel_key(KernelSpec& spec, const std::string& key, const std::string& value) {
  if (key == "family") spec.family = kernel_family_from_string(value);
  else if (key == "bandwidth") spec.bandwidth = std::stod(value);
  else if (key == "degree") spec.degree = std::stoi(value);
  else if (key == "offset") spec.offset = std::stod(value);
  else throw Error("config", "unknown kernel key '" + key + "'");
}

}  // namespace detail

inline RunConfig parse_config_text(std::istream& in) {
  RunConfig cfg;
  std::string line, section = "";
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw Error("config", "bad section header at line " + std::to_string(lineno));
      section = line.substr(1, line.size() - 2);
      if (section != "dataset" && section != "kernel" && section != "manifold" &&
          section != "objective" && section != "eval" && section.rfind("kernel.", 0) != 0)
        throw Error("config", "unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error("config", "expected 'key = value' at line " + std::to_string(lineno));
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));

    try {
      if (section == "dataset") {
        if (key == "path") cfg.dataset_path = value;
        else if (key == "generator") cfg.generator.name = value;
        else if (key == "n") cfg.generator.n = std::stoll(value);
        else if (key == "noise") cfg.generator.noise = std::stod(value);
        else if (key == "seed") cfg.generator.seed = std::stoull(value);
        else if (key == "latent_dim" || key == "m") cfg.generator.latent_dim = std::stoll(value);
        else if (key == "ambient_dim" || key == "d") cfg.generator.ambient_dim = std::stoll(value);
        else if (key == "label_fraction") cfg.label_fraction = std::stod(value);
        else if (key == "test_n") cfg.test_n = std::stoll(value);
        else if (key == "standardize") cfg.standardize = detail::parse_bool(value, key);
        else throw Error("config", "unknown key '" + key + "' in [dataset]");
      } else if (section == "kernel") {
        if (key == "trace_normalize") cfg.trace_normalize = detail::parse_bool(value, key);
        else detail::apply_kernel_key(cfg.kernel, key, value);
      } else if (section.rfind("kernel.", 0) == 0) {
        const std::string view = section.substr(7);
        if (!cfg.kernel_overrides.count(view)) cfg.kernel_overrides[view] = cfg.kernel;
        detail::apply_kernel_key(cfg.kernel_overrides[view], key, value);
      } else if (section == "manifold") {
        if (key == "kind") {
          if (value != "laplacian" && value != "hessian")
            throw Error("config", "manifold kind must be laplacian or hessian");
          cfg.manifold_kind = value;
        } else if (key == "k") cfg.knn_k = std::stoll(value);
        else if (key == "m") cfg.intrinsic_dim = std::stoll(value);
        else if (key == "bandwidth") cfg.laplacian_bandwidth = std::stod(value);
        else if (key == "threshold") cfg.dim_threshold = std::stod(value);
        else throw Error("config", "unknown key '" + key + "' in [manifold]");
      } else if (section == "objective") {
        if (key == "gamma_A") cfg.objective.gamma_A = std::stod(value);
        else if (key == "gamma_I") cfg.objective.gamma_I = std::stod(value);
        else if (key == "gamma_theta") cfg.objective.gamma_theta = std::stod(value);
        else if (key == "gamma_beta") cfg.objective.gamma_beta = std::stod(value);
        else if (key == "loss") cfg.objective.loss = loss_from_string(value);
        else if (key == "mu") cfg.objective.mu = std::stod(value);
        else if (key == "max_inner_iters") cfg.objective.max_inner_iters = std::stoll(value);
        else if (key == "max_outer_rounds") cfg.objective.max_outer_rounds = std::stoll(value);
        else if (key == "tol_inner") cfg.objective.tol_inner = std::stod(value);
        else if (key == "tol_outer") cfg.objective.tol_outer = std::stod(value);
        else throw Error("config", "unknown key '" + key + "' in [objective]");
      } else if (section == "eval") {
        if (key == "methods") cfg.methods = detail::split_list(value);
        else if (key == "fractions") {
          cfg.fractions.clear();
          for (const auto& s : detail::split_list(value)) cfg.fractions.push_back(std::stod(s));
        } else if (key == "repeats") cfg.repeats = std::stoi(value);
        else if (key == "base_seed") cfg.base_seed = std::stoull(value);
        else throw Error("config", "unknown key '" + key + "' in [eval]");
      } else {
        throw Error("config", "key '" + key + "' outside any section");
      }
    } catch (const Error&) {
      throw;
    } catch (const std::exception&) {
      throw Error("config", "bad value '" + value + "' for key '" + key + "' at line " +
                                std::to_string(lineno));
    }
  }
  return cfg;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error("config", "not found: " + path);
  return parse_config_text(f);
}

}  // namespace mhr
