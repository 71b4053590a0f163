#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "mhr/solvers.hpp"
#include "mhr/synthetic.hpp"

namespace mhr {

// ---------------------------------------------------------------------------
// PASCAL-style average precision
// ---------------------------------------------------------------------------

/// 11-point interpolated AP. Ties in score break by ascending index.
inline double average_precision(const Vector& scores, const std::vector<bool>& truth) {
  const Index n = scores.size();
  if (static_cast<Index>(truth.size()) != n)
    throw Error("eval", "scores/truth length mismatch");
  Index n_pos = 0;
  for (bool t : truth) n_pos += t ? 1 : 0;
  if (n_pos == 0) throw Error("eval", "AP undefined without positive examples");

  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return scores(a) > scores(b); });

  // precision/recall after each rank
  std::vector<double> prec(static_cast<std::size_t>(n)), rec(static_cast<std::size_t>(n));
  Index hits = 0;
  for (Index r = 0; r < n; ++r) {
    if (truth[static_cast<std::size_t>(order[static_cast<std::size_t>(r)])]) ++hits;
    prec[static_cast<std::size_t>(r)] = static_cast<double>(hits) / static_cast<double>(r + 1);
    rec[static_cast<std::size_t>(r)] = static_cast<double>(hits) / static_cast<double>(n_pos);
  }

  double ap = 0;
  for (int ti = 0; ti <= 10; ++ti) {
    const double t = ti / 10.0;
    double best = 0;
    for (Index r = 0; r < n; ++r)
      if (rec[static_cast<std::size_t>(r)] >= t - 1e-12)
        best = std::max(best, prec[static_cast<std::size_t>(r)]);
    ap += best;
  }
  return ap / 11.0;
}

inline double mean_ap(const std::vector<double>& aps) {
  if (aps.empty()) throw Error("eval", "mean of empty AP list");
  return std::accumulate(aps.begin(), aps.end(), 0.0) / static_cast<double>(aps.size());
}

// ---------------------------------------------------------------------------
// Method tag grammar (the baseline configuration names)
// ---------------------------------------------------------------------------

enum class Regularizer { none, laplacian, hessian, multiview_hessian };
enum class ViewMode { single, concat, average, multiview };

struct MethodTag {
  std::string name;
  LossKind loss = LossKind::squared;
  Regularizer reg = Regularizer::none;
  ViewMode mode = ViewMode::single;
  std::string view;  // for single mode; empty = first view
};

/// Parses tags like SVM, LapSVM, HesCSVM, AveLS, mHesLS, HesSVM:moon_a.
inline MethodTag parse_method_tag(const std::string& tag) {
  MethodTag m;
  m.name = tag;
  std::string s = tag;
  if (const auto colon = s.find(':'); colon != std::string::npos) {
    m.view = s.substr(colon + 1);
    s = s.substr(0, colon);
  }

  if (s.rfind("mHes", 0) == 0) {
    m.reg = Regularizer::multiview_hessian;
    m.mode = ViewMode::multiview;
    s = s.substr(4);
  } else if (s.rfind("Lap", 0) == 0) {
    m.reg = Regularizer::laplacian;
    s = s.substr(3);
  } else if (s.rfind("Hes", 0) == 0) {
    m.reg = Regularizer::hessian;
    s = s.substr(3);
  }

  if (m.reg == Regularizer::none) {
    if (s.rfind("Con", 0) == 0) {
      m.mode = ViewMode::concat;
      s = s.substr(3);
    } else if (s.rfind("Ave", 0) == 0) {
      m.mode = ViewMode::average;
      s = s.substr(3);
    }
  } else if (m.reg != Regularizer::multiview_hessian) {
    if (s.rfind("C", 0) == 0 && s != "LS") {
      m.mode = ViewMode::concat;
      s = s.substr(1);
    } else if (s.rfind("A", 0) == 0) {
      m.mode = ViewMode::average;
      s = s.substr(1);
    }
  }

  if (s == "SVM") m.loss = LossKind::hinge;
  else if (s == "LS" || s == "KLS") m.loss = LossKind::squared;
  else throw Error("eval", "unknown method tag '" + tag + "'");
  if (m.mode != ViewMode::single && !m.view.empty())
    throw Error("eval", "view suffix only applies to single-view tags: '" + tag + "'");
  return m;
}

// ---------------------------------------------------------------------------
// Sweep harness
// ---------------------------------------------------------------------------

struct EvalReport {
  std::string method;
  double fraction = 0;
  int repeat = 0;
  std::string cls = "positive";
  double ap = 0;
  double map = 0;
  double seconds = 0;
};

struct SweepConfig {
  std::vector<std::string> methods;
  std::vector<double> fractions;
  int repeats = 10;
  std::uint64_t base_seed = 0;
  ObjectiveConfig objective;         // loss overridden per tag
  KernelSpec kernel;                 // bandwidth <= 0 -> per-view median heuristic
  Index knn_k = 0;                   // 0 -> min(100, n-1)
  Index intrinsic_dim = 0;           // 0 -> estimate (threshold 0.95)
  double laplacian_bandwidth = 0;    // <= 0 -> per-view median heuristic
  bool standardize_views = false;
  bool trace_normalize_kernels = false;
  int workers = 1;
};

namespace detail {

/// Kernels and manifolds built once per dataset and shared across cells.
struct SweepCache {
  const MultiviewDataset* train = nullptr;
  SweepConfig cfg;
  std::vector<Matrix> work_views;               // possibly standardized
  MultiviewDataset concat_ds;
  std::vector<KernelSpec> view_specs;           // resolved bandwidths per view
  KernelSpec concat_spec;
  std::vector<GramKernel> view_kernels;
  std::vector<double> view_scales;              // trace-norm divisors, 1 if disabled
  double concat_scale = 1.0;
  std::optional<GramKernel> concat_kernel;
  std::map<std::pair<int, int>, ManifoldMatrix> manifolds;  // (kind, view or -1=concat)

  explicit SweepCache(const MultiviewDataset& ds, const SweepConfig& c) : train(&ds), cfg(c) {
    for (const auto& v : ds.views)
      work_views.push_back(cfg.standardize_views ? standardize(v) : v);
    MultiviewDataset tmp = ds;
    tmp.views = work_views;
    concat_ds = concat_views(tmp);
    for (std::size_t v = 0; v < work_views.size(); ++v) {
      KernelSpec spec = cfg.kernel;
      if (spec.family == KernelFamily::gaussian_rbf && spec.bandwidth <= 0)
        spec.bandwidth = median_bandwidth(work_views[v]);
      view_specs.push_back(spec);
      GramKernel k = gram(work_views[v], spec, ds.view_names[v]);
      double scale = 1.0;
      if (cfg.trace_normalize_kernels) {
        scale = k.matrix.trace() / static_cast<double>(k.n());
        k = trace_normalize(std::move(k));
      }
      view_scales.push_back(scale);
      view_kernels.push_back(std::move(k));
    }
    concat_spec = cfg.kernel;
    if (concat_spec.family == KernelFamily::gaussian_rbf && concat_spec.bandwidth <= 0)
      concat_spec.bandwidth = median_bandwidth(concat_ds.views[0]);
  }

  Index default_k() const { return cfg.knn_k > 0 ? cfg.knn_k : std::min<Index>(100, train->n() - 1); }

  const GramKernel& kernel_concat() {
    if (!concat_kernel) {
      GramKernel k = gram(concat_ds.views[0], concat_spec, "concat");
      if (cfg.trace_normalize_kernels) {
        concat_scale = k.matrix.trace() / static_cast<double>(k.n());
        k = trace_normalize(std::move(k));
      }
      concat_kernel = std::move(k);
    }
    return *concat_kernel;
  }

  const ManifoldMatrix& manifold(Regularizer reg, int view /* -1 = concat */) {
    const int kindi = reg == Regularizer::laplacian ? 0 : 1;
    const auto key = std::make_pair(kindi, view);
    auto it = manifolds.find(key);
    if (it != manifolds.end()) return it->second;
    const Matrix& x = view < 0 ? concat_ds.views[0] : work_views[static_cast<std::size_t>(view)];
    const NeighborGraph g = knn(x, default_k());
    ManifoldMatrix mat;
    if (reg == Regularizer::laplacian) {
      const double bw =
          cfg.laplacian_bandwidth > 0 ? cfg.laplacian_bandwidth : median_bandwidth(x);
      mat = laplacian(x, g, bw, view < 0 ? "concat" : train->view_names[static_cast<std::size_t>(view)]);
    } else {
      Index m = cfg.intrinsic_dim;
      if (m <= 0) m = estimate_intrinsic_dim(x, g, 0.95);
      const Index max_m = [&] {
        Index mm = 1;
        while ((mm + 1) + 1 + (mm + 1) * (mm + 2) / 2 <= default_k()) ++mm;
        return mm;
      }();
      m = std::clamp<Index>(m, 1, std::min<Index>(max_m, x.cols()));
      mat = hessian_energy(x, g, m,
                           view < 0 ? "concat" : train->view_names[static_cast<std::size_t>(view)]);
    }
    return manifolds.emplace(key, std::move(mat)).first->second;
  }

  int view_index(const std::string& name) const {
    if (name.empty()) return 0;
    for (std::size_t v = 0; v < train->view_names.size(); ++v)
      if (train->view_names[v] == name) return static_cast<int>(v);
    throw Error("eval", "unknown view '" + name + "'");
  }
};

inline Matrix permute_sym(const Matrix& m, const std::vector<Index>& perm) {
  const Index n = m.rows();
  Matrix out(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      out(i, j) = m(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
  return out;
}

inline Matrix permute_rows(const Matrix& m, const std::vector<Index>& perm) {
  Matrix out(m.rows(), m.cols());
  for (Index i = 0; i < m.rows(); ++i) out.row(i) = m.row(perm[static_cast<std::size_t>(i)]);
  return out;
}

}  // namespace detail

/// Trains one method tag on the masked training set and scores the test set.
/// `cache` must be built from the unmasked training dataset.
inline TrainedModel train_method(detail::SweepCache& cache, const MethodTag& tag,
                                 const MultiviewDataset& masked) {
  ObjectiveConfig cfg = cache.cfg.objective;
  cfg.loss = tag.loss;
  if (tag.reg == Regularizer::none) cfg.gamma_I = 0;

  const std::vector<Index>& perm = masked.perm;
  const Index l = masked.n_labeled();
  const Vector y = masked.labeled_targets();
  const Index n = masked.n();

  std::vector<GramKernel> kernels;
  std::vector<ManifoldMatrix> manifolds;

  const auto add_zero_manifold = [&](const std::string& src) {
    manifolds.push_back(
        ManifoldMatrix{Matrix::Zero(n, n), ManifoldKind::laplacian, src, 0, 0});
  };
  const auto add_manifold = [&](int view) {
    if (tag.reg == Regularizer::none) add_zero_manifold("none");
    else {
      const Regularizer r =
          tag.reg == Regularizer::multiview_hessian ? Regularizer::hessian : tag.reg;
      ManifoldMatrix m = cache.manifold(r, view);
      m.matrix = detail::permute_sym(m.matrix, perm);
      manifolds.push_back(std::move(m));
    }
  };

  switch (tag.mode) {
    case ViewMode::single: {
      const int v = cache.view_index(tag.view);
      kernels.push_back(GramKernel{
          detail::permute_sym(cache.view_kernels[static_cast<std::size_t>(v)].matrix, perm),
          tag.view});
      add_manifold(v);
      break;
    }
    case ViewMode::concat: {
      kernels.push_back(GramKernel{detail::permute_sym(cache.kernel_concat().matrix, perm), "concat"});
      add_manifold(-1);
      break;
    }
    case ViewMode::average: {
      const GramKernel avg = average_kernel(cache.view_kernels);
      kernels.push_back(GramKernel{detail::permute_sym(avg.matrix, perm), "average"});
      if (tag.reg == Regularizer::none) add_zero_manifold("none");
      else {
        const Regularizer r = tag.reg;
        std::vector<ManifoldMatrix> per_view;
        for (int v = 0; v < static_cast<int>(cache.work_views.size()); ++v)
          per_view.push_back(cache.manifold(r, v));
        ManifoldMatrix avg_m = combine_manifolds(
            per_view, SimplexWeights::uniform(static_cast<Index>(per_view.size())));
        avg_m.matrix = detail::permute_sym(avg_m.matrix, perm);
        manifolds.push_back(std::move(avg_m));
      }
      break;
    }
    case ViewMode::multiview: {
      for (int v = 0; v < static_cast<int>(cache.work_views.size()); ++v) {
        kernels.push_back(GramKernel{
            detail::permute_sym(cache.view_kernels[static_cast<std::size_t>(v)].matrix, perm),
            cache.train->view_names[static_cast<std::size_t>(v)]});
        add_manifold(v);
      }
      break;
    }
  }

  TrainedModel model = fit_alternating(kernels, manifolds, y, l, cfg);
  model.data_fingerprint = masked.fingerprint();
  switch (tag.mode) {
    case ViewMode::single: {
      const int v = cache.view_index(tag.view);
      model.kernel_specs = {cache.view_specs[static_cast<std::size_t>(v)]};
      model.kernel_scales = {cache.view_scales[static_cast<std::size_t>(v)]};
      break;
    }
    case ViewMode::concat:
      model.kernel_specs = {cache.concat_spec};
      model.kernel_scales = {cache.concat_scale};
      break;
    case ViewMode::average:
      // trained on the fixed average kernel; predict as uniform theta per view
      model.kernel_specs = cache.view_specs;
      model.kernel_scales = cache.view_scales;
      model.theta = SimplexWeights::uniform(static_cast<Index>(cache.view_specs.size()));
      break;
    case ViewMode::multiview:
      model.kernel_specs = cache.view_specs;
      model.kernel_scales = cache.view_scales;
      break;
  }
  return model;
}

/// Scores the test set for a model trained by `train_method`.
inline Vector score_test(const detail::SweepCache& cache, const MethodTag& tag,
                         const TrainedModel& model, const MultiviewDataset& masked,
                         const MultiviewDataset& test) {
  std::vector<Matrix> test_views;
  for (std::size_t v = 0; v < test.views.size(); ++v)
    test_views.push_back(cache.cfg.standardize_views ? standardize(test.views[v]) : test.views[v]);

  switch (tag.mode) {
    case ViewMode::single: {
      const int v = cache.view_index(tag.view);
      const Matrix train_v =
          detail::permute_rows(cache.work_views[static_cast<std::size_t>(v)], masked.perm);
      TrainedModel m = model;
      m.theta = SimplexWeights::uniform(1);
      return predict(m, {test_views[static_cast<std::size_t>(v)]}, {train_v});
    }
    case ViewMode::concat: {
      Matrix wide_test(test.n(), cache.concat_ds.views[0].cols());
      Index at = 0;
      for (const auto& tv : test_views) {
        wide_test.middleCols(at, tv.cols()) = tv;
        at += tv.cols();
      }
      const Matrix train_c = detail::permute_rows(cache.concat_ds.views[0], masked.perm);
      TrainedModel m = model;
      m.theta = SimplexWeights::uniform(1);
      return predict(m, {wide_test}, {train_c});
    }
    case ViewMode::average:
    case ViewMode::multiview: {
      const Index nv = static_cast<Index>(cache.work_views.size());
      TrainedModel m = model;
      m.kernel_specs = cache.view_specs;
      m.theta = tag.mode == ViewMode::average ? SimplexWeights::uniform(nv) : model.theta;
      std::vector<Matrix> train_vs;
      for (const auto& wv : cache.work_views)
        train_vs.push_back(detail::permute_rows(wv, masked.perm));
      return predict(m, test_views, train_vs);
    }
  }
  throw Error("eval", "unreachable");
}

/// The label-fraction sweep: (method x fraction x repeat) cells, each trained
/// on a fresh stratified mask and scored on the held-out test set.
inline std::vector<EvalReport> run_sweep(const MultiviewDataset& train,
                                         const MultiviewDataset& test, const SweepConfig& cfg) {
  detail::SweepCache cache(train, cfg);
  std::vector<bool> truth(static_cast<std::size_t>(test.n()));
  for (Index i = 0; i < test.n(); ++i)
    truth[static_cast<std::size_t>(i)] = test.labels[static_cast<std::size_t>(i)] == Label::positive;

  // Prebuild every shared kernel/manifold so the parallel phase is read-only.
  std::vector<MethodTag> tags;
  for (const auto& method : cfg.methods) {
    const MethodTag tag = parse_method_tag(method);
    if (tag.mode == ViewMode::concat) {
      cache.kernel_concat();
      if (tag.reg != Regularizer::none) cache.manifold(tag.reg, -1);
    } else if (tag.reg != Regularizer::none) {
      const Regularizer r =
          tag.reg == Regularizer::multiview_hessian ? Regularizer::hessian : tag.reg;
      if (tag.mode == ViewMode::single) cache.manifold(r, cache.view_index(tag.view));
      else
        for (int v = 0; v < static_cast<int>(cache.work_views.size()); ++v) cache.manifold(r, v);
    }
    tags.push_back(tag);
  }

  struct Cell {
    std::size_t tag_idx;
    double fraction;
    int repeat;
  };
  std::vector<Cell> cells;
  for (std::size_t t = 0; t < tags.size(); ++t)
    for (double fraction : cfg.fractions)
      for (int rep = 0; rep < cfg.repeats; ++rep) cells.push_back({t, fraction, rep});

  const auto run_cell = [&](const Cell& c) {
    const auto t0 = std::chrono::steady_clock::now();
    const LabelMask mask =
        split_labels(train, c.fraction, cfg.base_seed + static_cast<std::uint64_t>(c.repeat));
    const MultiviewDataset masked = apply_mask(train, mask);
    const TrainedModel model = train_method(cache, tags[c.tag_idx], masked);
    const Vector scores = score_test(cache, tags[c.tag_idx], model, masked, test);
    EvalReport r;
    r.method = cfg.methods[c.tag_idx];
    r.fraction = c.fraction;
    r.repeat = c.repeat;
    r.ap = average_precision(scores, truth);
    r.map = r.ap;  // binary task: one class
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
  };

  std::vector<EvalReport> reports(cells.size());
  const int workers = std::max(1, cfg.workers);
  if (workers == 1 || cells.size() < 2) {
    for (std::size_t i = 0; i < cells.size(); ++i) reports[i] = run_cell(cells[i]);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < cells.size(); i = next.fetch_add(1))
          reports[i] = run_cell(cells[i]);
      });
    for (auto& th : pool) th.join();
  }
  std::stable_sort(reports.begin(), reports.end(), [](const EvalReport& a, const EvalReport& b) {
    return std::tie(a.method, a.fraction, a.repeat) < std::tie(b.method, b.fraction, b.repeat);
  });
  return reports;
}

inline std::string reports_to_csv(const std::vector<EvalReport>& reports) {
  std::ostringstream os;
  os << "method,fraction,repeat,class,AP,mAP,seconds\n";
  char buf[256];
  for (const auto& r : reports) {
    std::snprintf(buf, sizeof buf, "%s,%.17g,%d,%s,%.17g,%.17g,%.6f\n", r.method.c_str(),
                  r.fraction, r.repeat, r.cls.c_str(), r.ap, r.map, r.seconds);
    os << buf;
  }
  return os.str();
}

/// Mean, sample standard deviation, and standard error per (method, fraction).
inline std::string reports_summary(const std::vector<EvalReport>& reports) {
  std::map<std::pair<std::string, double>, std::vector<double>> cells;
  for (const auto& r : reports) cells[{r.method, r.fraction}].push_back(r.ap);
  std::ostringstream os;
  os << "method          fraction   mean_AP    std        stderr     n\n";
  char buf[256];
  for (const auto& [key, aps] : cells) {
    const double mean = mean_ap(aps);
    double var = 0;
    for (double a : aps) var += (a - mean) * (a - mean);
    const double sd = aps.size() > 1 ? std::sqrt(var / static_cast<double>(aps.size() - 1)) : 0.0;
    const double se = sd / std::sqrt(static_cast<double>(aps.size()));
    std::snprintf(buf, sizeof buf, "%-15s %-10.3g %-10.4f %-10.4f %-10.4f %zu\n",
                  key.first.c_str(), key.second, mean, sd, se, aps.size());
    os << buf;
  }
  return os.str();
}

}  // namespace mhr
