#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "mhr/common.hpp"

namespace mhr {

enum class Label : int { negative = -1, unlabeled = 0, positive = +1 };

inline Label label_from_int(int v) {
  switch (v) {
    case -1: return Label::negative;
    case 0: return Label::unlabeled;
    case 1: return Label::positive;
    default: throw Error("dataset", "label value must be in {+1,-1,0}, got " + std::to_string(v));
  }
}

/// Per-view feature matrices plus labels for n = l + u examples.
/// Examples are ordered labeled-first; `perm[i]` is the original index of
/// the example now stored at row i.
struct MultiviewDataset {
  std::vector<Matrix> views;
  std::vector<std::string> view_names;
  std::vector<Label> labels;
  std::vector<Index> perm;

  Index n() const { return static_cast<Index>(labels.size()); }
  Index n_views() const { return static_cast<Index>(views.size()); }
  Index n_labeled() const {
    return static_cast<Index>(
        std::count_if(labels.begin(), labels.end(), [](Label y) { return y != Label::unlabeled; }));
  }
  Index n_unlabeled() const { return n() - n_labeled(); }

  /// Labels of the first l examples as a +-1 vector.
  Vector labeled_targets() const {
    const Index l = n_labeled();
    Vector y(l);
    for (Index i = 0; i < l; ++i) y(i) = static_cast<double>(static_cast<int>(labels[static_cast<std::size_t>(i)]));
    return y;
  }

  std::uint64_t fingerprint() const {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (const auto& v : views) h = fnv1a(v, h);
    for (Label y : labels) {
      const int iy = static_cast<int>(y);
      h = fnv1a(&iy, sizeof iy, h);
    }
    return h;
  }
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline double parse_double(const std::string& s, const std::string& context) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error("dataset", "non-numeric cell '" + s + "' in " + context);
  }
}

// Stable labeled-first reorder; returns the permutation applied.
inline void reorder_labeled_first(MultiviewDataset& ds) {
  const Index n = ds.n();
  std::vector<Index> order;
  order.reserve(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i)
    if (ds.labels[static_cast<std::size_t>(i)] != Label::unlabeled) order.push_back(i);
  for (Index i = 0; i < n; ++i)
    if (ds.labels[static_cast<std::size_t>(i)] == Label::unlabeled) order.push_back(i);

  std::vector<Label> labels(static_cast<std::size_t>(n));
  std::vector<Index> perm(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    const Index src = order[static_cast<std::size_t>(i)];
    labels[static_cast<std::size_t>(i)] = ds.labels[static_cast<std::size_t>(src)];
    perm[static_cast<std::size_t>(i)] =
        ds.perm.empty() ? src : ds.perm[static_cast<std::size_t>(src)];
  }
  for (auto& view : ds.views) {
    Matrix permuted(n, view.cols());
    for (Index i = 0; i < n; ++i) permuted.row(i) = view.row(order[static_cast<std::size_t>(i)]);
    view = std::move(permuted);
  }
  ds.labels = std::move(labels);
  ds.perm = std::move(perm);
}

}  // namespace detail

inline void validate_dataset(const MultiviewDataset& ds) {
  if (ds.views.empty()) throw Error("dataset", "no views");
  if (ds.views.size() != ds.view_names.size())
    throw Error("dataset", "view/name count mismatch");
  const Index n = ds.n();
  for (std::size_t v = 0; v < ds.views.size(); ++v) {
    if (ds.views[v].rows() != n)
      throw Error("dataset", "row count mismatch: view '" + ds.view_names[v] + "' has " +
                                 std::to_string(ds.views[v].rows()) + " rows, labels have " +
                                 std::to_string(n));
    if (ds.views[v].cols() == 0) throw Error("dataset", "view '" + ds.view_names[v] + "' is empty");
    if (!ds.views[v].allFinite())
      throw Error("dataset", "non-finite values in view '" + ds.view_names[v] + "'");
  }
  for (Index i = 0; i + 1 < n; ++i)
    if (ds.labels[static_cast<std::size_t>(i)] == Label::unlabeled &&
        ds.labels[static_cast<std::size_t>(i + 1)] != Label::unlabeled)
      throw Error("dataset", "labeled examples must precede unlabeled ones");
}

/// Builds a validated, labeled-first dataset from raw parts.
inline MultiviewDataset make_dataset(std::vector<Matrix> views, std::vector<std::string> names,
                                     std::vector<Label> labels) {
  MultiviewDataset ds;
  ds.views = std::move(views);
  ds.view_names = std::move(names);
  ds.labels = std::move(labels);
  // size checks must come before the reorder touches view rows
  if (ds.views.size() != ds.view_names.size())
    throw Error("dataset", "view/name count mismatch");
  for (std::size_t v = 0; v < ds.views.size(); ++v)
    if (ds.views[v].rows() != ds.n())
      throw Error("dataset", "row count mismatch: view '" + ds.view_names[v] + "' has " +
                                 std::to_string(ds.views[v].rows()) + " rows, labels have " +
                                 std::to_string(ds.n()));
  detail::reorder_labeled_first(ds);
  validate_dataset(ds);
  return ds;
}

/// Reads labels.csv + view_<name>.csv from `root`. Views are ordered by name.
inline MultiviewDataset load_dataset(const std::string& root) {
  namespace fs = std::filesystem;
  const fs::path dir(root);
  if (!fs::is_directory(dir)) throw Error("dataset", "not found: " + root);

  const fs::path labels_path = dir / "labels.csv";
  std::ifstream lf(labels_path);
  if (!lf) throw Error("dataset", "not found: " + labels_path.string());
  std::vector<Label> labels;
  std::string line;
  std::getline(lf, line);  // header
  while (std::getline(lf, line)) {
    if (line.empty()) continue;
    const auto cells = detail::split_csv_line(line);
    if (cells.size() != 2) throw Error("dataset", "labels.csv expects index,label rows");
    const int v = static_cast<int>(detail::parse_double(cells[1], "labels.csv"));
    labels.push_back(label_from_int(v));
  }
  if (labels.empty()) throw Error("dataset", "labels.csv has no rows");

  std::vector<std::string> names;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string fname = entry.path().filename().string();
    if (fname.rfind("view_", 0) == 0 && entry.path().extension() == ".csv")
      names.push_back(fname.substr(5, fname.size() - 9));
  }
  std::sort(names.begin(), names.end());
  if (names.empty()) throw Error("dataset", "no view_<name>.csv files in " + root);

  std::vector<Matrix> views;
  for (const auto& name : names) {
    const fs::path vpath = dir / ("view_" + name + ".csv");
    std::ifstream vf(vpath);
    if (!vf) throw Error("dataset", "not found: " + vpath.string());
    std::getline(vf, line);  // header
    const std::size_t cols = detail::split_csv_line(line).size();
    std::vector<double> data;
    std::size_t rows = 0;
    while (std::getline(vf, line)) {
      if (line.empty()) continue;
      const auto cells = detail::split_csv_line(line);
      if (cells.size() != cols)
        throw Error("dataset", "ragged row in view '" + name + "'");
      for (const auto& c : cells) data.push_back(detail::parse_double(c, "view_" + name + ".csv"));
      ++rows;
    }
    Matrix m(static_cast<Index>(rows), static_cast<Index>(cols));
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < cols; ++j)
        m(static_cast<Index>(i), static_cast<Index>(j)) = data[i * cols + j];
    views.push_back(std::move(m));
  }
  return make_dataset(std::move(views), std::move(names), std::move(labels));
}

/// Writes the canonical CSV layout; load(save(ds)) round-trips bit-identically.
inline void save_dataset(const MultiviewDataset& ds, const std::string& root) {
  namespace fs = std::filesystem;
  fs::create_directories(root);
  {
    std::ofstream lf(fs::path(root) / "labels.csv");
    lf << "index,label\n";
    for (Index i = 0; i < ds.n(); ++i)
      lf << i << ',' << static_cast<int>(ds.labels[static_cast<std::size_t>(i)]) << '\n';
  }
  char buf[64];
  for (std::size_t v = 0; v < ds.views.size(); ++v) {
    std::ofstream vf(fs::path(root) / ("view_" + ds.view_names[v] + ".csv"));
    const Matrix& m = ds.views[v];
    for (Index j = 0; j < m.cols(); ++j) vf << (j ? "," : "") << 'f' << j;
    vf << '\n';
    for (Index i = 0; i < m.rows(); ++i) {
      for (Index j = 0; j < m.cols(); ++j) {
        std::snprintf(buf, sizeof buf, "%.17g", m(i, j));
        vf << (j ? "," : "") << buf;
      }
      vf << '\n';
    }
  }
}

/// Which ground-truth labels a training run gets to see.
struct LabelMask {
  std::vector<Index> labeled_indices;
  double fraction = 1.0;
  std::uint64_t seed = 0;
};

/// Deterministic stratified mask over the examples that carry ground truth.
inline LabelMask split_labels(const MultiviewDataset& ds, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0))
    throw Error("dataset", "fraction must be in (0,1]");
  std::vector<Index> pos, neg;
  for (Index i = 0; i < ds.n(); ++i) {
    if (ds.labels[static_cast<std::size_t>(i)] == Label::positive) pos.push_back(i);
    if (ds.labels[static_cast<std::size_t>(i)] == Label::negative) neg.push_back(i);
  }
  const Index total = static_cast<Index>(pos.size() + neg.size());
  if (total < 2) throw Error("dataset", "need >= 2 ground-truth labels to mask");
  Index count = static_cast<Index>(std::llround(fraction * static_cast<double>(total)));
  if (count == 0) throw Error("dataset", "fraction yields zero labeled examples");
  count = std::min(count, total);

  std::mt19937_64 rng(seed);
  std::shuffle(pos.begin(), pos.end(), rng);
  std::shuffle(neg.begin(), neg.end(), rng);

  Index take_pos = static_cast<Index>(
      std::llround(static_cast<double>(count) * static_cast<double>(pos.size()) /
                   static_cast<double>(total)));
  if (!pos.empty() && !neg.empty() && count >= 2) {
    take_pos = std::max<Index>(take_pos, 1);
    take_pos = std::min<Index>(take_pos, count - 1);
  }
  take_pos = std::min<Index>(take_pos, static_cast<Index>(pos.size()));
  Index take_neg = std::min<Index>(count - take_pos, static_cast<Index>(neg.size()));

  LabelMask mask;
  mask.fraction = fraction;
  mask.seed = seed;
  mask.labeled_indices.assign(pos.begin(), pos.begin() + take_pos);
  mask.labeled_indices.insert(mask.labeled_indices.end(), neg.begin(), neg.begin() + take_neg);
  std::sort(mask.labeled_indices.begin(), mask.labeled_indices.end());
  return mask;
}

/// Hides all labels outside the mask and reorders labeled-first.
inline MultiviewDataset apply_mask(const MultiviewDataset& ds, const LabelMask& mask) {
  std::vector<Label> labels(static_cast<std::size_t>(ds.n()), Label::unlabeled);
  for (Index i : mask.labeled_indices) {
    if (i < 0 || i >= ds.n()) throw Error("dataset", "mask index out of range");
    labels[static_cast<std::size_t>(i)] = ds.labels[static_cast<std::size_t>(i)];
  }
  MultiviewDataset out;
  out.views = ds.views;
  out.view_names = ds.view_names;
  out.labels = std::move(labels);
  out.perm = ds.perm;
  detail::reorder_labeled_first(out);
  validate_dataset(out);
  return out;
}

}  // namespace mhr
