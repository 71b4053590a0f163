#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "mhr/dataset.hpp"
#include "mhr/simplex.hpp"

namespace mhr {

enum class KernelFamily { linear, gaussian_rbf, polynomial };

inline std::string to_string(KernelFamily f) {
  switch (f) {
    case KernelFamily::linear: return "linear";
    case KernelFamily::gaussian_rbf: return "gaussian_rbf";
    case KernelFamily::polynomial: return "polynomial";
  }
  return "?";
}

inline KernelFamily kernel_family_from_string(const std::string& s) {
  if (s == "linear") return KernelFamily::linear;
  if (s == "gaussian_rbf" || s == "gaussian" || s == "rbf") return KernelFamily::gaussian_rbf;
  if (s == "polynomial" || s == "poly") return KernelFamily::polynomial;
  throw Error("kernels", "unknown kernel family '" + s + "'");
}

struct KernelSpec {
  KernelFamily family = KernelFamily::gaussian_rbf;
  double bandwidth = 1.0;  // gaussian; <= 0 means "use median heuristic"
  int degree = 2;          // polynomial
  double offset = 1.0;     // polynomial

  void validate() const {
    if (family == KernelFamily::gaussian_rbf && bandwidth <= 0)
      throw Error("kernels", "gaussian bandwidth must be > 0");
    if (family == KernelFamily::polynomial) {
      if (degree < 1) throw Error("kernels", "polynomial degree must be >= 1");
      if (offset < 0) throw Error("kernels", "polynomial offset must be >= 0");
    }
  }
};

/// Symmetric PSD Gram matrix for one view or a simplex combination of views.
struct GramKernel {
  Matrix matrix;
  std::string source;  // view id or "combined"

  Index n() const { return matrix.rows(); }
};

/// Median pairwise distance, the default gaussian bandwidth.
inline double median_bandwidth(const Matrix& x) {
  const Index n = x.rows();
  if (n < 2) return 1.0;
  std::vector<double> dists;
  dists.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) dists.push_back((x.row(i) - x.row(j)).norm());
  std::nth_element(dists.begin(), dists.begin() + static_cast<std::ptrdiff_t>(dists.size() / 2),
                   dists.end());
  const double med = dists[dists.size() / 2];
  return med > 0 ? med : 1.0;
}

inline GramKernel gram(const Matrix& view, const KernelSpec& spec,
                       const std::string& source = "view") {
  spec.validate();
  if (view.rows() < 1) throw Error("kernels", "empty view");
  if (!view.allFinite()) throw Error("kernels", "non-finite feature values");
  const Index n = view.rows();
  Matrix k(n, n);
  switch (spec.family) {
    case KernelFamily::linear:
      k = view * view.transpose();
      break;
    case KernelFamily::gaussian_rbf: {
      const double sigma = spec.bandwidth > 0 ? spec.bandwidth : median_bandwidth(view);
      const Vector sq = view.rowwise().squaredNorm();
      Matrix d2 = (-2.0 * view * view.transpose()).colwise() + sq;
      d2.rowwise() += sq.transpose();
      k = (-d2 / (2.0 * sigma * sigma)).array().exp();
      k.diagonal().setOnes();
      break;
    }
    case KernelFamily::polynomial: {
      k = (view * view.transpose()).array() + spec.offset;
      k = k.array().pow(spec.degree);
      break;
    }
  }
  k = (0.5 * (k + k.transpose())).eval();
  return GramKernel{std::move(k), source};
}

/// Cross Gram between test rows (a) and training rows (b); a_rows x b_rows.
inline Matrix gram_cross(const Matrix& a, const Matrix& b, const KernelSpec& spec) {
  spec.validate();
  if (a.cols() != b.cols()) throw Error("kernels", "feature width mismatch in cross kernel");
  switch (spec.family) {
    case KernelFamily::linear:
      return a * b.transpose();
    case KernelFamily::gaussian_rbf: {
      const double sigma = spec.bandwidth > 0 ? spec.bandwidth : median_bandwidth(b);
      Matrix d2 = (-2.0 * a * b.transpose()).colwise() + a.rowwise().squaredNorm();
      d2.rowwise() += b.rowwise().squaredNorm().transpose();
      return (-d2 / (2.0 * sigma * sigma)).array().exp();
    }
    case KernelFamily::polynomial: {
      Matrix k = (a * b.transpose()).array() + spec.offset;
      return k.array().pow(spec.degree);
    }
  }
  throw Error("kernels", "unreachable");
}

struct PsdCheck {
  bool is_psd = false;
  double min_eig = 0.0;
  double max_eig = 0.0;
};

/// Smallest eigenvalue check; is_psd iff min_eig >= -tol * max(1, |max_eig|).
inline PsdCheck check_psd(const Matrix& m, double tol = 1e-8) {
  if (m.rows() != m.cols()) throw Error("kernels", "matrix not square");
  const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if (asym > 1e-10 * scale)
    throw Error("kernels", "matrix asymmetric beyond tolerance (" + std::to_string(asym) + ")");
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.transpose()),
                                           Eigen::EigenvaluesOnly);
  PsdCheck out;
  out.min_eig = es.eigenvalues().minCoeff();
  out.max_eig = es.eigenvalues().maxCoeff();
  out.is_psd = out.min_eig >= -tol * std::max(1.0, std::abs(out.max_eig));
  return out;
}

/// Clips small negative eigenvalues to zero; hard error below -tol relative.
inline Matrix psd_repair(const Matrix& m, double tol = 1e-8, const char* stage = "kernels") {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.transpose()));
  const Vector& ev = es.eigenvalues();
  const double floor = -tol * std::max(1.0, std::abs(ev.maxCoeff()));
  if (ev.minCoeff() < floor)
    throw Error(stage, "matrix is not PSD (min eigenvalue " + std::to_string(ev.minCoeff()) + ")");
  if (ev.minCoeff() >= 0) return 0.5 * (m + m.transpose());
  const Vector clipped = ev.cwiseMax(0.0);
  return es.eigenvectors() * clipped.asDiagonal() * es.eigenvectors().transpose();
}

/// K = sum_k theta_k K^k (Eq. of the convex kernel hull).
inline GramKernel combine_kernels(const std::vector<GramKernel>& kernels,
                                  const SimplexWeights& theta) {
  if (kernels.empty()) throw Error("kernels", "no kernels to combine");
  if (theta.size() != static_cast<Index>(kernels.size()))
    throw Error("kernels", "weight count does not match kernel count");
  const Index n = kernels.front().n();
  Matrix k = Matrix::Zero(n, n);
  for (std::size_t i = 0; i < kernels.size(); ++i) {
    if (kernels[i].n() != n) throw Error("kernels", "kernel dimension mismatch");
    k += theta[static_cast<Index>(i)] * kernels[i].matrix;
  }
  return GramKernel{std::move(k), "combined"};
}

inline GramKernel average_kernel(const std::vector<GramKernel>& kernels) {
  return combine_kernels(kernels, SimplexWeights::uniform(static_cast<Index>(kernels.size())));
}

/// Stacks all views into one wide view (the Con* baselines).
inline MultiviewDataset concat_views(const MultiviewDataset& ds) {
  Index width = 0;
  for (const auto& v : ds.views) width += v.cols();
  Matrix wide(ds.n(), width);
  Index at = 0;
  for (const auto& v : ds.views) {
    wide.middleCols(at, v.cols()) = v;
    at += v.cols();
  }
  MultiviewDataset out;
  out.views = {std::move(wide)};
  out.view_names = {"concat"};
  out.labels = ds.labels;
  out.perm = ds.perm;
  return out;
}

/// Optional per-view standardization (zero mean, unit variance per column).
inline Matrix standardize(const Matrix& x) {
  const Vector mean = x.colwise().mean();
  Matrix c = x.rowwise() - mean.transpose();
  for (Index j = 0; j < c.cols(); ++j) {
    const double sd = std::sqrt(c.col(j).squaredNorm() / static_cast<double>(std::max<Index>(1, c.rows() - 1)));
    if (sd > 1e-12) c.col(j) /= sd;
  }
  return c;
}

/// Optional trace normalization before combination (K / (tr K / n)).
inline GramKernel trace_normalize(GramKernel k) {
  const double t = k.matrix.trace() / static_cast<double>(k.n());
  if (t > 1e-300) k.matrix /= t;
  return k;
}

}  // namespace mhr
