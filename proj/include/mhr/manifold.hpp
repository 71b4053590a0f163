#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "mhr/kernels.hpp"

namespace mhr {

/// Exact Euclidean k-nearest neighbors; ties broken by lower index.
struct NeighborGraph {
  Index k = 0;
  std::vector<std::vector<Index>> neighbors;  // self excluded
  std::vector<std::vector<double>> distances;
};

inline NeighborGraph knn(const Matrix& x, Index k) {
  const Index n = x.rows();
  if (k < 1 || k > n - 1) throw Error("manifold", "k must be in [1, n-1]");
  NeighborGraph g;
  g.k = k;
  g.neighbors.resize(static_cast<std::size_t>(n));
  g.distances.resize(static_cast<std::size_t>(n));
  std::vector<std::pair<double, Index>> cand(static_cast<std::size_t>(n - 1));
  for (Index i = 0; i < n; ++i) {
    std::size_t at = 0;
    for (Index j = 0; j < n; ++j) {
      if (j == i) continue;
      cand[at++] = {(x.row(i) - x.row(j)).squaredNorm(), j};
    }
    std::partial_sort(cand.begin(), cand.begin() + k, cand.end());
    auto& nb = g.neighbors[static_cast<std::size_t>(i)];
    auto& nd = g.distances[static_cast<std::size_t>(i)];
    nb.resize(static_cast<std::size_t>(k));
    nd.resize(static_cast<std::size_t>(k));
    for (Index t = 0; t < k; ++t) {
      nb[static_cast<std::size_t>(t)] = cand[static_cast<std::size_t>(t)].second;
      nd[static_cast<std::size_t>(t)] = std::sqrt(cand[static_cast<std::size_t>(t)].first);
    }
  }
  return g;
}

enum class ManifoldKind { laplacian, hessian };

inline std::string to_string(ManifoldKind k) {
  return k == ManifoldKind::laplacian ? "laplacian" : "hessian";
}

/// Symmetric PSD n x n regularizer: graph Laplacian L or Hessian energy H.
struct ManifoldMatrix {
  Matrix matrix;
  ManifoldKind kind = ManifoldKind::laplacian;
  std::string source;   // view id or "combined"
  Index intrinsic_dim = 0;  // hessian only
  Index dropped_neighborhoods = 0;  // hessian: degenerate local fits skipped

  Index n() const { return matrix.rows(); }
};

/// Heat-kernel weights on the symmetrized kNN graph; L = D - W.
inline ManifoldMatrix laplacian(const Matrix& x, const NeighborGraph& graph, double bandwidth,
                                const std::string& source = "view") {
  if (bandwidth <= 0) throw Error("manifold", "bandwidth must be > 0");
  const Index n = x.rows();
  Matrix w = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    for (std::size_t t = 0; t < graph.neighbors[static_cast<std::size_t>(i)].size(); ++t) {
      const Index j = graph.neighbors[static_cast<std::size_t>(i)][t];
      const double d = graph.distances[static_cast<std::size_t>(i)][t];
      const double wij = std::exp(-d * d / (2.0 * bandwidth * bandwidth));
      w(i, j) = wij;
      w(j, i) = wij;  // edge if i in N(j) or j in N(i)
    }
  }
  Matrix l = Matrix(w.rowwise().sum().asDiagonal()) - w;
  return ManifoldMatrix{std::move(l), ManifoldKind::laplacian, source, 0, 0};
}

namespace detail {

// Modified Gram-Schmidt. Returns false if any column degenerates.
inline bool gram_schmidt(Matrix& m, double drop_tol = 1e-10) {
  for (Index j = 0; j < m.cols(); ++j) {
    for (Index p = 0; p < j; ++p) m.col(j) -= m.col(p).dot(m.col(j)) * m.col(p);
    const double norm = m.col(j).norm();
    if (norm < drop_tol) return false;
    m.col(j) /= norm;
  }
  return true;
}

}  // namespace detail

/// Accumulated second-order energy matrix per the 4-step local-fit procedure:
/// neighborhood centering at x_i, local tangent coordinates from the SVD of
/// the centered neighbors, Gram-Schmidt against [1, linear, quadratic]
/// columns, and a scatter-add of each local PSD block over the neighbors.
inline ManifoldMatrix hessian_energy(const Matrix& x, const NeighborGraph& graph, Index m,
                                     const std::string& source = "view", double psd_tol = 1e-8) {
  const Index n = x.rows();
  const Index k = graph.k;
  const Index q = m * (m + 1) / 2;
  if (m < 1) throw Error("manifold", "intrinsic dimension must be >= 1");
  if (k < 1 + m + q)
    throw Error("manifold", "k = " + std::to_string(k) + " too small; need k >= " +
                                std::to_string(1 + m + q) + " for m = " + std::to_string(m));

  Matrix h = Matrix::Zero(n, n);
  Index dropped = 0;
  Matrix xi(k, x.cols());
  for (Index i = 0; i < n; ++i) {
    const auto& nb = graph.neighbors[static_cast<std::size_t>(i)];
    for (Index t = 0; t < k; ++t) xi.row(t) = x.row(nb[static_cast<std::size_t>(t)]) - x.row(i);

    Eigen::JacobiSVD<Matrix> svd(xi, Eigen::ComputeThinU);
    const Matrix u = svd.matrixU().leftCols(std::min<Index>(m, svd.matrixU().cols()));
    if (u.cols() < m) {
      ++dropped;
      continue;
    }

    // [1, U_1..U_m, U_11, U_12, .., U_mm]
    Matrix design(k, 1 + m + q);
    design.col(0).setOnes();
    design.middleCols(1, m) = u;
    Index c = 1 + m;
    for (Index a = 0; a < m; ++a)
      for (Index b = a; b < m; ++b) design.col(c++) = u.col(a).cwiseProduct(u.col(b));

    if (!detail::gram_schmidt(design)) {
      ++dropped;  // degenerate neighborhood, contributes nothing
      continue;
    }
    const auto quad = design.rightCols(q);  // k x q, orthonormal to 1 and linear columns
    const Matrix block = quad * quad.transpose();
    for (Index a = 0; a < k; ++a)
      for (Index b = 0; b < k; ++b)
        h(nb[static_cast<std::size_t>(a)], nb[static_cast<std::size_t>(b)]) += block(a, b);
  }
  h = psd_repair(h, psd_tol, "manifold");
  return ManifoldMatrix{std::move(h), ManifoldKind::hessian, source, m, dropped};
}

/// H = sum_j beta_j H^j over the simplex.
inline ManifoldMatrix combine_manifolds(const std::vector<ManifoldMatrix>& mats,
                                        const SimplexWeights& beta) {
  if (mats.empty()) throw Error("manifold", "no matrices to combine");
  if (beta.size() != static_cast<Index>(mats.size()))
    throw Error("manifold", "weight count does not match matrix count");
  const Index n = mats.front().n();
  Matrix h = Matrix::Zero(n, n);
  for (std::size_t j = 0; j < mats.size(); ++j) {
    if (mats[j].n() != n) throw Error("manifold", "matrix dimension mismatch");
    h += beta[static_cast<Index>(j)] * mats[j].matrix;
  }
  return ManifoldMatrix{std::move(h), mats.front().kind, "combined", mats.front().intrinsic_dim, 0};
}

/// Median over examples of the smallest m whose top-m singular values of the
/// centered neighborhood capture >= threshold of the squared spectral mass.
inline Index estimate_intrinsic_dim(const Matrix& x, const NeighborGraph& graph,
                                    double threshold = 0.95) {
  if (!(threshold > 0 && threshold < 1)) throw Error("manifold", "threshold must be in (0,1)");
  const Index n = x.rows();
  const Index k = graph.k;
  std::vector<Index> dims;
  dims.reserve(static_cast<std::size_t>(n));
  Matrix xi(k, x.cols());
  for (Index i = 0; i < n; ++i) {
    const auto& nb = graph.neighbors[static_cast<std::size_t>(i)];
    for (Index t = 0; t < k; ++t) xi.row(t) = x.row(nb[static_cast<std::size_t>(t)]) - x.row(i);
    Eigen::JacobiSVD<Matrix> svd(xi);
    const Vector sv = svd.singularValues();
    const double total = sv.squaredNorm();
    if (total <= 0) {
      dims.push_back(1);
      continue;
    }
    double cum = 0;
    Index mi = sv.size();
    for (Index j = 0; j < sv.size(); ++j) {
      cum += sv(j) * sv(j);
      if (cum >= threshold * total) {
        mi = j + 1;
        break;
      }
    }
    dims.push_back(mi);
  }
  std::nth_element(dims.begin(), dims.begin() + static_cast<std::ptrdiff_t>(dims.size() / 2),
                   dims.end());
  return dims[dims.size() / 2];
}

}  // namespace mhr
