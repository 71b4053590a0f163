#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "mhr/kernels.hpp"
#include "mhr/manifold.hpp"
#include "mhr/simplex.hpp"

namespace mhr {

enum class LossKind { hinge, squared };

inline std::string to_string(LossKind k) { return k == LossKind::hinge ? "hinge" : "squared"; }

inline LossKind loss_from_string(const std::string& s) {
  if (s == "hinge") return LossKind::hinge;
  if (s == "squared" || s == "ls") return LossKind::squared;
  throw Error("solvers", "unknown loss '" + s + "'");
}

struct ObjectiveConfig {
  double gamma_A = 1e-4;
  double gamma_I = 1e-2;
  double gamma_theta = 1e-3;
  double gamma_beta = 1e-3;
  LossKind loss = LossKind::squared;
  double mu = 0.01;  // hinge smoothing
  Index max_inner_iters = 1000;
  Index max_outer_rounds = 50;
  double tol_inner = 1e-6;
  double tol_outer = 1e-5;

  void validate() const {
    if (gamma_A < 0 || gamma_I < 0 || gamma_theta < 0 || gamma_beta < 0)
      throw Error("solvers", "gamma values must be >= 0");
    if (mu <= 0) throw Error("solvers", "smoothing parameter mu must be > 0");
    if (tol_inner <= 0 || tol_outer <= 0) throw Error("solvers", "tolerances must be > 0");
  }
};

/// Fitted classifier: expansion coefficients over all n training examples
/// plus the learned view weights.
struct TrainedModel {
  Vector alpha;
  SimplexWeights theta{Vector::Ones(1)};
  SimplexWeights beta{Vector::Ones(1)};
  std::vector<double> objective_trace;
  ObjectiveConfig config;
  std::vector<KernelSpec> kernel_specs;
  std::vector<double> kernel_scales;  // cross-kernel divisors (trace norm); empty = all 1
  std::uint64_t data_fingerprint = 0;
};

// ---------------------------------------------------------------------------
// Loss terms
// ---------------------------------------------------------------------------

/// (1/l) sum of hinge losses over the first l examples; f = K * alpha.
inline double hinge_loss(const Vector& f, const Vector& y, Index l) {
  double s = 0;
  for (Index i = 0; i < l; ++i) s += std::max(0.0, 1.0 - y(i) * f(i));
  return s / static_cast<double>(l);
}

inline double squared_loss(const Vector& f, const Vector& y, Index l) {
  double s = 0;
  for (Index i = 0; i < l; ++i) {
    const double r = y(i) - f(i);
    s += r * r;
  }
  return s / static_cast<double>(l);
}

/// Dual variables of the smoothed hinge: median{0, 1, margin_i / (mu s_i)}.
inline Vector smoothed_hinge_u(const Vector& margins, const Vector& scales, double mu) {
  if (mu <= 0) throw Error("solvers", "mu must be > 0");
  Vector u(margins.size());
  for (Index i = 0; i < margins.size(); ++i) {
    if (scales(i) <= 0) throw Error("solvers", "degenerate all-zero kernel row");
    u(i) = std::clamp(margins(i) / (mu * scales(i)), 0.0, 1.0);
  }
  return u;
}

/// Value of the mu-smoothed hinge term (1/l) sum_i psi_mu,i at f = K alpha.
inline double smoothed_hinge_value(const Vector& f, const Vector& y, Index l,
                                   const Vector& scales, double mu) {
  double s = 0;
  for (Index i = 0; i < l; ++i) {
    const double margin = 1.0 - y(i) * f(i);
    const double u = std::clamp(margin / (mu * scales(i)), 0.0, 1.0);
    s += u * margin - 0.5 * mu * scales(i) * u * u;
  }
  return s / static_cast<double>(l);
}

// ---------------------------------------------------------------------------
// mHR-KLS closed form
// ---------------------------------------------------------------------------

struct KlsResult {
  Vector alpha;
  double residual = 0;
  double condition = 0;
};

/// alpha = (J K + gamma_A l I + gamma_I l H K)^{-1} Y by dense LU solve.
inline KlsResult fit_kls(const Matrix& k, const Matrix& h, const Vector& y_labeled, Index l,
                         const ObjectiveConfig& cfg) {
  cfg.validate();
  const Index n = k.rows();
  if (h.rows() != n || h.cols() != n) throw Error("solvers", "K/H dimension mismatch");
  if (l < 1 || l > n || y_labeled.size() != l) throw Error("solvers", "bad labeled count");
  const double ld = static_cast<double>(l);

  Vector rhs = Vector::Zero(n);
  rhs.head(l) = y_labeled;

  Matrix a = cfg.gamma_A * ld * Matrix::Identity(n, n);
  a.topRows(l) += k.topRows(l);  // J K
  if (cfg.gamma_I > 0) a.noalias() += cfg.gamma_I * ld * (h * k);

  Eigen::PartialPivLU<Matrix> lu(a);
  KlsResult out;
  out.alpha = lu.solve(rhs);
  out.residual = (a * out.alpha - rhs).norm();
  const double rhs_norm = rhs.norm();
  if (out.residual > 1e-8 * std::max(1.0, rhs_norm) || !out.alpha.allFinite()) {
    Eigen::JacobiSVD<Matrix> svd(a);
    const double smin = svd.singularValues().minCoeff();
    const double smax = svd.singularValues().maxCoeff();
    out.condition = smin > 0 ? smax / smin : std::numeric_limits<double>::infinity();
    throw Error("solvers", "near-singular KLS system (condition ~ " +
                               std::to_string(out.condition) +
                               "); consider raising gamma_A");
  }
  return out;
}

// ---------------------------------------------------------------------------
// mHR-SVM via Nesterov smoothing
// ---------------------------------------------------------------------------

/// Per-labeled-example scales ||K(x_i,.)||_inf over the first l rows.
inline Vector kernel_row_scales(const Matrix& k, Index l) {
  Vector s(l);
  for (Index i = 0; i < l; ++i) s(i) = k.row(i).cwiseAbs().maxCoeff();
  return s;
}

/// Smoothed SVM objective F_mu(alpha) with precomputed R = gamma_A K + gamma_I KHK.
inline double svm_objective_mu(const Vector& alpha, const Matrix& k, const Matrix& reg,
                               const Vector& y_labeled, Index l, const Vector& scales,
                               double mu) {
  const Vector f = k * alpha;
  return alpha.dot(reg * alpha) + smoothed_hinge_value(f, y_labeled, l, scales, mu);
}

/// grad F_mu = 2(gamma_A K + gamma_I KHK) alpha - (1/l)(Y K_l)^T u.
inline Vector svm_gradient(const Vector& alpha, const Matrix& k, const Matrix& reg,
                           const Vector& y_labeled, Index l, const Vector& scales, double mu) {
  const Vector f = k * alpha;
  Vector margins(l);
  for (Index i = 0; i < l; ++i) margins(i) = 1.0 - y_labeled(i) * f(i);
  const Vector u = smoothed_hinge_u(margins, scales, mu);
  Vector g = 2.0 * (reg * alpha);
  g.noalias() -= k.topRows(l).transpose() * (y_labeled.cwiseProduct(u)) /
                 static_cast<double>(l);
  return g;
}

/// L = ||2(gamma_A K + gamma_I KHK)||_2 + (1/mu) max_i ||K_i||_2^2 / ||K_i||_inf.
inline double svm_lipschitz(const Matrix& k, const Matrix& reg, Index l, double mu) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(reg + reg.transpose(), Eigen::EigenvaluesOnly);
  const double spectral = es.eigenvalues().cwiseAbs().maxCoeff();
  double row_term = 0;
  for (Index i = 0; i < l; ++i) {
    const double inf = k.row(i).cwiseAbs().maxCoeff();
    if (inf > 0) row_term = std::max(row_term, k.row(i).squaredNorm() / inf);
  }
  return spectral + row_term / mu;
}

inline Matrix svm_regularizer_matrix(const Matrix& k, const Matrix& h,
                                     const ObjectiveConfig& cfg) {
  Matrix reg = cfg.gamma_A * k;
  if (cfg.gamma_I > 0) reg.noalias() += cfg.gamma_I * (k * h * k);
  return 0.5 * (reg + reg.transpose());
}

struct SvmResult {
  Vector alpha;
  double objective = 0;          // smoothed objective at alpha
  std::vector<double> trace;     // smoothed objective per iteration
  Index iterations = 0;
};

/// Nesterov's three-sequence scheme on the smoothed objective, from
/// alpha^(0) = alpha_hat = 0. Returns the best iterate seen.
inline SvmResult fit_svm_nesterov(const Matrix& k, const Matrix& h, const Vector& y_labeled,
                                  Index l, const ObjectiveConfig& cfg) {
  cfg.validate();
  if (cfg.loss != LossKind::hinge) throw Error("solvers", "fit_svm_nesterov requires hinge loss");
  const Index n = k.rows();
  const Matrix reg = svm_regularizer_matrix(k, h, cfg);
  const Vector scales = kernel_row_scales(k, l);
  if (scales.minCoeff() <= 0) throw Error("solvers", "degenerate all-zero kernel row");
  const double lip = svm_lipschitz(k, reg, l, cfg.mu);
  if (lip <= 0) throw Error("solvers", "non-positive Lipschitz constant");

  Vector alpha = Vector::Zero(n);      // alpha^(t), alpha_hat = 0
  Vector grad_sum = Vector::Zero(n);   // sum (i+1)/2 * grad F(alpha^(i))
  SvmResult out;
  out.alpha = alpha;
  out.objective = svm_objective_mu(alpha, k, reg, y_labeled, l, scales, cfg.mu);
  out.trace.push_back(out.objective);
  double prev = out.objective;

  for (Index t = 0; t < cfg.max_inner_iters; ++t) {
    const Vector g = svm_gradient(alpha, k, reg, y_labeled, l, scales, cfg.mu);
    const Vector yt = alpha - g / lip;
    grad_sum += (static_cast<double>(t) + 1.0) / 2.0 * g;
    const Vector zt = -grad_sum / lip;  // alpha_hat = 0
    const double td = static_cast<double>(t);
    alpha = (2.0 / (td + 3.0)) * zt + ((td + 1.0) / (td + 3.0)) * yt;

    const double fy = svm_objective_mu(yt, k, reg, y_labeled, l, scales, cfg.mu);
    if (!std::isfinite(fy))
      throw Error("solvers", "non-finite SVM objective; inputs look mis-scaled");
    if (fy < out.objective) {
      out.objective = fy;
      out.alpha = yt;
    }
    out.trace.push_back(fy);
    out.iterations = t + 1;
    if (t > 0 && std::abs(prev - fy) <= cfg.tol_inner * std::max(1.0, std::abs(prev))) break;
    prev = fy;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Simplex subproblems
// ---------------------------------------------------------------------------

/// Reduced theta objective with alpha and beta fixed:
///   g(theta) = loss(V theta) + gamma_A q . theta + gamma_I theta^T B theta
///              + gamma_theta ||theta||^2
/// with V = [K^1 alpha .. K^Nv alpha], q_k = alpha^T K^k alpha,
/// B_kk' = (K^k alpha)^T H (K^k' alpha).
struct ThetaProblem {
  Matrix v;       // n x Nv columns K^k alpha
  Vector q;       // Nv
  Matrix b;       // Nv x Nv, PSD
  Vector y_labeled;
  Index l = 0;
  LossKind loss = LossKind::squared;
  double gamma_A = 0, gamma_I = 0, gamma_theta = 0;
  double mu = 0.01;  // smoothing for the hinge objective value (value only)

  static ThetaProblem build(const Vector& alpha, const std::vector<GramKernel>& kernels,
                            const Matrix& h, const Vector& y_labeled, Index l,
                            const ObjectiveConfig& cfg) {
    const Index nv = static_cast<Index>(kernels.size());
    const Index n = kernels.front().n();
    ThetaProblem p;
    p.v.resize(n, nv);
    p.q.resize(nv);
    for (Index kk = 0; kk < nv; ++kk) {
      p.v.col(kk) = kernels[static_cast<std::size_t>(kk)].matrix * alpha;
      p.q(kk) = alpha.dot(p.v.col(kk));
    }
    const Matrix hv = h * p.v;
    p.b = p.v.transpose() * hv;
    p.b = 0.5 * (p.b + p.b.transpose());
    p.y_labeled = y_labeled;
    p.l = l;
    p.loss = cfg.loss;
    p.gamma_A = cfg.gamma_A;
    p.gamma_I = cfg.gamma_I;
    p.gamma_theta = cfg.gamma_theta;
    p.mu = cfg.mu;
    return p;
  }

  double objective(const Vector& theta) const {
    const Vector f = v * theta;
    const double lossv = loss == LossKind::squared ? squared_loss(f, y_labeled, l)
                                                   : hinge_loss(f, y_labeled, l);
    return lossv + gamma_A * q.dot(theta) + gamma_I * theta.dot(b * theta) +
           gamma_theta * theta.squaredNorm();
  }

  Vector gradient(const Vector& theta) const {
    const Vector f = v * theta;
    Vector g = gamma_A * q + 2.0 * gamma_I * (b * theta) + 2.0 * gamma_theta * theta;
    if (loss == LossKind::squared) {
      for (Index i = 0; i < l; ++i)
        g += (2.0 / static_cast<double>(l)) * (f(i) - y_labeled(i)) * v.row(i).transpose();
    } else {
      for (Index i = 0; i < l; ++i)  // subgradient; 0 at the kink
        if (1.0 - y_labeled(i) * f(i) > 0)
          g -= (y_labeled(i) / static_cast<double>(l)) * v.row(i).transpose();
    }
    return g;
  }
};

/// Projected gradient with backtracking on the reduced theta objective.
/// Descent is guaranteed: a step is only taken if it lowers the objective.
inline SimplexWeights solve_theta(const ThetaProblem& p, const SimplexWeights& theta0,
                                  Index max_iters = 2000, double tol = 1e-10) {
  Vector theta = theta0.vec();
  double obj = p.objective(theta);
  double step = 1.0;
  for (Index it = 0; it < max_iters; ++it) {
    const Vector g = p.gradient(theta);
    bool moved = false;
    for (int bt = 0; bt < 60; ++bt) {
      const Vector cand = project_simplex(theta - step * g).vec();
      const double cobj = p.objective(cand);
      if (cobj < obj - 1e-15) {
        const double delta = obj - cobj;
        theta = cand;
        obj = cobj;
        moved = true;
        step *= 1.6;  // allow the step to grow back
        if (delta <= tol * std::max(1.0, std::abs(obj))) it = max_iters;
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;
  }
  return SimplexWeights(theta);
}

inline SimplexWeights solve_theta(const Vector& alpha, const std::vector<GramKernel>& kernels,
                                  const Matrix& h, const Vector& y_labeled, Index l,
                                  const ObjectiveConfig& cfg,
                                  const SimplexWeights& theta0) {
  return solve_theta(ThetaProblem::build(alpha, kernels, h, y_labeled, l, cfg), theta0);
}

/// Reduced beta objective is beta . hcoef + gamma_beta ||beta||^2 with
/// hcoef_j = gamma_I alpha^T K H^j K alpha, minimized in closed form.
inline Vector beta_linear_coeffs(const Vector& alpha, const Matrix& k,
                                 const std::vector<ManifoldMatrix>& manifolds,
                                 const ObjectiveConfig& cfg) {
  const Vector ka = k * alpha;
  Vector h(static_cast<Index>(manifolds.size()));
  for (std::size_t j = 0; j < manifolds.size(); ++j)
    h(static_cast<Index>(j)) = cfg.gamma_I * ka.dot(manifolds[j].matrix * ka);
  return h;
}

inline SimplexWeights solve_beta(const Vector& hcoef, double gamma_beta) {
  const Index nv = hcoef.size();
  if (nv == 0) throw Error("solvers", "empty beta subproblem");
  if (gamma_beta > 0) return project_simplex(-hcoef / (2.0 * gamma_beta));
  // gamma_beta = 0: all mass on the argmin, ties split uniformly
  const double lo = hcoef.minCoeff();
  Vector beta = Vector::Zero(nv);
  Index ties = 0;
  for (Index j = 0; j < nv; ++j)
    if (hcoef(j) <= lo + 1e-12 * std::max(1.0, std::abs(lo))) ++ties;
  for (Index j = 0; j < nv; ++j)
    if (hcoef(j) <= lo + 1e-12 * std::max(1.0, std::abs(lo)))
      beta(j) = 1.0 / static_cast<double>(ties);
  return SimplexWeights(beta);
}

inline SimplexWeights solve_beta(const Vector& alpha, const Matrix& k,
                                 const std::vector<ManifoldMatrix>& manifolds,
                                 const ObjectiveConfig& cfg) {
  return solve_beta(beta_linear_coeffs(alpha, k, manifolds, cfg), cfg.gamma_beta);
}

// ---------------------------------------------------------------------------
// Full objective and the alternating loop
// ---------------------------------------------------------------------------

/// The full (unsmoothed) multiview objective.
inline double full_objective(const Vector& alpha, const SimplexWeights& theta,
                             const SimplexWeights& beta, const std::vector<GramKernel>& kernels,
                             const std::vector<ManifoldMatrix>& manifolds,
                             const Vector& y_labeled, Index l, const ObjectiveConfig& cfg) {
  const GramKernel k = combine_kernels(kernels, theta);
  const ManifoldMatrix h = combine_manifolds(manifolds, beta);
  const Vector f = k.matrix * alpha;
  const double lossv = cfg.loss == LossKind::squared ? squared_loss(f, y_labeled, l)
                                                     : hinge_loss(f, y_labeled, l);
  return lossv + cfg.gamma_A * alpha.dot(k.matrix * alpha) +
         cfg.gamma_I * f.dot(h.matrix * f) + cfg.gamma_theta * theta.vec().squaredNorm() +
         cfg.gamma_beta * beta.vec().squaredNorm();
}

/// Alternating optimization: (alpha | theta, beta) -> (theta) -> (beta),
/// from uniform weights. Each block step is accepted only if it does not
/// increase the full objective, so the recorded trace is non-increasing.
inline TrainedModel fit_alternating(const std::vector<GramKernel>& kernels,
                                    const std::vector<ManifoldMatrix>& manifolds,
                                    const Vector& y_labeled, Index l,
                                    const ObjectiveConfig& cfg) {
  cfg.validate();
  if (kernels.empty() || manifolds.empty()) throw Error("solvers", "no kernels or manifolds");
  const Index n = kernels.front().n();
  const Index nv = static_cast<Index>(kernels.size());
  if (static_cast<Index>(manifolds.size()) != nv)
    throw Error("solvers", "kernel/manifold view count mismatch");

  TrainedModel model;
  model.config = cfg;
  model.theta = SimplexWeights::uniform(nv);
  model.beta = SimplexWeights::uniform(nv);
  model.alpha = Vector::Zero(n);

  double obj = full_objective(model.alpha, model.theta, model.beta, kernels, manifolds,
                              y_labeled, l, cfg);
  model.objective_trace.push_back(obj);

  const auto record = [&](double next) {
    if (next > obj + 1e-9)
      throw Error("solvers", "objective increased by " + std::to_string(next - obj) +
                                 " in an alternating step (solver bug)");
    obj = next;
    model.objective_trace.push_back(obj);
  };

  for (Index round = 0; round < cfg.max_outer_rounds; ++round) {
    const double round_start = obj;

    // alpha step
    const GramKernel k = combine_kernels(kernels, model.theta);
    const ManifoldMatrix h = combine_manifolds(manifolds, model.beta);
    Vector alpha_cand;
    if (cfg.loss == LossKind::squared)
      alpha_cand = fit_kls(k.matrix, h.matrix, y_labeled, l, cfg).alpha;
    else
      alpha_cand = fit_svm_nesterov(k.matrix, h.matrix, y_labeled, l, cfg).alpha;
    const double obj_alpha =
        full_objective(alpha_cand, model.theta, model.beta, kernels, manifolds, y_labeled, l, cfg);
    if (obj_alpha <= obj) model.alpha = alpha_cand;
    record(std::min(obj, obj_alpha));

    // theta step
    if (nv > 1) {
      const ManifoldMatrix h2 = combine_manifolds(manifolds, model.beta);
      const SimplexWeights theta_cand =
          solve_theta(model.alpha, kernels, h2.matrix, y_labeled, l, cfg, model.theta);
      const double obj_theta = full_objective(model.alpha, theta_cand, model.beta, kernels,
                                              manifolds, y_labeled, l, cfg);
      if (obj_theta <= obj) model.theta = theta_cand;
      record(std::min(obj, obj_theta));

      // beta step (closed form, exact minimizer of its block)
      const GramKernel k2 = combine_kernels(kernels, model.theta);
      const SimplexWeights beta_cand = solve_beta(model.alpha, k2.matrix, manifolds, cfg);
      const double obj_beta = full_objective(model.alpha, model.theta, beta_cand, kernels,
                                             manifolds, y_labeled, l, cfg);
      if (obj_beta <= obj) model.beta = beta_cand;
      record(std::min(obj, obj_beta));
    } else {
      record(obj);
      record(obj);
    }

    if (round_start - obj <= cfg.tol_outer * std::max(1.0, std::abs(round_start))) break;
  }
  return model;
}

/// f(x) = sum_i alpha_i sum_k theta_k K^k(x_i, x) for each test row.
inline Vector predict(const TrainedModel& model, const std::vector<Matrix>& test_views,
                      const std::vector<Matrix>& train_views) {
  if (test_views.size() != train_views.size() ||
      test_views.size() != model.kernel_specs.size())
    throw Error("solvers", "view count mismatch in predict");
  Vector scores;
  for (std::size_t v = 0; v < test_views.size(); ++v) {
    if (test_views[v].cols() != train_views[v].cols())
      throw Error("solvers", "feature width mismatch in view " + std::to_string(v));
    Matrix cross = gram_cross(test_views[v], train_views[v], model.kernel_specs[v]);
    if (v < model.kernel_scales.size() && model.kernel_scales[v] > 0)
      cross /= model.kernel_scales[v];
    const Vector part = model.theta[static_cast<Index>(v)] * (cross * model.alpha);
    scores = (v == 0) ? part : Vector(scores + part);
  }
  return scores;
}

}  // namespace mhr
