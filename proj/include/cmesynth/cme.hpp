#ifndef CMESYNTH_CME_HPP
#define CMESYNTH_CME_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "cmesynth/dataset.hpp"
#include "cmesynth/error.hpp"
#include "cmesynth/kernel.hpp"
#include "cmesynth/parallel.hpp"

namespace cmesynth {

/// Pivoted (incomplete) Cholesky of a Gaussian Gram matrix: K = G G^T + R, R PSD.
///
/// Only the pivot columns of K are ever formed. Stops once the largest residual
/// diagonal entry drops to `tol` or the factor is full rank.
template <typename Scalar>
struct LowRankGram {
  MatrixX<Scalar> factor;     // N x r
  Scalar residual_trace = 0;  // tr(R) >= lambda_max(R)

  static LowRankGram compute(const GaussianKernel<Scalar>& k, const PointSet<Scalar>& points, Scalar tol) {
    const Eigen::Index n = points.cols();
    LowRankGram out;
    VectorX<Scalar> diag = VectorX<Scalar>::Constant(n, k.variance());
    std::vector<MatrixX<Scalar>> cols;
    MatrixX<Scalar> g(n, std::min<Eigen::Index>(n, 64));
    Eigen::Index rank = 0;
    while (rank < n) {
      Eigen::Index pivot = 0;
      const Scalar dmax = diag.maxCoeff(&pivot);
      if (dmax <= tol) break;
      if (rank == g.cols()) g.conservativeResize(n, std::min<Eigen::Index>(n, 2 * g.cols()));
      VectorX<Scalar> col = kernel_column(k, points, points.col(pivot));
      if (rank > 0) col.noalias() -= g.leftCols(rank) * g.row(pivot).head(rank).transpose();
      const Scalar root = std::sqrt(dmax);
      col /= root;
      col(pivot) = root;
      g.col(rank) = col;
      diag -= col.cwiseAbs2();
      diag(pivot) = 0;
      ++rank;
    }
    out.factor = g.leftCols(rank);
    out.residual_trace = diag.cwiseMax(Scalar(0)).sum();
    return out;
  }
};

/// Empirical conditional mean embedding, one kernel ridge regression per action:
///   mu_u(x) = sum_i beta_i(x) k(., x+_i),  beta(x) = (K + N lambda I)^{-1} k_X(x).
///
/// The Cholesky factor of K + N lambda I is computed once in fit() and reused
/// by every query. The model is immutable after fit and safe to share.
template <typename Scalar = double>
class CmeModel {
 public:
  struct ActionFit {
    PointSet<Scalar> inputs;
    PointSet<Scalar> successors;
    MatrixX<Scalar> chol;                // lower triangle holds L, L L^T = K + N lambda I
    LowRankGram<Scalar> successor_gram;  // K(+,+) = G G^T + R

    [[nodiscard]] Eigen::Index size() const { return inputs.cols(); }
  };

  /// Throws ErrorKind::Regularization when K + N lambda I is not numerically positive definite.
  static CmeModel fit(const Dataset& data, const GaussianKernel<Scalar>& k, Scalar lambda) {
    data.validate();
    if (!(lambda >= 0) || !std::isfinite(lambda)) fail(ErrorKind::Input, "cme: lambda must be >= 0");
    CmeModel model(k, lambda, data.dim);
    model.fits_.reserve(data.actions.size());
    for (std::size_t a = 0; a < data.actions.size(); ++a) model.fits_.push_back(model.fit_action(data.actions[a], a));
    return model;
  }

  [[nodiscard]] const GaussianKernel<Scalar>& kernel() const { return kernel_; }
  [[nodiscard]] Scalar lambda() const { return lambda_; }
  [[nodiscard]] int dim() const { return dim_; }
  [[nodiscard]] std::size_t num_actions() const { return fits_.size(); }
  [[nodiscard]] const ActionFit& action(std::size_t a) const {
    if (a >= fits_.size()) fail(ErrorKind::Input, "cme: unknown action " + std::to_string(a));
    return fits_[a];
  }

  /// beta(x) for a single query.
  template <typename Derived>
  [[nodiscard]] VectorX<Scalar> beta(std::size_t a, const Eigen::MatrixBase<Derived>& x) const {
    const auto& f = action(a);
    VectorX<Scalar> b = kernel_column(kernel_, f.inputs, x);
    solve_in_place(f, b);
    return b;
  }

  /// beta for many queries at once, one column per query point (N x m).
  [[nodiscard]] MatrixX<Scalar> beta(std::size_t a, const PointSet<Scalar>& queries) const {
    const auto& f = action(a);
    if (queries.rows() != dim_) fail(ErrorKind::Input, "cme: query dimension mismatch");
    MatrixX<Scalar> b = gram(kernel_, f.inputs, queries);
    solve_in_place(f, b);
    return b;
  }

  /// Batched beta split into fixed-width column chunks over `workers` threads.
  /// The chunk width does not depend on the worker count, so results do not either.
  [[nodiscard]] MatrixX<Scalar> beta(std::size_t a, const PointSet<Scalar>& queries, int workers) const {
    constexpr Eigen::Index kChunk = 64;
    MatrixX<Scalar> out(action(a).size(), queries.cols());
    const auto chunks = static_cast<std::size_t>((queries.cols() + kChunk - 1) / kChunk);
    parallel_for(chunks, workers, [&](std::size_t c) {
      const Eigen::Index start = static_cast<Eigen::Index>(c) * kChunk;
      const Eigen::Index len = std::min(kChunk, queries.cols() - start);
      out.middleCols(start, len) = beta(a, PointSet<Scalar>(queries.middleCols(start, len)));
    });
    return out;
  }

  /// mu_u(x) as a finite measure on the training successors.
  template <typename Derived>
  [[nodiscard]] FiniteMeasure<Scalar> embed_at(std::size_t a, const Eigen::MatrixBase<Derived>& x) const {
    return FiniteMeasure<Scalar>(action(a).successors, beta(a, x));
  }

  /// Upper bound on |mu_u|_{H_K}, exact up to rounding when the successor Gram is
  /// factored to full rank.
  ///
  /// |mu|^2 = sum_ij (W K W)_ij K+_ij with W = (K + N lambda I)^{-1}. With K+ = G G^T + R
  /// the G part is evaluated exactly and tr(W K W R) <= tr(R) / (4 N lambda).
  [[nodiscard]] Scalar vrkhs_norm(std::size_t a) const {
    const auto& f = action(a);
    const auto& g = f.successor_gram.factor;
    MatrixX<Scalar> y = g;
    solve_in_place(f, y);
    const Scalar n_lambda = static_cast<Scalar>(f.size()) * lambda_;
    // W K = I - N lambda W, so y^T K y = y^T g - N lambda |y|^2 for y = W g.
    Scalar sq = (y.cwiseProduct(g)).sum() - n_lambda * y.squaredNorm();
    if (n_lambda > 0) sq += f.successor_gram.residual_trace / (Scalar(4) * n_lambda);
    return std::sqrt(std::max(sq, Scalar(0)));
  }

  /// Lipschitz constant of x -> mu_u(x) in the RKHS norm: |mu_u| sigma_f / sigma_l.
  [[nodiscard]] Scalar embedding_lipschitz(std::size_t a) const {
    return vrkhs_norm(a) * kernel_.feature_lipschitz();
  }

  /// Bounds on d^T K+ d for each column d of `deltas` (N x m): lower = |G^T d|^2,
  /// upper = lower + tr(R) |d|^2.
  [[nodiscard]] std::pair<VectorX<Scalar>, VectorX<Scalar>> successor_quadratic_bounds(
      std::size_t a, const MatrixX<Scalar>& deltas) const {
    const auto& lr = action(a).successor_gram;
    const MatrixX<Scalar> proj = lr.factor.transpose() * deltas;
    VectorX<Scalar> lower = proj.colwise().squaredNorm().transpose();
    VectorX<Scalar> upper = lower + lr.residual_trace * deltas.colwise().squaredNorm().transpose();
    return {std::move(lower), std::move(upper)};
  }

  /// Exact K+ B without materializing the N x N successor Gram.
  [[nodiscard]] MatrixX<Scalar> successor_gram_apply(std::size_t a, const MatrixX<Scalar>& b) const {
    const auto& f = action(a);
    const Eigen::Index n = f.size();
    if (b.rows() != n) fail(ErrorKind::Input, "cme: successor gram apply shape mismatch");
    MatrixX<Scalar> out(n, b.cols());
    constexpr Eigen::Index kBlock = 256;
    for (Eigen::Index start = 0; start < n; start += kBlock) {
      const Eigen::Index len = std::min(kBlock, n - start);
      const PointSet<Scalar> rows = f.successors.middleCols(start, len);
      out.middleRows(start, len).noalias() = gram(kernel_, rows, f.successors) * b;
    }
    return out;
  }

 private:
  CmeModel(const GaussianKernel<Scalar>& k, Scalar lambda, int dim) : kernel_(k), lambda_(lambda), dim_(dim) {}

  ActionFit fit_action(const ActionSamples& s, std::size_t a) const {
    ActionFit f;
    f.inputs = s.inputs.template cast<Scalar>();
    f.successors = s.successors.template cast<Scalar>();
    const Eigen::Index n = f.size();
    f.chol = gram(kernel_, f.inputs);
    const Scalar shift = static_cast<Scalar>(n) * lambda_;
    f.chol.diagonal().array() += shift;
    const Scalar max_diag = f.chol.diagonal().maxCoeff();
    Eigen::LLT<Eigen::Ref<MatrixX<Scalar>>> llt(f.chol);
    const Scalar min_pivot = f.chol.diagonal().minCoeff();
    if (llt.info() != Eigen::Success || !(min_pivot * min_pivot > Scalar(1e-14) * max_diag)) {
      fail(ErrorKind::Regularization,
           "cme: K + N*lambda*I is not positive definite for action " + std::to_string(a) +
               (lambda_ == 0 ? "; use lambda > 0 (duplicate or near-duplicate inputs)" : "; increase lambda"));
    }
    // With lambda = 0 the Lipschitz bound has no slack for a truncated factor, so factor fully.
    const Scalar tol = lambda_ > 0 ? Scalar(1e-12) * kernel_.variance() : Scalar(0);
    f.successor_gram = LowRankGram<Scalar>::compute(kernel_, f.successors, tol);
    return f;
  }

  static void solve_in_place(const ActionFit& f, MatrixX<Scalar>& b) {
    const auto lower = f.chol.template triangularView<Eigen::Lower>();
    lower.solveInPlace(b);
    lower.transpose().solveInPlace(b);
  }
  static void solve_in_place(const ActionFit& f, VectorX<Scalar>& b) {
    const auto lower = f.chol.template triangularView<Eigen::Lower>();
    lower.solveInPlace(b);
    lower.transpose().solveInPlace(b);
  }

  GaussianKernel<Scalar> kernel_;
  Scalar lambda_;
  int dim_;
  std::vector<ActionFit> fits_;
};

}  // namespace cmesynth

#endif  // CMESYNTH_CME_HPP
