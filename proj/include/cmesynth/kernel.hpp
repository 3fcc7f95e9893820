#ifndef CMESYNTH_KERNEL_HPP
#define CMESYNTH_KERNEL_HPP

#include <Eigen/Dense>

#include <cmath>
#include <string>

#include "cmesynth/error.hpp"

namespace cmesynth {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// A set of points in R^n, stored one point per column.
template <typename Scalar>
using PointSet = MatrixX<Scalar>;

/// Gaussian kernel k(x, y) = sigma_f^2 exp(-|x - y|^2 / (2 sigma_l^2)).
///
/// This is the only kernel the library ships. The closed-form bounds in
/// errbounds (snapping radius, Lipschitz constants) assume it.
template <typename Scalar = double>
class GaussianKernel {
 public:
  GaussianKernel(Scalar sigma_f, Scalar sigma_l) : sigma_f_(sigma_f), sigma_l_(sigma_l) {
    if (!(sigma_f > 0) || !(sigma_l > 0) || !std::isfinite(sigma_f) || !std::isfinite(sigma_l))
      fail(ErrorKind::Input, "kernel parameters must be finite and positive");
    inv_two_l2_ = Scalar(1) / (Scalar(2) * sigma_l * sigma_l);
  }

  [[nodiscard]] Scalar sigma_f() const { return sigma_f_; }
  [[nodiscard]] Scalar sigma_l() const { return sigma_l_; }
  /// k(x, x).
  [[nodiscard]] Scalar variance() const { return sigma_f_ * sigma_f_; }
  /// sigma_f / sigma_l; the feature map is Lipschitz with this constant.
  [[nodiscard]] Scalar feature_lipschitz() const { return sigma_f_ / sigma_l_; }

  [[nodiscard]] Scalar from_squared_distance(Scalar d2) const {
    return variance() * std::exp(-d2 * inv_two_l2_);
  }

  template <typename DerivedX, typename DerivedY>
  [[nodiscard]] Scalar operator()(const Eigen::MatrixBase<DerivedX>& x,
                                  const Eigen::MatrixBase<DerivedY>& y) const {
    if (x.size() != y.size()) fail(ErrorKind::Input, "kernel: dimension mismatch");
    Scalar d2 = 0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const Scalar d = x(i) - y(i);
      d2 += d * d;
    }
    return from_squared_distance(d2);
  }

  /// |k(., x) - k(., y)|_H for points at Euclidean distance `dist`.
  [[nodiscard]] Scalar feature_distance(Scalar dist) const {
    const Scalar z = dist * dist * inv_two_l2_;
    return std::sqrt(Scalar(2) * variance() * -std::expm1(-z));
  }

 private:
  Scalar sigma_f_;
  Scalar sigma_l_;
  Scalar inv_two_l2_;
};

/// Gram matrix G(i, j) = k(rows.col(i), cols.col(j)).
template <typename Scalar>
MatrixX<Scalar> gram(const GaussianKernel<Scalar>& k, const PointSet<Scalar>& rows,
                     const PointSet<Scalar>& cols) {
  if (rows.cols() == 0 || cols.cols() == 0) fail(ErrorKind::Input, "gram: empty point list");
  if (rows.rows() != cols.rows()) fail(ErrorKind::Input, "gram: dimension mismatch");
  MatrixX<Scalar> g(rows.cols(), cols.cols());
  const Eigen::Index dim = rows.rows();
  for (Eigen::Index j = 0; j < cols.cols(); ++j) {
    for (Eigen::Index i = 0; i < rows.cols(); ++i) {
      Scalar d2 = 0;
      for (Eigen::Index d = 0; d < dim; ++d) {
        const Scalar diff = rows(d, i) - cols(d, j);
        d2 += diff * diff;
      }
      g(i, j) = k.from_squared_distance(d2);
    }
  }
  return g;
}

/// Gram matrix of a point set against itself; exactly symmetric with sigma_f^2 on the diagonal.
template <typename Scalar>
MatrixX<Scalar> gram(const GaussianKernel<Scalar>& k, const PointSet<Scalar>& points) {
  if (points.cols() == 0) fail(ErrorKind::Input, "gram: empty point list");
  const Eigen::Index n = points.cols();
  const Eigen::Index dim = points.rows();
  MatrixX<Scalar> g(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    g(j, j) = k.variance();
    for (Eigen::Index i = j + 1; i < n; ++i) {
      Scalar d2 = 0;
      for (Eigen::Index d = 0; d < dim; ++d) {
        const Scalar diff = points(d, i) - points(d, j);
        d2 += diff * diff;
      }
      g(i, j) = g(j, i) = k.from_squared_distance(d2);
    }
  }
  return g;
}

/// Kernel column k_X(x) = [k(x, X_1), ..., k(x, X_N)]^T.
template <typename Scalar, typename Derived>
VectorX<Scalar> kernel_column(const GaussianKernel<Scalar>& k, const PointSet<Scalar>& points,
                              const Eigen::MatrixBase<Derived>& x) {
  if (points.rows() != x.size()) fail(ErrorKind::Input, "kernel column: dimension mismatch");
  VectorX<Scalar> out(points.cols());
  for (Eigen::Index i = 0; i < points.cols(); ++i) out(i) = k(points.col(i), x);
  return out;
}

/// Finitely supported signed measure sum_i w_i delta_{atoms_i}.
template <typename Scalar = double>
struct FiniteMeasure {
  PointSet<Scalar> atoms;
  VectorX<Scalar> weights;

  FiniteMeasure() = default;
  FiniteMeasure(PointSet<Scalar> a, VectorX<Scalar> w) : atoms(std::move(a)), weights(std::move(w)) {
    if (atoms.cols() != weights.size())
      fail(ErrorKind::Input, "finite measure: atom and weight counts differ");
  }

  template <typename Derived>
  static FiniteMeasure dirac(const Eigen::MatrixBase<Derived>& x) {
    return FiniteMeasure(PointSet<Scalar>(x), VectorX<Scalar>::Ones(1));
  }

  [[nodiscard]] Eigen::Index dim() const { return atoms.rows(); }
  [[nodiscard]] Eigen::Index size() const { return atoms.cols(); }
};

namespace detail {

template <typename Scalar>
Scalar embedding_inner(const GaussianKernel<Scalar>& k, const FiniteMeasure<Scalar>& p,
                       const FiniteMeasure<Scalar>& q) {
  Scalar acc = 0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    Scalar row = 0;
    for (Eigen::Index j = 0; j < q.size(); ++j) row += q.weights(j) * k(p.atoms.col(i), q.atoms.col(j));
    acc += p.weights(i) * row;
  }
  return acc;
}

}  // namespace detail

/// <Psi(P), Psi(Q)> in the RKHS.
template <typename Scalar>
Scalar embedding_inner(const GaussianKernel<Scalar>& k, const FiniteMeasure<Scalar>& p,
                       const FiniteMeasure<Scalar>& q) {
  if (p.size() > 0 && q.size() > 0 && p.dim() != q.dim())
    fail(ErrorKind::Input, "embedding inner product: dimension mismatch");
  // Average both summation orders so the result is symmetric bit-for-bit.
  return Scalar(0.5) * (detail::embedding_inner(k, p, q) + detail::embedding_inner(k, q, p));
}

/// Maximum mean discrepancy |Psi(P) - Psi(Q)|_H.
///
/// Cancellation can leave a slightly negative radicand; values down to -1e-12
/// (relative to sigma_f^2 (|w_P|_1 + |w_Q|_1)^2) are clamped to zero, and
/// anything below -1e-9 on that scale is reported as a numerical error.
template <typename Scalar>
Scalar mmd(const GaussianKernel<Scalar>& k, const FiniteMeasure<Scalar>& p,
           const FiniteMeasure<Scalar>& q) {
  if (p.size() > 0 && q.size() > 0 && p.dim() != q.dim())
    fail(ErrorKind::Input, "mmd: dimension mismatch");
  const Scalar pp = detail::embedding_inner(k, p, p);
  const Scalar qq = detail::embedding_inner(k, q, q);
  const Scalar pq = embedding_inner(k, p, q);
  const Scalar radicand = (pp + qq) - Scalar(2) * pq;
  if (radicand >= 0) return std::sqrt(radicand);
  const Scalar mass = p.weights.cwiseAbs().sum() + q.weights.cwiseAbs().sum();
  const Scalar scale = k.variance() * std::max(mass * mass, Scalar(1));
  if (radicand < Scalar(-1e-9) * scale)
    fail(ErrorKind::Numerical, "mmd: negative squared distance " + std::to_string(radicand));
  return 0;
}

}  // namespace cmesynth

#endif  // CMESYNTH_KERNEL_HPP
