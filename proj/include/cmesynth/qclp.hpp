#ifndef CMESYNTH_QCLP_HPP
#define CMESYNTH_QCLP_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "cmesynth/error.hpp"
#include "cmesynth/kernel.hpp"

namespace cmesynth {

/// The MMD ball of one (s, a) pair over center-supported distributions:
///   q(g) = g^T K1 g - 2 g^T l + c <= eps^2,  g in the simplex,
/// where l = K2 beta(c_s) and c = beta^T K3 beta. q(g) is the squared MMD between
/// sum_i g_i delta_{c_i} and the learned embedding at c_s.
template <typename Scalar = double>
struct AmbiguityData {
  std::shared_ptr<const MatrixX<Scalar>> k1;
  VectorX<Scalar> linear;
  Scalar const_term = 0;
  Scalar eps = 0;
  // Filled by prepare(): strictly positive near-minimizer of q and bounds on min q.
  VectorX<Scalar> gamma_qmin;
  Scalar q_min = 0;        // q(gamma_qmin)
  Scalar q_min_lower = 0;  // certified lower bound on min q over the simplex

  [[nodiscard]] Eigen::Index size() const { return linear.size(); }

  [[nodiscard]] Scalar quadratic(const VectorX<Scalar>& g) const {
    return g.dot(*k1 * g - Scalar(2) * linear) + const_term;
  }

  /// Half the gradient of q: K1 g - l.
  [[nodiscard]] VectorX<Scalar> half_gradient(const VectorX<Scalar>& g) const { return *k1 * g - linear; }

  void check() const {
    if (!k1) fail(ErrorKind::Input, "ambiguity data: missing K1");
    if (k1->rows() != k1->cols() || k1->rows() != linear.size())
      fail(ErrorKind::Input, "ambiguity data: K1 and linear term sizes differ");
    if (linear.size() == 0) fail(ErrorKind::Input, "ambiguity data: empty support");
    if (!(eps >= 0)) fail(ErrorKind::Input, "ambiguity data: eps must be >= 0");
  }
};

enum class Sense { Min, Max };
enum class QclpStatus { Optimal, BudgetExhausted };

inline const char* to_string(QclpStatus s) { return s == QclpStatus::Optimal ? "optimal" : "budget-exhausted-certified"; }

template <typename Scalar = double>
struct QclpOptions {
  Scalar tol_obj = Scalar(1e-6);
  Scalar tol_feas = Scalar(1e-8);
  int max_newton = 400;
  // Keep following the central path at least this far (tightens the KKT residual).
  Scalar min_barrier_t = 0;
};

template <typename Scalar = double>
struct QclpSolution {
  VectorX<Scalar> gamma;
  // Certified bound: <= the true optimum for Min, >= it for Max.
  Scalar objective = 0;
  // values^T gamma at the returned point.
  Scalar primal = 0;
  // Multiplier of the quadratic constraint for the min-form problem.
  Scalar dual_lambda = 0;
  QclpStatus status = QclpStatus::Optimal;
  int newton_steps = 0;
  // Final barrier parameter; coordinates below 1/sqrt(t) are numerically zero.
  Scalar barrier_t = 0;
};

namespace detail {

/// Newton step for a barrier on the simplex, in the scaled variables g = D z, D = diag(gamma).
/// `h` is the scaled Hessian D H D, `grad` the gradient. Returns the step in gamma space.
/// An optional `u` adds u u^T to `h` through Sherman-Morrison.
template <typename Scalar>
VectorX<Scalar> simplex_newton_step(const MatrixX<Scalar>& h, const VectorX<Scalar>& gamma,
                                    const VectorX<Scalar>& grad, const VectorX<Scalar>& u = VectorX<Scalar>()) {
  const bool rank1 = u.size() == gamma.size();
  Eigen::LLT<MatrixX<Scalar>> llt(h);
  MatrixX<Scalar> rhs(gamma.size(), rank1 ? 3 : 2);
  rhs.col(0) = -gamma.cwiseProduct(grad);
  rhs.col(1) = gamma;
  if (rank1) rhs.col(2) = u;
  MatrixX<Scalar> sol;
  if (llt.info() == Eigen::Success) {
    sol = llt.solve(rhs);
  } else {
    sol = h.ldlt().solve(rhs);
  }
  if (rank1) {
    const Scalar denom = Scalar(1) + u.dot(sol.col(2));
    for (int c = 0; c < 2; ++c) sol.col(c) -= (u.dot(sol.col(c)) / denom) * sol.col(2);
  }
  const Scalar nu = gamma.dot(sol.col(0)) / gamma.dot(sol.col(1));
  return gamma.cwiseProduct(sol.col(0) - nu * sol.col(1));
}

/// Largest step in (0, 1] keeping gamma + a d strictly positive (99% of the way to the boundary).
template <typename Scalar>
Scalar positive_step(const VectorX<Scalar>& gamma, const VectorX<Scalar>& d) {
  Scalar a = 1;
  for (Eigen::Index i = 0; i < gamma.size(); ++i)
    if (d(i) < 0) a = std::min(a, Scalar(-0.99) * gamma(i) / d(i));
  return a;
}

template <typename Scalar>
void renormalize(VectorX<Scalar>& gamma) {
  gamma /= gamma.sum();
}

}  // namespace detail

/// Certified lower bound on min w^T g over {g in simplex, q(g) <= eps^2}, from any point `at`.
///
/// With r = Phi(at) - mu (Phi g = sum g_i k(., c_i)), every feasible g satisfies
/// <Phi g - mu, r> <= eps |r|, which is linear in g. The bound is the exact value of
/// the resulting two-constraint LP, so it is valid whatever `at` is and tight when
/// `at` is optimal. Returns +inf when the relaxation is empty.
template <typename Scalar>
Scalar ball_lower_bound(const AmbiguityData<Scalar>& data, const VectorX<Scalar>& w, const VectorX<Scalar>& at) {
  const Scalar q = std::max(data.quadratic(at), Scalar(0));
  const VectorX<Scalar> d = data.half_gradient(at);
  const Scalar shift = -at.dot(data.linear) + data.const_term - data.eps * std::sqrt(q);
  const VectorX<Scalar> e = d.array() + shift;
  Scalar best = std::numeric_limits<Scalar>::infinity();
  std::vector<Eigen::Index> pos, neg;
  for (Eigen::Index i = 0; i < e.size(); ++i) {
    if (e(i) <= 0) {
      neg.push_back(i);
      best = std::min(best, w(i));
    } else {
      pos.push_back(i);
    }
  }
  // Optimal mixtures of a violating vertex i with a satisfying vertex j lie on e^T g = 0.
  for (Eigen::Index i : pos)
    for (Eigen::Index j : neg) {
      if (w(i) >= w(j)) continue;
      const Scalar ei = e(i), ej = e(j);
      best = std::min(best, (w(i) * -ej + w(j) * ei) / (ei - ej));
    }
  return best;
}

/// Minimizes q over the simplex; fills gamma_qmin, q_min and q_min_lower.
///
/// Barrier method on t q(g) - sum log g_i. Convexity gives the certificate
/// q(g') >= q(g) + min_i grad_i - grad^T g.
template <typename Scalar>
void prepare(AmbiguityData<Scalar>& data, Scalar tol = Scalar(-1), int max_newton = 400) {
  data.check();
  const Eigen::Index m = data.size();
  const MatrixX<Scalar>& k1 = *data.k1;
  const Scalar scale = std::max(k1.diagonal().maxCoeff(), std::numeric_limits<Scalar>::min());
  if (tol < 0) tol = Scalar(1e-12) * scale;
  VectorX<Scalar> gamma = VectorX<Scalar>::Constant(m, Scalar(1) / static_cast<Scalar>(m));
  auto lower_of = [&](const VectorX<Scalar>& g, Scalar q) {
    const VectorX<Scalar> grad = Scalar(2) * data.half_gradient(g);
    return std::max(q + grad.minCoeff() - grad.dot(g), Scalar(0));
  };
  Scalar q = data.quadratic(gamma);
  Scalar lower = lower_of(gamma, q);
  VectorX<Scalar> best_gamma = gamma;
  Scalar best_q = q;
  if (m == 1) {
    data.gamma_qmin = gamma;
    data.q_min = std::max(q, Scalar(0));
    data.q_min_lower = data.q_min;
    return;
  }
  Scalar t = static_cast<Scalar>(m) / std::max(q - lower, tol);
  int steps = 0;
  for (int round = 0; round < 80 && steps < max_newton && best_q - lower > tol && std::isfinite(t); ++round) {
    // Centering.
    for (int inner = 0; inner < 60 && steps < max_newton; ++inner, ++steps) {
      const VectorX<Scalar> hg = data.half_gradient(gamma);
      const VectorX<Scalar> grad = Scalar(2) * t * hg - gamma.cwiseInverse();
      MatrixX<Scalar> h = (Scalar(2) * t) * (gamma * gamma.transpose()).cwiseProduct(k1);
      h.diagonal().array() += Scalar(1);
      const VectorX<Scalar> step = detail::simplex_newton_step(h, gamma, grad);
      const Scalar dec = -grad.dot(step);
      if (!(dec > Scalar(1e-10))) break;
      auto phi = [&](const VectorX<Scalar>& g) { return t * data.quadratic(g) - g.array().log().sum(); };
      const Scalar phi0 = phi(gamma);
      Scalar a = detail::positive_step(gamma, step);
      VectorX<Scalar> next;
      int halvings = 0;
      for (; halvings < 60; ++halvings, a *= Scalar(0.5)) {
        next = gamma + a * step;
        if (phi(next) <= phi0 - Scalar(0.25) * a * dec) break;
      }
      if (halvings == 60) break;
      gamma = next;
      detail::renormalize(gamma);
    }
    q = data.quadratic(gamma);
    lower = std::max(lower, lower_of(gamma, q));
    if (q < best_q) {
      best_q = q;
      best_gamma = gamma;
    }
    t *= Scalar(10);
  }
  data.gamma_qmin = best_gamma;
  data.q_min = std::max(best_q, Scalar(0));
  data.q_min_lower = std::min(lower, data.q_min);
}

/// Minimal squared MMD from the learned embedding to a center-supported distribution.
template <typename Scalar>
Scalar min_quadratic(const AmbiguityData<Scalar>& data) {
  if (data.gamma_qmin.size() == data.size()) return data.q_min;
  AmbiguityData<Scalar> copy = data;
  prepare(copy);
  return copy.q_min;
}

/// Norm of the projection of -(w + lambda grad q) onto the tangent cone of the
/// simplex at gamma, treating coordinates below `active` as zero.
template <typename Scalar>
Scalar kkt_residual(const AmbiguityData<Scalar>& data, const VectorX<Scalar>& w, const VectorX<Scalar>& gamma,
                    Scalar lambda, Scalar active) {
  const VectorX<Scalar> y = -(w + Scalar(2) * lambda * data.half_gradient(gamma));
  const Eigen::Index m = y.size();
  // d_i = y_i - c off the active set, max(y_i - c, 0) on it; pick c with sum d = 0.
  auto sum_at = [&](Scalar c) {
    Scalar s = 0;
    for (Eigen::Index i = 0; i < m; ++i) s += gamma(i) < active ? std::max(y(i) - c, Scalar(0)) : y(i) - c;
    return s;
  };
  Scalar lo = y.minCoeff() - Scalar(1), hi = y.maxCoeff() + Scalar(1);
  for (int it = 0; it < 200; ++it) {
    const Scalar mid = Scalar(0.5) * (lo + hi);
    (sum_at(mid) > 0 ? lo : hi) = mid;
  }
  const Scalar c = Scalar(0.5) * (lo + hi);
  Scalar sq = 0;
  for (Eigen::Index i = 0; i < m; ++i) {
    const Scalar d = gamma(i) < active ? std::max(y(i) - c, Scalar(0)) : y(i) - c;
    sq += d * d;
  }
  return std::sqrt(sq);
}

/// Multiplier lambda >= 0 of the ball constraint that best explains stationarity at
/// gamma: least squares of w_i + lambda grad_i + nu over coordinates >= active.
template <typename Scalar>
Scalar fit_multiplier(const AmbiguityData<Scalar>& data, const VectorX<Scalar>& w, const VectorX<Scalar>& gamma,
                      Scalar active) {
  const VectorX<Scalar> g = Scalar(2) * data.half_gradient(gamma);
  Scalar n = 0, sw = 0, sg = 0, sgg = 0, sgw = 0;
  for (Eigen::Index i = 0; i < gamma.size(); ++i) {
    if (gamma(i) < active) continue;
    n += 1;
    sw += w(i);
    sg += g(i);
    sgg += g(i) * g(i);
    sgw += g(i) * w(i);
  }
  if (n < 2) return 0;
  // Centered regression of -w on g.
  const Scalar var = sgg - sg * sg / n;
  if (!(var > 0)) return 0;
  return std::max(-(sgw - sg * sw / n) / var, Scalar(0));
}

template <typename Scalar = double>
struct QclpProblem {
  VectorX<Scalar> values;
  const AmbiguityData<Scalar>* data = nullptr;
  Sense sense = Sense::Min;
  QclpOptions<Scalar> options;
};

/// Optimizes values^T g over the simplex intersected with the MMD ball.
///
/// Primal barrier method on t w^T g - sum log g_i - log(eps^2 - q(g)), stopped by
/// ball_lower_bound rather than by the barrier gap, so the reported objective is a
/// certified bound (lower for Min, upper for Max) regardless of convergence.
/// Throws ErrorKind::Infeasible when the ball misses the simplex.
template <typename Scalar>
QclpSolution<Scalar> solve(const QclpProblem<Scalar>& problem) {
  if (!problem.data) fail(ErrorKind::Input, "qclp: missing ambiguity data");
  const AmbiguityData<Scalar>& data = *problem.data;
  data.check();
  const Eigen::Index m = data.size();
  if (problem.values.size() != m) fail(ErrorKind::Input, "qclp: values and ambiguity data sizes differ");
  if (data.gamma_qmin.size() != m) fail(ErrorKind::Input, "qclp: ambiguity data not prepared");
  const auto& opt = problem.options;
  const bool max_sense = problem.sense == Sense::Max;
  const VectorX<Scalar> w = max_sense ? VectorX<Scalar>(-problem.values) : problem.values;
  const Scalar eps2 = data.eps * data.eps;
  const MatrixX<Scalar>& k1 = *data.k1;

  if (data.q_min_lower > eps2)
    fail(ErrorKind::Infeasible, "qclp: ambiguity set is empty (min squared MMD " + std::to_string(data.q_min_lower) +
                                    " > eps^2 " + std::to_string(eps2) + ")");

  QclpSolution<Scalar> sol;
  auto finish = [&](VectorX<Scalar> gamma, Scalar lower_w, QclpStatus status) {
    sol.gamma = std::move(gamma);
    const Scalar pw = w.dot(sol.gamma);
    // A feasible point bounds the optimum from above, so the lower bound can be capped by it.
    const bool feasible = data.quadratic(sol.gamma) <= eps2 * (Scalar(1) + opt.tol_feas);
    if (feasible) lower_w = std::min(lower_w, pw);
    sol.primal = max_sense ? -pw : pw;
    sol.objective = max_sense ? -lower_w : lower_w;
    sol.status = status;
    return sol;
  };

  // Lowest-index minimizer of w.
  Eigen::Index best_vertex = 0;
  for (Eigen::Index i = 1; i < m; ++i)
    if (w(i) < w(best_vertex)) best_vertex = i;
  const Scalar w_min = w(best_vertex);

  if (w.maxCoeff() - w_min <= Scalar(0)) return finish(data.gamma_qmin, w_min, QclpStatus::Optimal);

  // Ball contains the simplex when it contains every vertex.
  {
    const VectorX<Scalar> vertex_q =
        k1.diagonal() - Scalar(2) * data.linear + VectorX<Scalar>::Constant(m, data.const_term);
    if (vertex_q.maxCoeff() <= eps2) return finish(VectorX<Scalar>::Unit(m, best_vertex), w_min, QclpStatus::Optimal);
  }

  const Scalar slack0 = eps2 - data.q_min;
  if (m == 1 || !(slack0 > opt.tol_feas * std::max(eps2, k1.diagonal().maxCoeff() * Scalar(1e-12)))) {
    // (Near-)degenerate ball: the minimizer of q is essentially the only feasible point.
    const Scalar lb = ball_lower_bound(data, w, data.gamma_qmin);
    return finish(data.gamma_qmin, lb, w.dot(data.gamma_qmin) - lb <= opt.tol_obj ? QclpStatus::Optimal
                                                                                   : QclpStatus::BudgetExhausted);
  }

  // Strictly feasible interior start.
  VectorX<Scalar> gamma;
  for (Scalar theta = Scalar(0.5);; theta *= Scalar(0.5)) {
    gamma = (Scalar(1) - theta) * data.gamma_qmin + VectorX<Scalar>::Constant(m, theta / static_cast<Scalar>(m));
    if (data.quadratic(gamma) < eps2 - Scalar(0.5) * slack0 || theta < Scalar(1e-12)) break;
  }
  if (!(data.quadratic(gamma) < eps2) || (gamma.array() <= 0).any()) {
    gamma = data.gamma_qmin;
  }

  Scalar best_lower = ball_lower_bound(data, w, gamma);
  VectorX<Scalar> best_gamma = gamma;
  Scalar best_primal = w.dot(gamma);
  Scalar t = static_cast<Scalar>(m + 1) / std::max(best_primal - std::min(best_lower, best_primal), opt.tol_obj);
  Scalar s = eps2 - data.quadratic(gamma);
  int steps = 0;
  bool converged = false;
  auto phi = [&](const VectorX<Scalar>& g, Scalar& slack) {
    slack = eps2 - data.quadratic(g);
    if (!(slack > 0) || (g.array() <= 0).any()) return std::numeric_limits<Scalar>::infinity();
    return t * w.dot(g) - g.array().log().sum() - std::log(slack);
  };

  for (int round = 0; round < 80 && steps < opt.max_newton && std::isfinite(t); ++round) {
    for (int inner = 0; inner < 100 && steps < opt.max_newton; ++inner, ++steps) {
      const VectorX<Scalar> g = Scalar(2) * data.half_gradient(gamma);
      const VectorX<Scalar> grad = t * w - gamma.cwiseInverse() + g / s;
      const VectorX<Scalar> dg = gamma.cwiseProduct(g);
      MatrixX<Scalar> h = (Scalar(2) / s) * (gamma * gamma.transpose()).cwiseProduct(k1);
      h.diagonal().array() += Scalar(1);
      // The rank-one part scales like 1/s^2; folding it into the factorization loses the direction near the ball.
      const VectorX<Scalar> step = detail::simplex_newton_step(h, gamma, grad, VectorX<Scalar>(dg / s));
      const Scalar dec = -grad.dot(step);
      if (!(dec > Scalar(1e-10))) break;
      Scalar slack0_ = 0;
      const Scalar phi0 = phi(gamma, slack0_);
      Scalar a = detail::positive_step(gamma, step);
      VectorX<Scalar> next;
      Scalar next_s = 0;
      int halvings = 0;
      for (; halvings < 60; ++halvings, a *= Scalar(0.5)) {
        next = gamma + a * step;
        detail::renormalize(next);
        if (phi(next, next_s) <= phi0 - Scalar(0.25) * a * dec) break;
      }
      if (halvings == 60) break;
      gamma = next;
      s = next_s;
    }
    const Scalar lower = ball_lower_bound(data, w, gamma);
    const Scalar primal = w.dot(gamma);
    if (lower > best_lower) best_lower = lower;
    if (primal < best_primal) {
      best_primal = primal;
      best_gamma = gamma;
    }
    if (best_primal - best_lower <= opt.tol_obj && t >= opt.min_barrier_t) {
      converged = true;
      break;
    }
    t *= Scalar(8);
  }
  sol.newton_steps = steps;
  sol.barrier_t = t;
  sol.dual_lambda = fit_multiplier(data, w, best_gamma, Scalar(1) / std::sqrt(t));
  if (!converged) {
    // The last iterate may certify better than the best primal point.
    best_lower = std::max(best_lower, ball_lower_bound(data, w, best_gamma));
  }
  return finish(best_gamma, best_lower, converged ? QclpStatus::Optimal : QclpStatus::BudgetExhausted);
}

}  // namespace cmesynth

#endif  // CMESYNTH_QCLP_HPP
