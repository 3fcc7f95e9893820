#ifndef CMESYNTH_LIPSCHITZ_HPP
#define CMESYNTH_LIPSCHITZ_HPP

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

#include "cmesynth/partition.hpp"

namespace cmesynth {

struct LipschitzMaxOptions {
  double tol = 1e-3;           // stop when certified upper - best found <= tol
  std::size_t budget = 2000;   // probe evaluations per job
  std::size_t per_round = 8;   // probes proposed per job per round
};

struct LipschitzMaxResult {
  double upper = 0;   // certified: f(x) <= upper on the whole box
  double best = 0;    // largest certified lower value seen at a probe
  Eigen::VectorXd argbest;
  std::size_t probes = 0;
  bool certified = false;  // false when the budget ran out before reaching tol
};

/// Maximizes a function f >= 0 over a box given its Lipschitz constant and
/// f(anchor) = 0 at a known point of the box.
///
/// 1-D boxes use the Piyavskii–Shubert sawtooth bound on sorted probes; higher
/// dimensions use branch and bound on sub-boxes, bounding each leaf by
/// f(center) + L * radius and splitting the widest side. Every bound is also
/// capped by the cone L |x - anchor|. Probes are handed out in rounds
/// (propose / accept) so that many jobs can share one batched evaluation;
/// evaluations report a lower and an upper value for f at each probe.
class LipschitzMaximizer {
 public:
  LipschitzMaximizer(Box box, Eigen::VectorXd anchor, double lipschitz, LipschitzMaxOptions options);

  [[nodiscard]] bool done() const { return done_; }

  /// Up to options.per_round new probe points, one per column.
  Eigen::MatrixXd propose();

  /// Reports values for the points returned by the last propose().
  void accept(const Eigen::VectorXd& lower, const Eigen::VectorXd& upper);

  [[nodiscard]] LipschitzMaxResult result() const;
  [[nodiscard]] double current_upper() const;

 private:
  struct Probe {
    double x;
    double upper;
  };
  struct Leaf {
    Box box;
    double value_upper;
    double bound;
  };

  double cone(const Eigen::VectorXd& x) const;
  double cone(const Box& b) const;
  void refresh_done();

  Box box_;
  Eigen::VectorXd anchor_;
  double lipschitz_;
  LipschitzMaxOptions options_;
  bool one_dim_;
  bool done_ = false;
  std::size_t probes_ = 0;
  double best_ = 0;
  Eigen::VectorXd argbest_;

  std::vector<Probe> points_;  // 1-D, sorted by x
  std::vector<Leaf> leaves_;   // n-D
  Eigen::MatrixXd pending_;
  std::vector<std::size_t> pending_parent_;
};

/// Drives a set of maximizers to completion. `eval(points, owners)` receives all
/// probes of one round (owners[j] is the job index of column j) and returns
/// (lower, upper) values per column.
template <typename BatchEval>
void maximize_all(std::vector<LipschitzMaximizer>& jobs, BatchEval&& eval) {
  while (true) {
    std::vector<Eigen::MatrixXd> proposals(jobs.size());
    Eigen::Index total = 0;
    for (std::size_t j = 0; j < jobs.size(); ++j) {
      if (jobs[j].done()) continue;
      proposals[j] = jobs[j].propose();
      total += proposals[j].cols();
    }
    if (total == 0) return;
    Eigen::Index dim = 0;
    for (const auto& p : proposals)
      if (p.cols() > 0) dim = p.rows();
    Eigen::MatrixXd points(dim, total);
    std::vector<std::size_t> owners;
    owners.reserve(static_cast<std::size_t>(total));
    Eigen::Index col = 0;
    for (std::size_t j = 0; j < jobs.size(); ++j) {
      if (proposals[j].cols() == 0) continue;
      points.middleCols(col, proposals[j].cols()) = proposals[j];
      col += proposals[j].cols();
      owners.insert(owners.end(), static_cast<std::size_t>(proposals[j].cols()), j);
    }
    const auto [lower, upper] = eval(points, owners);
    col = 0;
    for (std::size_t j = 0; j < jobs.size(); ++j) {
      const Eigen::Index m = proposals[j].cols();
      if (m == 0) continue;
      jobs[j].accept(lower.segment(col, m), upper.segment(col, m));
      col += m;
    }
  }
}

}  // namespace cmesynth

#endif  // CMESYNTH_LIPSCHITZ_HPP
