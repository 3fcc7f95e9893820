#ifndef CMESYNTH_RDP_HPP
#define CMESYNTH_RDP_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "cmesynth/abstraction.hpp"
#include "cmesynth/qclp.hpp"

namespace cmesynth {

/// Unbounded reach-avoid, or stay in X_safe for `horizon` steps.
struct Task {
  enum class Kind { ReachAvoid, Safety };
  Kind kind = Kind::ReachAvoid;
  int horizon = 0;

  static Task reach_avoid() { return {Kind::ReachAvoid, 0}; }
  static Task safety(int horizon) { return {Kind::Safety, horizon}; }
  [[nodiscard]] bool is_safety() const { return kind == Kind::Safety; }
};

std::string to_string(const Task& task);

struct RdpOptions {
  double conv_tol = 1e-6;
  int max_sweeps = 500;
  QclpOptions<double> qclp;
  int workers = 1;
};

/// Tie-break applied at a state when choosing its action.
enum class TieRule : std::uint8_t { None, Progress, LowestIndex };

struct RdpResult {
  Eigen::VectorXd p_lower;                       // per state
  std::vector<std::vector<std::size_t>> greedy;  // greedy[k][s]: maximizing action in sweep k + 1
  std::vector<std::vector<TieRule>> ties;        // safety only: tie rule used for greedy[k][s]
  std::vector<double> residuals;                 // sup-norm change per sweep
  int sweeps = 0;
  std::size_t uncertified_solves = 0;            // inner solves that stopped on their budget
};

/// Pessimistic value iteration with the inner minimum over each ambiguity set.
///
/// Reach-avoid starts from the reach indicator and keeps the running max, so every
/// iterate is a lower bound; it stops once the sup-norm change drops below conv_tol
/// or after max_sweeps. Safety starts from 1 on all regions and runs exactly
/// `horizon` sweeps keeping the running min.
RdpResult robust_value_iteration(const Umdp& u, const Task& task, const RdpOptions& options);

struct Policy {
  Task task;
  // Stationary: one row. Safety: row t is the action map at time t (t = 0..H-1).
  std::vector<std::vector<std::size_t>> table;
  std::vector<TieRule> ties;  // per state, for the row at t = 0
  std::size_t default_action = 0;

  [[nodiscard]] std::size_t action(std::size_t state, std::size_t t = 0) const;
  [[nodiscard]] std::size_t num_states() const { return table.empty() ? 0 : table.front().size(); }
};

/// Greedy actions under p_lower. Ties (within conv_tol) go to the larger one-step
/// value from the initial vector, then to the lowest action index. Safety tasks
/// take the time-varying table from the per-sweep greedy actions.
Policy extract_policy(const Umdp& u, const Task& task, const RdpResult& lower, const RdpOptions& options);

struct UpperResult {
  Eigen::VectorXd p_upper;
  std::vector<double> residuals;
  int sweeps = 0;
};

/// Fixed-policy value iteration with the inner maximum. Reach-avoid returns the
/// last iterate plus conv_tol (clamped to 1).
UpperResult optimistic_bound(const Umdp& u, const Policy& policy, const RdpOptions& options);

/// pi_x(x) = pi_s(s) for the region s containing x.
class ContinuousPolicy {
 public:
  ContinuousPolicy(Policy policy, Partition partition) : policy_(std::move(policy)), partition_(std::move(partition)) {}

  /// Throws ErrorKind::Domain outside X.
  [[nodiscard]] std::size_t operator()(const Eigen::VectorXd& x, std::size_t t = 0) const {
    return policy_.action(partition_.locate(x), t);
  }
  [[nodiscard]] const Policy& policy() const { return policy_; }
  [[nodiscard]] const Partition& partition() const { return partition_; }

 private:
  Policy policy_;
  Partition partition_;
};

ContinuousPolicy refine(const Policy& policy, const Partition& p);

/// `region_id,center_0..,label,action,p_lower,p_upper`; the last row is s_avoid.
void write_results_csv(const Umdp& u, const Policy& policy, const Eigen::VectorXd& p_lower,
                       const Eigen::VectorXd& p_upper, const std::filesystem::path& path);

/// `t,region_id,action,tie_rule` for every time slice of the policy.
void write_policy_csv(const Policy& policy, const std::filesystem::path& path);

}  // namespace cmesynth

#endif  // CMESYNTH_RDP_HPP
