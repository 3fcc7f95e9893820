#ifndef CMESYNTH_SIM_HPP
#define CMESYNTH_SIM_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <random>
#include <vector>

#include "cmesynth/dataset.hpp"
#include "cmesynth/partition.hpp"
#include "cmesynth/rdp.hpp"

namespace cmesynth {

/// Independent random stream for a (seed, a, b) triple.
std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t a, std::uint64_t b);

/// Thermostat-style affine system, applied per coordinate:
///   x+ = x + b (x_e - x) + c u (x_h - x) + w,  w ~ N(0, sigma^2),
/// with w redrawn until x+ lies in the domain.
struct SystemModel {
  double b = 0.06;
  double c = 0.04;
  double x_e = 15.0;
  double x_h = 45.0;
  double sigma = 0.15;
  std::vector<double> controls{0.0, 1.0};
  Box domain{Eigen::VectorXd::Constant(1, 17.5), Eigen::VectorXd::Constant(1, 23.5)};
  int max_rejections = 10000;

  void validate() const;
  [[nodiscard]] std::size_t num_actions() const { return controls.size(); }
  [[nodiscard]] Eigen::VectorXd mean(const Eigen::VectorXd& x, std::size_t action) const;

  /// One transition. Throws ErrorKind::Model when no admissible noise is found
  /// within max_rejections draws.
  Eigen::VectorXd step(const Eigen::VectorXd& x, std::size_t action, std::mt19937_64& rng) const;
};

struct GridPromptedSpec {
  Eigen::MatrixXd prompts;  // dim x M
  long per_prompt = 1;      // N successors per prompt
};

struct DistributionSpec {
  long samples = 1;  // N, inputs uniform on the domain
};

Dataset gen_grid_dataset(const SystemModel& m, const GridPromptedSpec& spec, std::uint64_t seed, int workers);
Dataset gen_uniform_dataset(const SystemModel& m, const DistributionSpec& spec, std::uint64_t seed, int workers);

/// Wilson score interval at confidence level `level`.
std::pair<double, double> wilson_interval(std::size_t successes, std::size_t runs, double level);

struct ValidationRow {
  double p_hat = 0;
  double ci_low = 0;
  double ci_high = 0;
  std::size_t runs = 0;
  std::size_t successes = 0;
};

/// Is the trajectory a success for the task? Reach-avoid: some x_t in X_reach with
/// every earlier state in X_safe. Safety: all of x_0..x_H in X_safe.
bool satisfies(const ReachAvoidSpec& spec, const Task& task, const std::vector<Eigen::VectorXd>& states);

struct MonteCarloOptions {
  std::size_t runs_per_state = 500;
  std::size_t step_cap = 0;  // reach-avoid truncation; 0 means 10 |S|
  double level = 0.99;
  std::uint64_t seed = 0;
  int workers = 1;
};

/// Runs from each region center under the refined policy; truncated reach-avoid runs count as failures.
std::vector<ValidationRow> monte_carlo(const SystemModel& m, const ContinuousPolicy& policy, const Task& task,
                                       const MonteCarloOptions& options);

/// `region_id,p_hat,ci_low,ci_high,runs`
void write_validation_csv(const std::vector<ValidationRow>& rows, const std::filesystem::path& path);

}  // namespace cmesynth

#endif  // CMESYNTH_SIM_HPP
