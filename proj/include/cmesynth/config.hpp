#ifndef CMESYNTH_CONFIG_HPP
#define CMESYNTH_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cmesynth/errbounds.hpp"
#include "cmesynth/partition.hpp"
#include "cmesynth/rdp.hpp"
#include "cmesynth/sim.hpp"

namespace cmesynth {

/// Everything one pipeline run needs. Defaults reproduce the temperature
/// benchmark: X = [17.5, 23.5], X_safe = [19, 22], sigma_f = 10, sigma_l = 1,
/// lambda = 0.001, N = 7000 per control, 15-step safety, 500 runs per state.
struct RunConfig {
  double sigma_f = 10.0;
  double sigma_l = 1.0;
  double lambda = 0.001;

  ReachAvoidSpec spec{Box(Eigen::VectorXd::Constant(1, 17.5), Eigen::VectorXd::Constant(1, 23.5)),
                      Box(Eigen::VectorXd::Constant(1, 19.0), Eigen::VectorXd::Constant(1, 22.0)),
                      Box(Eigen::VectorXd::Constant(1, 20.25), Eigen::VectorXd::Constant(1, 20.75))};
  std::vector<int> cells{68};

  BudgetMode budget_mode = BudgetMode::PerRegion;
  std::optional<double> eps1 = 0.09;     // user value; theorem when empty
  std::optional<double> field_lipschitz; // L for the theorem; derived from the model when unset
  double delta = 0.05;
  LipschitzMaxOptions eps2;

  RdpOptions rdp;
  Task task = Task::safety(15);

  SystemModel model;
  SamplingMode mode = SamplingMode::DistributionSampled;
  long samples = 7000;                   // N per control (per prompt in grid mode)
  std::uint64_t seed = 1;
  std::size_t runs_per_state = 500;
  std::size_t step_cap = 0;
  double level = 0.99;
  std::uint64_t mc_seed = 2;

  std::filesystem::path out_dir = "out";
  int workers = 1;
};

/// Parses a `[section]` / `key = value` file. Unknown sections or keys, and
/// values that fail to parse, throw ErrorKind::Config naming the key.
RunConfig load_config(const std::filesystem::path& path);
RunConfig parse_config(const std::string& text);

/// The config as `[section]` / `key = value` text (round-trips through parse_config).
std::string dump_config(const RunConfig& c);

}  // namespace cmesynth

#endif  // CMESYNTH_CONFIG_HPP
