#ifndef CMESYNTH_DATASET_HPP
#define CMESYNTH_DATASET_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace cmesynth {

enum class SamplingMode { GridPrompted, DistributionSampled };

std::string to_string(SamplingMode mode);

/// (state, next state) pairs for one control. Points are columns.
struct ActionSamples {
  Eigen::MatrixXd inputs;
  Eigen::MatrixXd successors;

  [[nodiscard]] Eigen::Index size() const { return inputs.cols(); }
};

struct DatasetMeta {
  SamplingMode mode = SamplingMode::DistributionSampled;
  std::uint64_t seed = 0;
  std::string source = "unspecified";
};

/// Per-action transition samples. Actions are indexed 0..|U|-1.
struct Dataset {
  int dim = 0;
  std::vector<ActionSamples> actions;
  DatasetMeta meta;

  /// Throws ErrorKind::Input unless every action has N >= 1 pairs of matching dimension.
  void validate() const;

  [[nodiscard]] std::size_t num_actions() const { return actions.size(); }
};

/// CSV with header `action,x_0..x_{n-1},xnext_0..xnext_{n-1}`, rows grouped by action.
void write_dataset_csv(const Dataset& data, const std::filesystem::path& path);

/// Reads the CSV written by write_dataset_csv. Action labels must be 0..|U|-1.
Dataset read_dataset_csv(const std::filesystem::path& path);

}  // namespace cmesynth

#endif  // CMESYNTH_DATASET_HPP
