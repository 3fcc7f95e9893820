#ifndef CMESYNTH_PIPELINE_HPP
#define CMESYNTH_PIPELINE_HPP

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cmesynth/config.hpp"

namespace cmesynth {

enum class Stage { GenData, Fit, Abstract, Synthesize, Validate, Report };

inline constexpr Stage kAllStages[] = {Stage::GenData,    Stage::Fit,      Stage::Abstract,
                                       Stage::Synthesize, Stage::Validate, Stage::Report};

std::string to_string(Stage stage);
/// Throws ErrorKind::Config for an unknown name.
Stage parse_stage(const std::string& name);

struct StageTiming {
  Stage stage;
  double seconds = 0;
};

struct RunSummary {
  std::filesystem::path out_dir;
  std::vector<StageTiming> timings;
  std::size_t num_states = 0;
  double eps1 = 0;
  std::size_t bracket_violations = 0;  // safe regions with ci_high < p_lower
  std::size_t upper_misses = 0;        // safe regions with ci_low > p_upper
  std::size_t safe_regions = 0;
};

struct RunOptions {
  Stage last = Stage::Report;
  std::string config_text;  // hashed into the manifest
  std::string config_path;
  std::function<void(const std::string&)> log;  // progress lines; may be empty
};

/// Runs gen-data .. `last`, writing each stage's artifacts into c.out_dir as it
/// finishes; a failing stage rethrows with its name prefixed and leaves earlier
/// artifacts in place. A safe region whose Monte Carlo interval lies strictly
/// below p_lower raises ErrorKind::Validation after the final stage.
RunSummary run_pipeline(const RunConfig& c, const RunOptions& options);

/// Lipschitz constant of the mean map x -> x + b (x_e - x) + c u (x_h - x).
double field_lipschitz(const SystemModel& m);

}  // namespace cmesynth

#endif  // CMESYNTH_PIPELINE_HPP
