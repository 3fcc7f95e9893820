#ifndef CMESYNTH_REPORT_HPP
#define CMESYNTH_REPORT_HPP

#include <filesystem>
#include <optional>
#include <string>

namespace cmesynth {

struct ReportSummary {
  std::size_t num_states = 0;
  std::size_t safe_regions = 0;
  double eps1 = 0;
  std::string eps1_source;
  double p_lower_avg = 0;
  double p_upper_avg = 0;
  double p_hat_avg = 0;
  double e_avg = 0;  // 1 - p_lower_avg
  double abstraction_seconds = 0;
  double synthesis_seconds = 0;
  bool degenerate = false;  // no non-avoid region to average over
};

/// Reads partition.csv, results.csv, validation.csv and manifest.json from
/// `dir` and writes report.svg and summary.csv there. Missing inputs throw
/// ErrorKind::StageOrder.
ReportSummary write_report(const std::filesystem::path& dir);

}  // namespace cmesynth

#endif  // CMESYNTH_REPORT_HPP
