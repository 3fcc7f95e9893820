#ifndef CMESYNTH_PARTITION_HPP
#define CMESYNTH_PARTITION_HPP

#include <Eigen/Dense>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace cmesynth {

/// Closed axis-aligned box [lo, hi].
struct Box {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;

  Box() = default;
  Box(Eigen::VectorXd l, Eigen::VectorXd h);

  [[nodiscard]] Eigen::Index dim() const { return lo.size(); }
  [[nodiscard]] Eigen::VectorXd center() const { return 0.5 * (lo + hi); }
  /// Largest distance from the center to a point of the box.
  [[nodiscard]] double radius() const { return 0.5 * (hi - lo).norm(); }
  [[nodiscard]] double volume() const { return (hi - lo).prod(); }
  [[nodiscard]] bool contains(const Eigen::VectorXd& x, double tol = 0.0) const;
  [[nodiscard]] bool contains(const Box& other, double tol = 0.0) const;
};

/// Reach-avoid regions: stay in `safe` (X_avoid is its complement) until `reach`.
/// A missing reach box means a pure safety task.
struct ReachAvoidSpec {
  Box domain;
  Box safe;
  std::optional<Box> reach;

  /// Throws ErrorKind::Input unless reach ⊆ safe ⊆ domain.
  void validate() const;
};

enum class Label { Reach, Safe, Avoid };

std::string to_string(Label label);

struct Cell {
  Box box;
  Eigen::VectorXd center;
  double radius = 0;
  Label label = Label::Safe;
  std::size_t grid_index = 0;  // flat lexicographic index, dimension 0 most significant
};

/// Uniform grid over the domain with conservative labels.
///
/// Non-avoid cells are the regions s_0..s_{R-1}; every cell that meets X_avoid in a
/// set of positive volume is merged into the single state s_avoid (id R). The
/// avoid cells keep their geometry so the abstraction can place atoms at their centers.
class Partition {
 public:
  static Partition build_grid(const ReachAvoidSpec& spec, const std::vector<int>& cells_per_dim);

  [[nodiscard]] const ReachAvoidSpec& spec() const { return spec_; }
  [[nodiscard]] const std::vector<int>& cells_per_dim() const { return cells_per_dim_; }
  [[nodiscard]] Eigen::Index dim() const { return spec_.domain.dim(); }

  [[nodiscard]] const std::vector<Cell>& regions() const { return regions_; }
  [[nodiscard]] const std::vector<Cell>& avoid_cells() const { return avoid_cells_; }
  [[nodiscard]] std::size_t num_regions() const { return regions_.size(); }
  [[nodiscard]] std::size_t avoid_id() const { return regions_.size(); }
  [[nodiscard]] std::size_t num_states() const { return regions_.size() + 1; }
  [[nodiscard]] Label label(std::size_t state) const;

  /// Region containing x; shared faces resolve to the lexicographically smallest cell.
  /// Throws ErrorKind::Domain when x is outside the domain.
  [[nodiscard]] std::size_t locate(const Eigen::VectorXd& x) const;

  /// Largest cell radius (all cells share it on a uniform grid).
  [[nodiscard]] double max_radius() const;

  /// Region-id ordered CSV `region_id,label,lo_..,hi_..,center_..`; avoid cells share id R.
  void write_csv(const std::filesystem::path& path) const;

 private:
  ReachAvoidSpec spec_;
  std::vector<int> cells_per_dim_;
  Eigen::VectorXd width_;
  std::vector<Cell> regions_;
  std::vector<Cell> avoid_cells_;
  std::vector<std::size_t> grid_to_state_;
};

}  // namespace cmesynth

#endif  // CMESYNTH_PARTITION_HPP
