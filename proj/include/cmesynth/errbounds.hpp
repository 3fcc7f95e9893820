#ifndef CMESYNTH_ERRBOUNDS_HPP
#define CMESYNTH_ERRBOUNDS_HPP

#include <Eigen/Dense>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cmesynth/cme.hpp"
#include "cmesynth/kernel.hpp"
#include "cmesynth/lipschitz.hpp"
#include "cmesynth/partition.hpp"

namespace cmesynth {

/// (sigma_f / sigma_l) (L eta + sqrt(1/N) + sqrt(2 ln(M / delta) / N)).
/// Valid for grid-prompted data: N successors at each of M prompt points that
/// form an eta-grid of the domain, L the Lipschitz constant of the vector field.
double eps1_explicit(const GaussianKernel<double>& k, double lipschitz, double eta, long n, long m, double delta);

/// (sigma_f / sigma_l) L eta: MMD between transition kernels at points eta apart.
double mmd_lipschitz_bound(const GaussianKernel<double>& k, double lipschitz, double eta);

/// sup over |y - c| <= r of |k(., c) - k(., y)|_H.
double eps3_radius(const GaussianKernel<double>& k, double radius);

/// Max of eps3_radius over every grid cell, avoid cells included.
double eps3(const GaussianKernel<double>& k, const Partition& p);

struct Eps2Result {
  Eigen::VectorXd upper;           // certified sup of g over each box
  Eigen::VectorXd best;            // largest value actually found
  std::vector<bool> certified;     // upper - best <= tol reached within budget
  std::vector<std::size_t> probes;
  double lipschitz = 0;            // constant used for g
};

/// Certified upper bounds on g(x) = |mu_a(x) - mu_a(c)|_H over each box, with c
/// the box center. All probes of one round are evaluated in a single batched solve.
Eps2Result eps2_boxes(const CmeModel<double>& model, std::size_t action, const std::vector<Box>& boxes,
                      const LipschitzMaxOptions& options, int workers);

/// eps2_boxes over the non-avoid regions of the partition.
Eps2Result eps2(const CmeModel<double>& model, const Partition& p, std::size_t action,
                const LipschitzMaxOptions& options, int workers);

enum class BudgetMode { PerRegion, Global };
enum class Eps1Source { Theorem, User };

std::string to_string(BudgetMode mode);
std::string to_string(Eps1Source source);

/// Inputs of eps1_explicit.
struct Eps1Theorem {
  double lipschitz = 1;
  double eta = 0.1;
  long samples_per_point = 1;
  long grid_points = 1;
  double delta = 0.05;
};

struct BudgetOptions {
  BudgetMode mode = BudgetMode::PerRegion;
  std::optional<double> user_eps1;      // used when set
  std::optional<Eps1Theorem> theorem;   // used when user_eps1 is empty
  double delta = 0.05;                  // recorded confidence
  LipschitzMaxOptions eps2;
  int workers = 1;
};

/// eps = eps1 + eps2 + eps3 per (region, action).
struct ErrorBudget {
  BudgetMode mode = BudgetMode::PerRegion;
  Eps1Source eps1_source = Eps1Source::User;
  double eps1 = 0;
  double eps3 = 0;
  double delta = 0.05;
  std::optional<Eps1Theorem> theorem;
  Eigen::MatrixXd eps2;                             // regions x actions
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> certified;
  Eigen::VectorXd lipschitz;                        // per action

  [[nodiscard]] std::size_t num_regions() const { return static_cast<std::size_t>(eps2.rows()); }
  [[nodiscard]] std::size_t num_actions() const { return static_cast<std::size_t>(eps2.cols()); }
  [[nodiscard]] double total(std::size_t region, std::size_t action) const;

  /// `region_id,action,eps1,eps2,eps3,eps_total,certified`
  void write_csv(const std::filesystem::path& path) const;
};

ErrorBudget compute_budget(const CmeModel<double>& model, const Partition& p, const BudgetOptions& options);

}  // namespace cmesynth

#endif  // CMESYNTH_ERRBOUNDS_HPP
