#ifndef CMESYNTH_ABSTRACTION_HPP
#define CMESYNTH_ABSTRACTION_HPP

#include <Eigen/Dense>

#include <filesystem>
#include <memory>
#include <vector>

#include "cmesynth/cme.hpp"
#include "cmesynth/errbounds.hpp"
#include "cmesynth/partition.hpp"
#include "cmesynth/qclp.hpp"

namespace cmesynth {

struct Membership {
  bool member = false;
  double slack = 0;  // eps^2 - q(gamma)
};

/// Finite uncertain MDP over the partition states.
///
/// Distributions live on atoms: one per grid cell, at its center. Region s has
/// atom s; every avoid cell keeps its own atom and all of them map to the single
/// absorbing state s_avoid. The ambiguity set of a region and action is the MMD
/// ball of AmbiguityData over those atoms.
struct Umdp {
  Partition partition;
  Eigen::MatrixXd atoms;                 // dim x m
  std::vector<std::size_t> atom_state;   // m entries, values in [0, R]
  std::shared_ptr<const Eigen::MatrixXd> k1;
  std::vector<Eigen::MatrixXd> k2;       // per action, m x N
  std::vector<Eigen::MatrixXd> betas;    // per action, N x R: beta(c_s)
  std::vector<std::vector<AmbiguityData<double>>> sets;  // [action][region]
  Eigen::MatrixXd eps;                   // R x A
  double eps1 = 0;
  double eps3 = 0;
  Eps1Source eps1_source = Eps1Source::User;
  BudgetMode budget_mode = BudgetMode::PerRegion;

  [[nodiscard]] std::size_t num_regions() const { return partition.num_regions(); }
  [[nodiscard]] std::size_t num_states() const { return partition.num_states(); }
  [[nodiscard]] std::size_t avoid_id() const { return partition.avoid_id(); }
  [[nodiscard]] std::size_t num_actions() const { return sets.size(); }
  [[nodiscard]] std::size_t num_atoms() const { return atom_state.size(); }
  [[nodiscard]] bool is_reach(std::size_t s) const {
    return s < num_regions() && partition.regions()[s].label == Label::Reach;
  }

  [[nodiscard]] const AmbiguityData<double>& ambiguity(std::size_t s, std::size_t a) const;

  /// Lifts a value per state to a value per atom.
  [[nodiscard]] Eigen::VectorXd atom_values(const Eigen::VectorXd& state_values) const;

  /// Sums atom probabilities into state probabilities.
  [[nodiscard]] Eigen::VectorXd state_distribution(const Eigen::VectorXd& gamma) const;

  /// Membership of an atom distribution in Gamma(s, a). For s_avoid only
  /// distributions concentrated on avoid atoms are members.
  /// Throws ErrorKind::Input if gamma is off the simplex by more than 1e-9.
  [[nodiscard]] Membership member(std::size_t s, std::size_t a, const Eigen::VectorXd& gamma) const;
};

/// Assembles the UMDP and checks that every ambiguity set is nonempty.
/// Throws ErrorKind::Infeasible naming the first empty (s, a).
Umdp build_umdp(const CmeModel<double>& model, const Partition& p, const ErrorBudget& budget, int workers);

/// Binary container (little-endian, versioned) plus a JSON sidecar listing block
/// shapes and CRC32 checksums.
void write_umdp(const Umdp& u, const std::filesystem::path& bin, const std::filesystem::path& sidecar);
Umdp read_umdp(const std::filesystem::path& bin);

}  // namespace cmesynth

#endif  // CMESYNTH_ABSTRACTION_HPP
