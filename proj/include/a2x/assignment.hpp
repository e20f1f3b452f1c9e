#pragma once

#include <cstdint>
#include <vector>

#include "a2x/dataio.hpp"
#include "a2x/features.hpp"
#include "a2x/grouping.hpp"

namespace a2x {

/// D[i][k]: summed distance from the members of group i to class k.
struct GroupDistanceMatrix {
  std::uint32_t x = 0;
  std::uint32_t num_classes = 0;
  std::vector<double> values;  // x * num_classes, row-major
  /// Membership mask (x * num_classes); only consulted when self-targets
  /// are forbidden. Empty means "no class belongs to any group".
  std::vector<std::uint8_t> member;

  double operator()(std::size_t i, std::size_t k) const {
    return values[i * num_classes + k];
  }
  bool is_member(std::size_t i, std::size_t k) const {
    return !member.empty() && member[i * num_classes + k] != 0;
  }

  /// Wraps an explicit weight table (no group membership).
  static GroupDistanceMatrix from_values(std::uint32_t x, std::uint32_t num_classes,
                                         std::vector<double> values);
};

struct Assignment {
  std::uint32_t x = 0;
  std::vector<ClassId> targets;  // targets[i] = target of group i

  bool operator==(const Assignment&) const = default;
};

struct AssignConfig {
  bool forbid_self_target = false;
};

GroupDistanceMatrix group_distances(const Grouping& g, const DistanceMatrix& d);

/// Σ_i D[i][targets[i]], summed in group order.
double assignment_objective(const GroupDistanceMatrix& D,
                            const std::vector<ClassId>& targets);

/// Objective values within this distance of the optimum count as ties.
/// Scales with the weights so that rescaling D keeps the same answer.
double tie_tolerance(const GroupDistanceMatrix& D);

/// Maximum-weight injective group -> class assignment (Hungarian method on
/// the negated, zero-padded square problem). Among optimal assignments the
/// lexicographically smallest targets array is returned.
Assignment hungarian_max(const GroupDistanceMatrix& D, const AssignConfig& cfg = {});

/// Exhaustive reference solver with the same tie rule. Refuses instances
/// with more than `kBruteForceLimit` injections.
inline constexpr std::uint64_t kBruteForceLimit = 10'000'000;
std::uint64_t injection_count(std::uint32_t num_classes, std::uint32_t x);
Assignment brute_force_assign(const GroupDistanceMatrix& D,
                              const AssignConfig& cfg = {});

// Square min-cost assignment, exposed for testing. cost is n*n row-major.
struct SquareSolution {
  std::vector<std::size_t> row_to_col;
  std::vector<double> row_potential;
  std::vector<double> col_potential;
  double cost = 0.0;
};
SquareSolution solve_min_cost_square(std::size_t n, const std::vector<double>& cost);

}  // namespace a2x
