#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "a2x/assignment.hpp"
#include "a2x/dataio.hpp"
#include "a2x/features.hpp"
#include "a2x/grouping.hpp"

namespace a2x {

struct MappingScore {
  double objective = 0.0;                 // Σ over groups of Σ_{j∈C_i} d(j, target_i)
  std::optional<double> silhouette_mean;  // absent for a single group
  std::uint32_t self_target_count = 0;    // groups whose target is a member
};

struct Finding {
  enum class Severity { kError, kWarning };
  Severity severity;
  std::string message;
};

Mapping build_mapping(const Grouping& g, const Assignment& a);

/// y -> (y + 1) mod K with singleton groups.
Mapping cyclic_mapping(std::uint32_t num_classes);

/// Uniformly random surjection of classes onto X groups, and X distinct
/// uniformly drawn targets. Groups are ordered by smallest member.
Mapping random_mapping(std::uint32_t num_classes, std::uint32_t x, std::uint64_t seed);

/// Sends a fixed grouping to X distinct uniformly drawn targets.
Mapping random_targets(const Grouping& g, std::uint64_t seed);

MappingScore score_mapping(const Mapping& m, const DistanceMatrix& d);

/// Sample Pearson correlation coefficient.
double pearson(std::span<const double> xs, std::span<const double> ys);

/// Structural errors plus one warning per group that targets one of its
/// own classes.
std::vector<Finding> validate_mapping(const Mapping& m);

struct SweepRow {
  std::uint64_t index = 0;
  Mapping mapping;
  MappingScore score;
};

struct SweepReport {
  std::vector<SweepRow> rows;
  /// Correlation of objective vs. silhouette across rows; absent when it is
  /// undefined (fewer than two rows, X = 1, or zero variance).
  std::optional<double> objective_silhouette_pearson;
};

/// Scores `n` random mappings; row i uses the i-th substream of `seed`.
SweepReport sweep_random(std::uint32_t num_classes, std::uint32_t x, std::uint64_t n,
                         std::uint64_t seed, const DistanceMatrix& d);

inline constexpr const char* kSweepCsvHeader =
    "index,objective,silhouette_mean,self_target_count,mapping_json";

/// CSV with kSweepCsvHeader; mapping_json is quoted with doubled quotes.
std::string sweep_to_csv(const SweepReport& report);

/// Full optimization pipeline from position vectors to a mapping.
struct PlanConfig {
  std::uint32_t x = 1;
  Norm norm = Norm::kL2;
  std::uint64_t seed = 0;
  bool forbid_self_target = false;
  std::uint32_t restarts = 10;
  std::uint32_t max_iters = 300;
  double tol = 1e-6;
};

struct Plan {
  DistanceMatrix distances;
  Grouping grouping;
  GroupDistanceMatrix group_distances;
  Assignment assignment;
  Mapping mapping;
  MappingScore score;
};

Plan plan_mapping(const PositionMatrix& p, const PlanConfig& cfg);

}  // namespace a2x
