#pragma once

#include <cstdint>
#include <vector>

#include "a2x/dataio.hpp"
#include "a2x/features.hpp"

namespace a2x {

/// A partition of the classes into X non-empty groups.
///
/// Group indices are canonical: groups are numbered in order of their
/// smallest member, so two equal partitions always compare equal.
struct Grouping {
  std::uint32_t num_classes = 0;
  std::uint32_t x = 0;
  std::vector<std::uint32_t> assign;  // class -> group

  /// Canonicalizes `assign` and checks that no group in [0, x) is empty.
  static Grouping from_assign(std::uint32_t x, std::vector<std::uint32_t> assign);
  static Grouping from_groups(std::uint32_t num_classes,
                              const std::vector<std::vector<ClassId>>& groups);

  /// Members of every group, each list in ascending class order.
  std::vector<std::vector<ClassId>> groups() const;

  bool operator==(const Grouping&) const = default;
};

struct KMeansConfig {
  std::uint32_t x = 1;
  std::uint64_t seed = 0;
  std::uint32_t max_iters = 300;
  double tol = 1e-6;
  std::uint32_t restarts = 10;
};

struct KMeansRun {
  Grouping grouping;
  double wcss = 0.0;
  std::uint32_t iterations = 0;
  std::vector<double> wcss_history;  // after every Lloyd iteration
};

struct KMeansResult {
  Grouping grouping;
  double wcss = 0.0;
  std::size_t best_restart = 0;
  std::vector<KMeansRun> runs;
};

/// Lloyd's algorithm with k-means++ seeding over the position vectors.
/// Runs `cfg.restarts` seeded restarts and keeps the one with the lowest
/// within-cluster sum of squares (ties go to the earliest restart).
KMeansResult kmeans_detailed(const PositionMatrix& p, const KMeansConfig& cfg);

inline Grouping kmeans(const PositionMatrix& p, const KMeansConfig& cfg) {
  return kmeans_detailed(p, cfg).grouping;
}

/// Within-cluster sum of squared Euclidean distances to group means.
double within_cluster_ss(const PositionMatrix& p, const Grouping& g);

struct SilhouetteReport {
  std::vector<double> per_class;  // s(i)
  std::vector<double> a;          // mean distance to own group
  std::vector<double> b;          // mean distance to the nearest other group
  double mean = 0.0;
};

/// Silhouette coefficients of a grouping under a class distance matrix.
/// Classes in singleton groups score 0. Requires at least two groups.
SilhouetteReport silhouette(const Grouping& g, const DistanceMatrix& d);

}  // namespace a2x
