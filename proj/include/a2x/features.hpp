#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "a2x/dataio.hpp"

namespace a2x {

/// Mean feature vector of every class, one row per class.
struct PositionMatrix {
  std::uint32_t num_classes = 0;
  std::uint32_t dim = 0;
  std::vector<double> values;  // num_classes * dim

  std::span<const double> row(std::size_t i) const {
    return {values.data() + i * dim, dim};
  }
};

/// Symmetric class-to-class distances with a zero diagonal.
struct DistanceMatrix {
  std::uint32_t num_classes = 0;
  std::vector<double> values;  // num_classes * num_classes

  double operator()(std::size_t i, std::size_t j) const {
    return values[i * num_classes + j];
  }
  double& operator()(std::size_t i, std::size_t j) {
    return values[i * num_classes + j];
  }

  /// Builds from a dense row-major table; checks shape, symmetry,
  /// zero diagonal, finiteness and non-negativity.
  static DistanceMatrix from_values(std::uint32_t num_classes,
                                    std::vector<double> values);
};

enum class Norm { kL1, kL2, kLinf };

std::string_view to_string(Norm norm) noexcept;
std::optional<Norm> parse_norm(std::string_view text) noexcept;

/// Per-class means accumulated in double precision in row order.
PositionMatrix position_vectors(const EmbeddingSet& es);

/// Norm of the difference between two equally sized vectors.
double vector_distance(std::span<const double> a, std::span<const double> b,
                       Norm norm);

DistanceMatrix distance_matrix(const PositionMatrix& p, Norm norm = Norm::kL2);

}  // namespace a2x
