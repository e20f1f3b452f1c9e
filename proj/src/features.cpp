#include "a2x/features.hpp"

#include <algorithm>
#include <cmath>

#include "a2x/error.hpp"

namespace a2x {

std::string_view to_string(Norm norm) noexcept {
  switch (norm) {
    case Norm::kL1: return "l1";
    case Norm::kL2: return "l2";
    case Norm::kLinf: return "linf";
  }
  return "?";
}

std::optional<Norm> parse_norm(std::string_view text) noexcept {
  if (text == "l1") return Norm::kL1;
  if (text == "l2") return Norm::kL2;
  if (text == "linf") return Norm::kLinf;
  return std::nullopt;
}

DistanceMatrix DistanceMatrix::from_values(std::uint32_t num_classes,
                                           std::vector<double> values) {
  if (values.size() != std::size_t{num_classes} * num_classes) {
    fail(ErrorKind::kValidation, "distance matrix: expected K*K entries");
  }
  DistanceMatrix d{num_classes, std::move(values)};
  for (std::size_t i = 0; i < num_classes; ++i) {
    if (d(i, i) != 0.0) {
      fail(ErrorKind::kValidation, "distance matrix: nonzero diagonal");
    }
    for (std::size_t j = 0; j < num_classes; ++j) {
      const double v = d(i, j);
      if (!std::isfinite(v) || v < 0.0) {
        fail(ErrorKind::kValidation,
             "distance matrix: entries must be finite and non-negative");
      }
      if (v != d(j, i)) fail(ErrorKind::kValidation, "distance matrix: not symmetric");
    }
  }
  return d;
}

PositionMatrix position_vectors(const EmbeddingSet& es) {
  es.validate();
  PositionMatrix p{es.num_classes, es.dim,
                   std::vector<double>(std::size_t{es.num_classes} * es.dim, 0.0)};
  std::vector<std::uint64_t> counts(es.num_classes, 0);
  for (std::size_t i = 0; i < es.labels.size(); ++i) {
    const ClassId y = es.labels[i];
    ++counts[y];
    double* acc = p.values.data() + std::size_t{y} * es.dim;
    auto row = es.row(i);
    for (std::uint32_t k = 0; k < es.dim; ++k) acc[k] += static_cast<double>(row[k]);
  }
  for (std::uint32_t c = 0; c < es.num_classes; ++c) {
    const auto count = static_cast<double>(counts[c]);
    for (std::uint32_t k = 0; k < es.dim; ++k) {
      p.values[std::size_t{c} * es.dim + k] /= count;
    }
  }
  return p;
}

double vector_distance(std::span<const double> a, std::span<const double> b,
                       Norm norm) {
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double diff = std::abs(a[k] - b[k]);
    switch (norm) {
      case Norm::kL1: acc += diff; break;
      case Norm::kL2: acc += diff * diff; break;
      case Norm::kLinf: acc = std::max(acc, diff); break;
    }
  }
  return norm == Norm::kL2 ? std::sqrt(acc) : acc;
}

DistanceMatrix distance_matrix(const PositionMatrix& p, Norm norm) {
  const std::uint32_t k = p.num_classes;
  DistanceMatrix d{k, std::vector<double>(std::size_t{k} * k, 0.0)};
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) {
      const double v = vector_distance(p.row(i), p.row(j), norm);
      d(i, j) = v;
      d(j, i) = v;
    }
  }
  return d;
}

}  // namespace a2x
