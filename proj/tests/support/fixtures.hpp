#pragma once

// Random value generators shared by the property-style tests.

#include <cstdint>
#include <random>
#include <vector>

#include "a2x/dataio.hpp"
#include "a2x/features.hpp"

namespace a2x::testing {

inline TensorDataset random_dataset(std::mt19937_64& gen, std::uint64_t max_n = 6) {
  TensorDataset ds;
  ds.n = gen() % (max_n + 1);
  ds.channels = static_cast<std::uint16_t>(1 + gen() % 3);
  ds.height = static_cast<std::uint16_t>(1 + gen() % 5);
  ds.width = static_cast<std::uint16_t>(1 + gen() % 5);
  ds.num_classes = static_cast<std::uint32_t>(1 + gen() % 300);
  for (std::uint64_t i = 0; i < ds.n; ++i) {
    ds.labels.push_back(static_cast<ClassId>(gen() % ds.num_classes));
  }
  ds.pixels.resize(ds.n * ds.sample_size());
  for (auto& p : ds.pixels) p = static_cast<std::uint8_t>(gen());
  return ds;
}

inline EmbeddingSet random_embeddings(std::mt19937_64& gen, std::uint32_t k,
                                      std::uint32_t dim, std::uint32_t per_class) {
  EmbeddingSet es;
  es.dim = dim;
  es.num_classes = k;
  std::normal_distribution<float> normal(0.0f, 3.0f);
  for (std::uint32_t c = 0; c < k; ++c) {
    for (std::uint32_t s = 0; s < per_class; ++s) {
      es.labels.push_back(c);
      for (std::uint32_t d = 0; d < dim; ++d) es.values.push_back(normal(gen));
    }
  }
  es.n = es.labels.size();
  return es;
}

inline PositionMatrix random_points(std::mt19937_64& gen, std::uint32_t k, std::uint32_t dim,
                                    double scale = 10.0) {
  PositionMatrix p{k, dim, std::vector<double>(std::size_t{k} * dim)};
  std::uniform_real_distribution<double> u(-scale, scale);
  for (auto& v : p.values) v = u(gen);
  return p;
}

inline std::vector<std::vector<double>> to_rows(const DistanceMatrix& d) {
  std::vector<std::vector<double>> rows(d.num_classes, std::vector<double>(d.num_classes));
  for (std::size_t i = 0; i < d.num_classes; ++i) {
    for (std::size_t j = 0; j < d.num_classes; ++j) rows[i][j] = d(i, j);
  }
  return rows;
}

}  // namespace a2x::testing
