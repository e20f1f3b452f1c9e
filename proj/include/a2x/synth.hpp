#pragma once

// Synthetic embedding fixtures with a planted two-level structure: classes
// are spread over `x_planted` well separated super-clusters, and samples
// scatter around their class mean.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "a2x/dataio.hpp"
#include "a2x/grouping.hpp"

namespace a2x {

struct SynthConfig {
  std::uint32_t k = 10;
  std::uint32_t x_planted = 3;
  std::uint32_t dim = 16;
  std::uint32_t per_class = 50;
  double spread = 1.0;       // std-dev of class offsets and of sample noise
  double separation = 20.0;  // distance between super-cluster centres
  std::uint64_t seed = 0;
};

struct SynthFixture {
  SynthConfig config;
  EmbeddingSet embeddings;
  Grouping planted;
  /// Class means as stored (float precision). Sample noise is centred per
  /// class, so the position vectors reproduce these up to float rounding.
  std::vector<std::vector<float>> class_means;
};

SynthFixture synthesize(const SynthConfig& cfg);

/// {"k", "x_planted", ..., "groups", "class_means"} sidecar document.
std::string planted_to_json(const SynthFixture& fx);
std::filesystem::path planted_sidecar_path(const std::filesystem::path& embeddings);

}  // namespace a2x
