#include "a2x/synth.hpp"

#include <cmath>

#include "a2x/error.hpp"
#include "a2x/json.hpp"
#include "a2x/rng.hpp"

namespace a2x {

SynthFixture synthesize(const SynthConfig& cfg) {
  if (cfg.k == 0 || cfg.x_planted == 0 || cfg.x_planted > cfg.k) {
    fail(ErrorKind::kParameter, "synth: need 1 <= x_planted <= k");
  }
  if (cfg.dim < cfg.x_planted) {
    fail(ErrorKind::kParameter, "synth: dim must be at least x_planted");
  }
  if (cfg.per_class == 0) fail(ErrorKind::kParameter, "synth: per_class must be positive");
  if (!(cfg.separation > 0.0) || !std::isfinite(cfg.separation)) {
    fail(ErrorKind::kParameter, "synth: separation must be positive");
  }
  if (!(cfg.spread >= 0.0) || !std::isfinite(cfg.spread)) {
    fail(ErrorKind::kParameter, "synth: spread must be non-negative");
  }

  Rng rng(cfg.seed);
  SynthFixture fx;
  fx.config = cfg;

  // Round-robin over a shuffled class order keeps every super-cluster
  // non-empty and sizes within one of each other.
  std::vector<ClassId> order(cfg.k);
  for (ClassId c = 0; c < cfg.k; ++c) order[c] = c;
  for (std::uint32_t i = cfg.k; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
  std::vector<std::uint32_t> assign(cfg.k);
  for (std::uint32_t i = 0; i < cfg.k; ++i) assign[order[i]] = i % cfg.x_planted;
  fx.planted = Grouping::from_assign(cfg.x_planted, assign);

  // Centre g sits on axis g, scaled so that any two centres are exactly
  // `separation` apart.
  const double axis = cfg.separation / std::sqrt(2.0);
  fx.class_means.assign(cfg.k, std::vector<float>(cfg.dim));
  for (ClassId c = 0; c < cfg.k; ++c) {
    for (std::uint32_t d = 0; d < cfg.dim; ++d) {
      const double centre = d == fx.planted.assign[c] ? axis : 0.0;
      fx.class_means[c][d] = static_cast<float>(centre + cfg.spread * rng.normal());
    }
  }

  auto& es = fx.embeddings;
  es.n = std::uint64_t{cfg.k} * cfg.per_class;
  es.dim = cfg.dim;
  es.num_classes = cfg.k;
  es.labels.reserve(es.n);
  es.values.reserve(es.n * cfg.dim);
  std::vector<double> noise(std::size_t{cfg.per_class} * cfg.dim);
  for (ClassId c = 0; c < cfg.k; ++c) {
    for (auto& v : noise) v = cfg.spread * rng.normal();
    if (cfg.per_class == 1) {
      std::fill(noise.begin(), noise.end(), 0.0);
    } else {
      for (std::uint32_t d = 0; d < cfg.dim; ++d) {
        double mean = 0.0;
        for (std::uint32_t s = 0; s < cfg.per_class; ++s) mean += noise[s * cfg.dim + d];
        mean /= cfg.per_class;
        for (std::uint32_t s = 0; s < cfg.per_class; ++s) noise[s * cfg.dim + d] -= mean;
      }
    }
    for (std::uint32_t s = 0; s < cfg.per_class; ++s) {
      es.labels.push_back(c);
      for (std::uint32_t d = 0; d < cfg.dim; ++d) {
        es.values.push_back(
            static_cast<float>(fx.class_means[c][d] + noise[s * cfg.dim + d]));
      }
    }
  }
  es.validate();
  return fx;
}

std::string planted_to_json(const SynthFixture& fx) {
  nlohmann::ordered_json j;
  j["k"] = fx.config.k;
  j["x_planted"] = fx.config.x_planted;
  j["dim"] = fx.config.dim;
  j["per_class"] = fx.config.per_class;
  j["spread"] = fx.config.spread;
  j["separation"] = fx.config.separation;
  j["seed"] = fx.config.seed;
  j["groups"] = fx.planted.groups();
  j["class_means"] = fx.class_means;
  return j.dump(2) + "\n";
}

std::filesystem::path planted_sidecar_path(const std::filesystem::path& embeddings) {
  auto p = embeddings;
  p += ".planted.json";
  return p;
}

}  // namespace a2x
