#include <doctest.h>

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "a2x/dataio.hpp"
#include "a2x/error.hpp"
#include "a2x/features.hpp"
#include "a2x/synth.hpp"

using namespace a2x;

TEST_CASE("fixed seed gives an identical file") {
  const SynthConfig cfg{.seed = 12};
  CHECK(encode_embeddings(synthesize(cfg).embeddings) ==
        encode_embeddings(synthesize(cfg).embeddings));
  CHECK_FALSE(encode_embeddings(synthesize(cfg).embeddings) ==
              encode_embeddings(synthesize({.seed = 13}).embeddings));
}

TEST_CASE("one sample per class reproduces the generated means") {
  const auto fx = synthesize({.per_class = 1, .seed = 3});
  const auto p = position_vectors(fx.embeddings);
  for (std::uint32_t c = 0; c < 10; ++c) {
    for (std::uint32_t d = 0; d < 16; ++d) {
      CHECK(p.values[c * 16 + d] == static_cast<double>(fx.class_means[c][d]));
    }
  }
}

TEST_CASE("position vectors sit on the stored class means") {
  const auto fx = synthesize({.seed = 4});
  const auto p = position_vectors(fx.embeddings);
  for (std::uint32_t c = 0; c < 10; ++c) {
    for (std::uint32_t d = 0; d < 16; ++d) {
      CHECK(std::fabs(p.values[c * 16 + d] - fx.class_means[c][d]) < 1e-4);
    }
  }
}

TEST_CASE("planted structure is well separated") {
  const auto fx = synthesize({.seed = 5});
  CHECK(fx.embeddings.n == 500);
  CHECK(fx.planted.x == 3);
  for (const auto& g : fx.planted.groups()) CHECK(!g.empty());

  const auto d = distance_matrix(position_vectors(fx.embeddings));
  double max_within = 0.0, min_between = 1e300;
  for (std::uint32_t i = 0; i < 10; ++i) {
    for (std::uint32_t j = i + 1; j < 10; ++j) {
      if (fx.planted.assign[i] == fx.planted.assign[j]) {
        max_within = std::max(max_within, d(i, j));
      } else {
        min_between = std::min(min_between, d(i, j));
      }
    }
  }
  CHECK(max_within < min_between);
}

TEST_CASE("synth parameter checks") {
  CHECK_THROWS_AS(synthesize({.separation = 0.0}), Error);
  CHECK_THROWS_AS(synthesize({.k = 3, .x_planted = 4}), Error);
  CHECK_THROWS_AS(synthesize({.x_planted = 0}), Error);
  CHECK_THROWS_AS(synthesize({.dim = 2}), Error);
  CHECK_THROWS_AS(synthesize({.per_class = 0}), Error);
  CHECK_THROWS_AS(synthesize({.spread = -1.0}), Error);
}

TEST_CASE("sidecar document") {
  const auto fx = synthesize({.seed = 6});
  const auto j = nlohmann::json::parse(planted_to_json(fx));
  CHECK(j.at("k") == 10);
  CHECK(j.at("x_planted") == 3);
  CHECK(j.at("groups").get<std::vector<std::vector<ClassId>>>() == fx.planted.groups());
  CHECK(j.at("class_means").size() == 10);
  CHECK(planted_sidecar_path("out/e.a2xe") == std::filesystem::path("out/e.a2xe.planted.json"));
}
