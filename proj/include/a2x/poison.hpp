#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "a2x/dataio.hpp"
#include "a2x/triggers.hpp"

namespace a2x {

/// Dirty-label poisoning: every victim is triggered and relabeled to
/// mapping.table[original label].
struct PoisonPlan {
  double rate = 0.0;  // fraction of samples, in [0, 1]
  std::uint64_t seed = 0;
  Mapping mapping;
  TriggerSpec trigger;
};

struct ManifestRow {
  std::uint64_t index = 0;
  ClassId original_label = 0;
  ClassId new_label = 0;

  bool operator==(const ManifestRow&) const = default;
};

struct PoisonManifest {
  double rate = 0.0;
  std::uint64_t seed = 0;
  TriggerSpec trigger;
  Mapping mapping;
  std::vector<ManifestRow> rows;  // ascending index

  std::uint64_t count() const { return rows.size(); }
  bool operator==(const PoisonManifest&) const = default;
};

/// floor(rate * n); a 1e-9 slack absorbs decimal rates such as 0.57 whose
/// binary product falls just short of an integer.
std::uint64_t victim_count(std::uint64_t n, double rate);

/// Uniform sample of victim_count(n, rate) distinct indices, sorted.
std::vector<std::uint64_t> select_victims(std::uint64_t n, double rate,
                                          std::uint64_t seed);

struct PoisonResult {
  TensorDataset dataset;
  PoisonManifest manifest;
};

PoisonResult poison_dataset(const TensorDataset& ds, const PoisonPlan& plan);

/// Applies the trigger to every sample, leaving labels untouched.
TensorDataset trigger_all(const TensorDataset& ds, const TriggerSpec& trigger);

std::string manifest_to_json(const PoisonManifest& manifest);
PoisonManifest manifest_from_json(const std::string& text);
void save_manifest(const PoisonManifest& manifest, const std::filesystem::path& path);

}  // namespace a2x
