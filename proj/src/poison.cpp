#include "a2x/poison.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "a2x/error.hpp"
#include "a2x/json.hpp"
#include "a2x/rng.hpp"

namespace a2x {

namespace {

void check_rate(double rate) {
  if (!(rate >= 0.0 && rate <= 1.0)) {
    fail(ErrorKind::kParameter, "poison: rate must lie in [0, 1]");
  }
}

ImageShape shape_of(const TensorDataset& ds) {
  return {ds.channels, ds.height, ds.width};
}

}  // namespace

std::uint64_t victim_count(std::uint64_t n, double rate) {
  check_rate(rate);
  const double raw = std::floor(rate * static_cast<double>(n) + 1e-9);
  return std::min<std::uint64_t>(n, static_cast<std::uint64_t>(raw));
}

std::vector<std::uint64_t> select_victims(std::uint64_t n, double rate,
                                          std::uint64_t seed) {
  const std::uint64_t count = victim_count(n, rate);
  std::vector<std::uint64_t> pool(n);
  std::iota(pool.begin(), pool.end(), std::uint64_t{0});
  Rng rng(seed);
  for (std::uint64_t i = 0; i < count; ++i) {
    std::swap(pool[i], pool[i + rng.below(n - i)]);
  }
  pool.resize(count);
  std::sort(pool.begin(), pool.end());
  return pool;
}

PoisonResult poison_dataset(const TensorDataset& ds, const PoisonPlan& plan) {
  ds.validate();
  if (plan.mapping.num_classes != ds.num_classes) {
    fail(ErrorKind::kParameter, "poison: mapping has K=" +
                                    std::to_string(plan.mapping.num_classes) +
                                    " but dataset has K=" +
                                    std::to_string(ds.num_classes));
  }
  if (auto errors = mapping_structure_errors(plan.mapping); !errors.empty()) {
    fail(ErrorKind::kValidation, "poison: invalid mapping: " + errors.front());
  }
  const auto rendered = render(plan.trigger, shape_of(ds));
  const auto victims = select_victims(ds.n, plan.rate, plan.seed);

  PoisonResult out{ds, {plan.rate, plan.seed, plan.trigger, plan.mapping, {}}};
  out.manifest.rows.reserve(victims.size());
  for (std::uint64_t idx : victims) {
    const auto i = static_cast<std::size_t>(idx);
    const ClassId original = ds.labels[i];
    const ClassId relabeled = plan.mapping.table[original];
    apply_inplace(out.dataset.sample(i), rendered);
    out.dataset.labels[i] = relabeled;
    out.manifest.rows.push_back({idx, original, relabeled});
  }
  return out;
}

TensorDataset trigger_all(const TensorDataset& ds, const TriggerSpec& trigger) {
  ds.validate();
  const auto rendered = render(trigger, shape_of(ds));
  TensorDataset out = ds;
  for (std::size_t i = 0; i < out.n; ++i) apply_inplace(out.sample(i), rendered);
  return out;
}

std::string manifest_to_json(const PoisonManifest& manifest) {
  nlohmann::ordered_json j;
  j["rate"] = manifest.rate;
  j["seed"] = manifest.seed;
  j["count"] = manifest.count();
  j["trigger"] = to_json_value(manifest.trigger);
  j["mapping"] = to_json_value(manifest.mapping);
  auto rows = nlohmann::ordered_json::array();
  for (const auto& r : manifest.rows) {
    rows.push_back({r.index, r.original_label, r.new_label});
  }
  j["rows"] = std::move(rows);
  return j.dump() + "\n";
}

PoisonManifest manifest_from_json(const std::string& text) {
  PoisonManifest m;
  try {
    const auto j = nlohmann::ordered_json::parse(text);
    m.rate = j.at("rate").get<double>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.trigger = trigger_from_json_value(j.at("trigger"));
    m.mapping = mapping_from_json_value(j.at("mapping"));
    for (const auto& r : j.at("rows")) {
      if (!r.is_array() || r.size() != 3) {
        fail(ErrorKind::kFormat, "manifest: rows must be [index, original, new]");
      }
      m.rows.push_back({r[0].get<std::uint64_t>(), r[1].get<ClassId>(),
                        r[2].get<ClassId>()});
    }
    if (j.at("count").get<std::uint64_t>() != m.rows.size()) {
      fail(ErrorKind::kValidation, "manifest: count does not match rows");
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kFormat, std::string("manifest: ") + e.what());
  }
  return m;
}

void save_manifest(const PoisonManifest& manifest, const std::filesystem::path& path) {
  const std::string text = manifest_to_json(manifest);
  write_file_bytes(path, {reinterpret_cast<const std::uint8_t*>(text.data()),
                          text.size()});
}

}  // namespace a2x
