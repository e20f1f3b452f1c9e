#pragma once

// On-disk artifacts: image datasets (A2XD), embedding sets (A2XE) and
// class mapping files (JSON). All binary integers are little-endian.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace a2x {

using ClassId = std::uint32_t;

/// Labeled u8 image tensors, laid out sample -> channel -> row -> column.
struct TensorDataset {
  std::uint64_t n = 0;
  std::uint16_t channels = 1;
  std::uint16_t height = 1;
  std::uint16_t width = 1;
  std::uint32_t num_classes = 1;
  std::vector<ClassId> labels;
  std::vector<std::uint8_t> pixels;

  std::size_t sample_size() const noexcept {
    return std::size_t{channels} * height * width;
  }
  std::span<const std::uint8_t> sample(std::size_t i) const {
    return {pixels.data() + i * sample_size(), sample_size()};
  }
  std::span<std::uint8_t> sample(std::size_t i) {
    return {pixels.data() + i * sample_size(), sample_size()};
  }

  /// Throws Error(kValidation) when an invariant is broken.
  void validate() const;

  bool operator==(const TensorDataset&) const = default;
};

/// Per-sample feature vectors with their class labels.
struct EmbeddingSet {
  std::uint64_t n = 0;
  std::uint32_t dim = 1;
  std::uint32_t num_classes = 1;
  std::vector<ClassId> labels;  // n entries
  std::vector<float> values;    // n * dim entries, row-major

  std::span<const float> row(std::size_t i) const {
    return {values.data() + i * dim, dim};
  }

  /// Checks bounds, finiteness and that every class has at least one row.
  void validate() const;

  // Bitwise comparison: distinguishes -0.0f from 0.0f.
  bool operator==(const EmbeddingSet& other) const;
};

/// A source->target class mapping: X disjoint groups covering all classes,
/// each sent to its own target.
struct Mapping {
  std::uint32_t num_classes = 0;
  std::uint32_t x = 0;
  std::vector<std::vector<ClassId>> groups;
  std::vector<ClassId> targets;
  std::vector<ClassId> table;  // table[y] = targets[group_of(y)]

  /// Builds the table from groups/targets and validates the result.
  static Mapping from_groups(std::uint32_t num_classes,
                             std::vector<std::vector<ClassId>> groups,
                             std::vector<ClassId> targets);

  /// Recovers groups from a flat class->target table. Classes sharing a
  /// target form a group; groups are ordered by their smallest member.
  static Mapping from_table(std::vector<ClassId> table);

  bool operator==(const Mapping&) const = default;
};

/// Invariant violations of a mapping, one message each; empty when valid.
std::vector<std::string> mapping_structure_errors(const Mapping& m);

// Streams -------------------------------------------------------------------

void write_dataset(const TensorDataset& ds, std::ostream& out);
TensorDataset read_dataset(std::istream& in);

void write_embeddings(const EmbeddingSet& es, std::ostream& out);
EmbeddingSet read_embeddings(std::istream& in);

void write_mapping(const Mapping& m, std::ostream& out);
Mapping read_mapping(std::istream& in);

// Byte buffers (the stream forms wrap these).
std::vector<std::uint8_t> encode_dataset(const TensorDataset& ds);
TensorDataset decode_dataset(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_embeddings(const EmbeddingSet& es);
EmbeddingSet decode_embeddings(std::span<const std::uint8_t> bytes);

/// Pretty-printed mapping document, newline terminated.
std::string mapping_to_json(const Mapping& m);
/// Single-line form used inside CSV reports and manifests.
std::string mapping_to_compact_json(const Mapping& m);
Mapping mapping_from_json(const std::string& text);

// Files ---------------------------------------------------------------------

void save_dataset(const TensorDataset& ds, const std::filesystem::path& path);
TensorDataset load_dataset(const std::filesystem::path& path);
void save_embeddings(const EmbeddingSet& es, const std::filesystem::path& path);
EmbeddingSet load_embeddings(const std::filesystem::path& path);
void save_mapping(const Mapping& m, const std::filesystem::path& path);
Mapping load_mapping(const std::filesystem::path& path);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path,
                      std::span<const std::uint8_t> bytes);

}  // namespace a2x
