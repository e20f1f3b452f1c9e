#include "a2x/dataio.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>

#include "a2x/error.hpp"
#include "a2x/json.hpp"

namespace a2x {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::kValidation: return "validation";
    case ErrorKind::kFormat: return "format";
    case ErrorKind::kTruncated: return "truncated";
    case ErrorKind::kParameter: return "parameter";
    case ErrorKind::kInfeasible: return "infeasible";
    case ErrorKind::kGuard: return "guard";
    case ErrorKind::kIo: return "io";
  }
  return "unknown";
}

namespace {

constexpr std::array<char, 4> kDatasetMagic = {'A', '2', 'X', 'D'};
constexpr std::array<char, 4> kEmbeddingMagic = {'A', '2', 'X', 'E'};
constexpr std::uint16_t kVersion = 1;

class ByteWriter {
 public:
  explicit ByteWriter(std::size_t reserve) { buf_.reserve(reserve); }

  void magic(const std::array<char, 4>& m) {
    for (char c : m) buf_.push_back(static_cast<std::uint8_t>(c));
  }
  template <typename T>
  void le(T value) {
    using U = std::make_unsigned_t<T>;
    auto u = static_cast<U>(value);
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      buf_.push_back(static_cast<std::uint8_t>(u >> (8 * i)));
    }
  }
  void f32(float value) { le(std::bit_cast<std::uint32_t>(value)); }
  void bytes(std::span<const std::uint8_t> data) {
    buf_.insert(buf_.end(), data.begin(), data.end());
  }

  std::vector<std::uint8_t> take() { return std::move(buf_); }

 private:
  std::vector<std::uint8_t> buf_;
};

class ByteReader {
 public:
  ByteReader(std::span<const std::uint8_t> data, const char* what)
      : data_(data), what_(what) {}

  std::size_t remaining() const { return data_.size() - pos_; }

  void need(std::size_t count, const char* field) const {
    if (remaining() < count) {
      fail(ErrorKind::kTruncated, std::string(what_) + ": truncated in " +
                                      field + " (need " +
                                      std::to_string(count) + " bytes, have " +
                                      std::to_string(remaining()) + ")");
    }
  }

  void expect_magic(const std::array<char, 4>& m) {
    need(4, "magic");
    if (std::memcmp(data_.data() + pos_, m.data(), 4) != 0) {
      fail(ErrorKind::kFormat, std::string(what_) + ": bad magic");
    }
    pos_ += 4;
  }

  template <typename T>
  T le(const char* field) {
    need(sizeof(T), field);
    std::make_unsigned_t<T> u = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      u |= static_cast<std::make_unsigned_t<T>>(data_[pos_ + i]) << (8 * i);
    }
    pos_ += sizeof(T);
    return static_cast<T>(u);
  }

  float f32(const char* field) {
    return std::bit_cast<float>(le<std::uint32_t>(field));
  }

  std::span<const std::uint8_t> bytes(std::size_t count, const char* field) {
    need(count, field);
    auto out = data_.subspan(pos_, count);
    pos_ += count;
    return out;
  }

  void expect_end() const {
    if (remaining() != 0) {
      fail(ErrorKind::kFormat, std::string(what_) + ": " +
                                   std::to_string(remaining()) +
                                   " trailing bytes");
    }
  }

 private:
  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
  const char* what_;
};

// a * b, or a format error if it does not fit in size_t.
std::size_t checked_mul(std::uint64_t a, std::uint64_t b, const char* what) {
  constexpr auto kMax = std::numeric_limits<std::size_t>::max();
  if (a != 0 && b > kMax / a) {
    fail(ErrorKind::kFormat, std::string(what) + ": dimension overflow");
  }
  return static_cast<std::size_t>(a * b);
}

void read_header_prefix(ByteReader& r, const std::array<char, 4>& magic,
                        const char* what) {
  r.expect_magic(magic);
  const auto version = r.le<std::uint16_t>("version");
  if (version != kVersion) {
    fail(ErrorKind::kFormat,
         std::string(what) + ": unsupported version " + std::to_string(version));
  }
  const auto flags = r.le<std::uint16_t>("flags");
  if (flags != 0) {
    fail(ErrorKind::kFormat,
         std::string(what) + ": unknown flags " + std::to_string(flags));
  }
}

std::vector<std::uint8_t> slurp(std::istream& in) {
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void emit(std::ostream& out, std::span<const std::uint8_t> bytes) {
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorKind::kIo, "write failed");
}

}  // namespace

// TensorDataset ---------------------------------------------------------------

void TensorDataset::validate() const {
  if (channels == 0 || height == 0 || width == 0) {
    fail(ErrorKind::kValidation, "dataset: channels/height/width must be positive");
  }
  if (num_classes == 0) {
    fail(ErrorKind::kValidation, "dataset: num_classes must be positive");
  }
  if (labels.size() != n) {
    fail(ErrorKind::kValidation, "dataset: labels length " +
                                     std::to_string(labels.size()) +
                                     " != n " + std::to_string(n));
  }
  if (pixels.size() != checked_mul(n, sample_size(), "dataset")) {
    fail(ErrorKind::kValidation, "dataset: pixels length does not match n*C*H*W");
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= num_classes) {
      fail(ErrorKind::kValidation, "dataset: label " + std::to_string(labels[i]) +
                                       " at sample " + std::to_string(i) +
                                       " out of range");
    }
  }
}

std::vector<std::uint8_t> encode_dataset(const TensorDataset& ds) {
  ds.validate();
  ByteWriter w(26 + ds.labels.size() * 4 + ds.pixels.size());
  w.magic(kDatasetMagic);
  w.le(kVersion);
  w.le(std::uint16_t{0});
  w.le(ds.n);
  w.le(ds.channels);
  w.le(ds.height);
  w.le(ds.width);
  w.le(ds.num_classes);
  for (ClassId y : ds.labels) w.le(y);
  w.bytes(ds.pixels);
  return w.take();
}

TensorDataset decode_dataset(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes, "dataset");
  read_header_prefix(r, kDatasetMagic, "dataset");
  TensorDataset ds;
  ds.n = r.le<std::uint64_t>("n");
  ds.channels = r.le<std::uint16_t>("channels");
  ds.height = r.le<std::uint16_t>("height");
  ds.width = r.le<std::uint16_t>("width");
  ds.num_classes = r.le<std::uint32_t>("num_classes");
  if (ds.channels == 0 || ds.height == 0 || ds.width == 0 || ds.num_classes == 0) {
    fail(ErrorKind::kValidation, "dataset: zero dimension in header");
  }

  // Size checks happen before any allocation sized by the header.
  const std::size_t label_bytes = checked_mul(ds.n, 4, "dataset");
  const std::size_t pixel_bytes = checked_mul(ds.n, ds.sample_size(), "dataset");
  r.need(label_bytes, "labels");
  ds.labels.resize(static_cast<std::size_t>(ds.n));
  for (auto& y : ds.labels) y = r.le<std::uint32_t>("labels");
  auto px = r.bytes(pixel_bytes, "pixels");
  ds.pixels.assign(px.begin(), px.end());
  r.expect_end();
  ds.validate();
  return ds;
}

void write_dataset(const TensorDataset& ds, std::ostream& out) {
  emit(out, encode_dataset(ds));
}

TensorDataset read_dataset(std::istream& in) { return decode_dataset(slurp(in)); }

// EmbeddingSet ----------------------------------------------------------------

void EmbeddingSet::validate() const {
  if (dim == 0) fail(ErrorKind::kValidation, "embeddings: dim must be positive");
  if (num_classes == 0) {
    fail(ErrorKind::kValidation, "embeddings: num_classes must be positive");
  }
  if (labels.size() != n) {
    fail(ErrorKind::kValidation, "embeddings: labels length != n");
  }
  if (values.size() != checked_mul(n, dim, "embeddings")) {
    fail(ErrorKind::kValidation, "embeddings: values length != n*dim");
  }
  std::vector<bool> seen(num_classes, false);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= num_classes) {
      fail(ErrorKind::kValidation, "embeddings: label " +
                                       std::to_string(labels[i]) + " at row " +
                                       std::to_string(i) + " out of range");
    }
    seen[labels[i]] = true;
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      fail(ErrorKind::kValidation, "embeddings: non-finite value at row " +
                                       std::to_string(i / dim));
    }
  }
  for (std::uint32_t c = 0; c < num_classes; ++c) {
    if (!seen[c]) {
      fail(ErrorKind::kValidation,
           "embeddings: class " + std::to_string(c) + " has no rows");
    }
  }
}

bool EmbeddingSet::operator==(const EmbeddingSet& other) const {
  if (n != other.n || dim != other.dim || num_classes != other.num_classes ||
      labels != other.labels || values.size() != other.values.size()) {
    return false;
  }
  return std::memcmp(values.data(), other.values.data(),
                     values.size() * sizeof(float)) == 0;
}

std::vector<std::uint8_t> encode_embeddings(const EmbeddingSet& es) {
  es.validate();
  ByteWriter w(24 + es.labels.size() * (4 + 4 * std::size_t{es.dim}));
  w.magic(kEmbeddingMagic);
  w.le(kVersion);
  w.le(std::uint16_t{0});
  w.le(es.n);
  w.le(es.dim);
  w.le(es.num_classes);
  for (std::size_t i = 0; i < es.labels.size(); ++i) {
    w.le(es.labels[i]);
    for (float v : es.row(i)) w.f32(v);
  }
  return w.take();
}

EmbeddingSet decode_embeddings(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes, "embeddings");
  read_header_prefix(r, kEmbeddingMagic, "embeddings");
  EmbeddingSet es;
  es.n = r.le<std::uint64_t>("n");
  es.dim = r.le<std::uint32_t>("dim");
  es.num_classes = r.le<std::uint32_t>("num_classes");
  if (es.dim == 0 || es.num_classes == 0) {
    fail(ErrorKind::kValidation, "embeddings: zero dimension in header");
  }
  const std::size_t row_bytes = checked_mul(es.dim, 4, "embeddings") + 4;
  r.need(checked_mul(es.n, row_bytes, "embeddings"), "rows");
  es.labels.resize(static_cast<std::size_t>(es.n));
  es.values.resize(checked_mul(es.n, es.dim, "embeddings"));
  std::size_t k = 0;
  for (auto& y : es.labels) {
    y = r.le<std::uint32_t>("label");
    for (std::uint32_t j = 0; j < es.dim; ++j) es.values[k++] = r.f32("vector");
  }
  r.expect_end();
  es.validate();
  return es;
}

void write_embeddings(const EmbeddingSet& es, std::ostream& out) {
  emit(out, encode_embeddings(es));
}

EmbeddingSet read_embeddings(std::istream& in) {
  return decode_embeddings(slurp(in));
}

// Mapping ---------------------------------------------------------------------

std::vector<std::string> mapping_structure_errors(const Mapping& m) {
  std::vector<std::string> errors;
  const std::uint32_t k = m.num_classes;
  if (k == 0) errors.emplace_back("num_classes must be positive");
  if (m.x == 0 || m.x > k) {
    errors.emplace_back("x=" + std::to_string(m.x) + " outside [1, num_classes]");
  }
  if (m.groups.size() != m.x) {
    errors.emplace_back("groups count " + std::to_string(m.groups.size()) +
                        " != x");
  }
  if (m.targets.size() != m.x) {
    errors.emplace_back("targets count " + std::to_string(m.targets.size()) +
                        " != x");
  }

  // Partition check; owner[c] = group index or -1.
  std::vector<long> owner(k, -1);
  for (std::size_t g = 0; g < m.groups.size(); ++g) {
    if (m.groups[g].empty()) {
      errors.push_back("group " + std::to_string(g) + " is empty");
    }
    for (ClassId c : m.groups[g]) {
      if (c >= k) {
        errors.push_back("group " + std::to_string(g) + " has class " +
                         std::to_string(c) + " out of range");
      } else if (owner[c] >= 0) {
        errors.push_back("class " + std::to_string(c) + " in groups " +
                         std::to_string(owner[c]) + " and " + std::to_string(g));
      } else {
        owner[c] = static_cast<long>(g);
      }
    }
  }
  for (std::uint32_t c = 0; c < k; ++c) {
    if (owner[c] < 0) {
      errors.push_back("class " + std::to_string(c) + " is not in any group");
    }
  }

  std::vector<bool> used(k, false);
  for (std::size_t g = 0; g < m.targets.size(); ++g) {
    const ClassId t = m.targets[g];
    if (t >= k) {
      errors.push_back("target " + std::to_string(t) + " out of range");
    } else if (used[t]) {
      errors.push_back("duplicate target " + std::to_string(t));
    } else {
      used[t] = true;
    }
  }

  if (m.table.size() != k) {
    errors.emplace_back("table length " + std::to_string(m.table.size()) +
                        " != num_classes");
  } else {
    for (std::uint32_t c = 0; c < k; ++c) {
      const long g = owner[c];
      if (g >= 0 && static_cast<std::size_t>(g) < m.targets.size() &&
          m.table[c] != m.targets[static_cast<std::size_t>(g)]) {
        errors.push_back("table[" + std::to_string(c) + "]=" +
                         std::to_string(m.table[c]) +
                         " disagrees with its group target");
      }
    }
  }
  return errors;
}

namespace {

void throw_if_invalid(const Mapping& m) {
  auto errors = mapping_structure_errors(m);
  if (!errors.empty()) {
    std::string msg = "mapping: " + errors.front();
    if (errors.size() > 1) {
      msg += " (+" + std::to_string(errors.size() - 1) + " more)";
    }
    fail(ErrorKind::kValidation, msg);
  }
}

}  // namespace

Mapping Mapping::from_groups(std::uint32_t num_classes,
                             std::vector<std::vector<ClassId>> groups,
                             std::vector<ClassId> targets) {
  Mapping m;
  m.num_classes = num_classes;
  m.x = static_cast<std::uint32_t>(groups.size());
  m.groups = std::move(groups);
  m.targets = std::move(targets);
  m.table.assign(num_classes, 0);
  if (m.targets.size() == m.groups.size()) {
    for (std::size_t g = 0; g < m.groups.size(); ++g) {
      for (ClassId c : m.groups[g]) {
        if (c < num_classes) m.table[c] = m.targets[g];
      }
    }
  }
  throw_if_invalid(m);
  return m;
}

Mapping Mapping::from_table(std::vector<ClassId> table) {
  const auto k = static_cast<std::uint32_t>(table.size());
  std::vector<std::vector<ClassId>> groups;
  std::vector<ClassId> targets;
  for (ClassId c = 0; c < k; ++c) {
    auto it = std::find(targets.begin(), targets.end(), table[c]);
    if (it == targets.end()) {
      targets.push_back(table[c]);
      groups.push_back({c});
    } else {
      groups[static_cast<std::size_t>(it - targets.begin())].push_back(c);
    }
  }
  return from_groups(k, std::move(groups), std::move(targets));
}

nlohmann::ordered_json to_json_value(const Mapping& m) {
  nlohmann::ordered_json j;
  j["num_classes"] = m.num_classes;
  j["x"] = m.x;
  j["groups"] = m.groups;
  j["targets"] = m.targets;
  j["table"] = m.table;
  return j;
}

namespace {

std::uint32_t json_u32(const nlohmann::ordered_json& v, const char* field) {
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
    fail(ErrorKind::kFormat,
         std::string("mapping: field '") + field + "' must be a non-negative integer");
  }
  const auto u = v.get<std::uint64_t>();
  if (u > std::numeric_limits<std::uint32_t>::max()) {
    fail(ErrorKind::kFormat, std::string("mapping: field '") + field + "' too large");
  }
  return static_cast<std::uint32_t>(u);
}

std::vector<ClassId> json_u32_array(const nlohmann::ordered_json& v,
                                    const char* field) {
  if (!v.is_array()) {
    fail(ErrorKind::kFormat, std::string("mapping: field '") + field + "' must be an array");
  }
  std::vector<ClassId> out;
  out.reserve(v.size());
  for (const auto& e : v) out.push_back(json_u32(e, field));
  return out;
}

}  // namespace

Mapping mapping_from_json_value(const nlohmann::ordered_json& j) {
  static constexpr std::array<const char*, 5> kKeys = {
      "num_classes", "x", "groups", "targets", "table"};
  if (!j.is_object()) fail(ErrorKind::kFormat, "mapping: document is not an object");
  for (const char* key : kKeys) {
    if (!j.contains(key)) {
      fail(ErrorKind::kFormat, std::string("mapping: missing key '") + key + "'");
    }
  }
  if (j.size() != kKeys.size()) {
    fail(ErrorKind::kFormat, "mapping: unexpected extra keys");
  }
  Mapping m;
  m.num_classes = json_u32(j.at("num_classes"), "num_classes");
  m.x = json_u32(j.at("x"), "x");
  const auto& groups = j.at("groups");
  if (!groups.is_array()) fail(ErrorKind::kFormat, "mapping: 'groups' must be an array");
  for (const auto& g : groups) m.groups.push_back(json_u32_array(g, "groups"));
  m.targets = json_u32_array(j.at("targets"), "targets");
  m.table = json_u32_array(j.at("table"), "table");
  throw_if_invalid(m);
  return m;
}

std::string mapping_to_json(const Mapping& m) {
  throw_if_invalid(m);
  return to_json_value(m).dump(2) + "\n";
}

std::string mapping_to_compact_json(const Mapping& m) {
  throw_if_invalid(m);
  return to_json_value(m).dump();
}

Mapping mapping_from_json(const std::string& text) {
  nlohmann::ordered_json j;
  try {
    j = nlohmann::ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorKind::kFormat, std::string("mapping: ") + e.what());
  }
  return mapping_from_json_value(j);
}

void write_mapping(const Mapping& m, std::ostream& out) {
  const std::string text = mapping_to_json(m);
  out << text;
  if (!out) fail(ErrorKind::kIo, "write failed");
}

Mapping read_mapping(std::istream& in) {
  std::ostringstream ss;
  ss << in.rdbuf();
  return mapping_from_json(ss.str());
}

// Files -----------------------------------------------------------------------

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::kIo, "cannot open " + path.string());
  return slurp(in);
}

void write_file_bytes(const std::filesystem::path& path,
                      std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::kIo, "cannot create " + path.string());
  emit(out, bytes);
}

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  write_file_bytes(path, {reinterpret_cast<const std::uint8_t*>(text.data()),
                          text.size()});
}

std::string read_text(const std::filesystem::path& path) {
  auto bytes = read_file_bytes(path);
  return {bytes.begin(), bytes.end()};
}

}  // namespace

void save_dataset(const TensorDataset& ds, const std::filesystem::path& path) {
  write_file_bytes(path, encode_dataset(ds));
}

TensorDataset load_dataset(const std::filesystem::path& path) {
  return decode_dataset(read_file_bytes(path));
}

void save_embeddings(const EmbeddingSet& es, const std::filesystem::path& path) {
  write_file_bytes(path, encode_embeddings(es));
}

EmbeddingSet load_embeddings(const std::filesystem::path& path) {
  return decode_embeddings(read_file_bytes(path));
}

void save_mapping(const Mapping& m, const std::filesystem::path& path) {
  write_text(path, mapping_to_json(m));
}

Mapping load_mapping(const std::filesystem::path& path) {
  return mapping_from_json(read_text(path));
}

}  // namespace a2x
