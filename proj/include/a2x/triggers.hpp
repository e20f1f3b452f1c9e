#pragma once

// Trigger patterns and their pixel-exact application to u8 images.
//
//   replace:  x' = (1 - m) * x + m * t          (mask m in {0,1})
//   blend:    x' = round((1 - alpha) * x + alpha * t)
//   additive: x' = clamp(round(x + field), 0, 255)
//
// Rounding is half-up (floor(v + 0.5)) and all arithmetic is double.

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

namespace a2x {

enum class Anchor { kBottomRight, kBottomLeft, kTopRight, kTopLeft };
enum class SquareColor { kWhite, kRandom };

struct ReplaceSquare {
  std::uint32_t side = 3;
  SquareColor color = SquareColor::kWhite;
  std::uint64_t seed = 0;  // used by kRandom only
  Anchor anchor = Anchor::kBottomRight;
  std::uint32_t margin = 0;

  bool operator==(const ReplaceSquare&) const = default;
};

struct FourCorner {
  std::uint32_t patch_side = 3;
  std::uint64_t seed = 0;

  bool operator==(const FourCorner&) const = default;
};

struct Blend {
  double alpha = 0.2;
  std::uint64_t pattern_seed = 0;

  bool operator==(const Blend&) const = default;
};

struct Sinusoid {
  double delta = 20.0;
  std::uint32_t freq = 6;

  bool operator==(const Sinusoid&) const = default;
};

using TriggerSpec = std::variant<ReplaceSquare, FourCorner, Blend, Sinusoid>;

/// Named presets: "bd-white", "bd-random", "blend", "lc", "sig".
TriggerSpec trigger_preset(const std::string& name, std::uint64_t seed = 0);

nlohmann::ordered_json to_json_value(const TriggerSpec& spec);
TriggerSpec trigger_from_json_value(const nlohmann::ordered_json& j);
TriggerSpec trigger_from_json(const std::string& text);
std::string trigger_to_json(const TriggerSpec& spec);

struct ImageShape {
  std::uint32_t channels = 1;
  std::uint32_t height = 1;
  std::uint32_t width = 1;

  std::size_t plane() const { return std::size_t{height} * width; }
  std::size_t size() const { return std::size_t{channels} * plane(); }
  bool operator==(const ImageShape&) const = default;
};

struct RenderedTrigger {
  enum class Kind { kReplace, kBlend, kAdditive };
  Kind kind = Kind::kReplace;
  ImageShape shape;
  std::vector<std::uint8_t> mask;     // H*W, replace only
  std::vector<std::uint8_t> pattern;  // C*H*W, replace and blend
  double alpha = 0.0;                 // blend only
  std::vector<double> field;          // H*W, additive only

  bool operator==(const RenderedTrigger&) const = default;
};

/// Materializes a trigger for one image shape. Seeded content is a pure
/// function of the spec.
RenderedTrigger render(const TriggerSpec& spec, ImageShape shape);

void apply_inplace(std::span<std::uint8_t> image, const RenderedTrigger& rt);
std::vector<std::uint8_t> apply(std::span<const std::uint8_t> image,
                                const RenderedTrigger& rt);

/// floor(v + 0.5) clamped to [0, 255].
std::uint8_t round_clamp_u8(double v);

}  // namespace a2x
