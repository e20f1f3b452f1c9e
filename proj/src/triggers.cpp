#include "a2x/triggers.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "a2x/error.hpp"
#include "a2x/rng.hpp"

namespace a2x {

std::uint8_t round_clamp_u8(double v) {
  const double r = std::floor(v + 0.5);
  return static_cast<std::uint8_t>(std::clamp(r, 0.0, 255.0));
}

TriggerSpec trigger_preset(const std::string& name, std::uint64_t seed) {
  if (name == "bd-white") return ReplaceSquare{};
  if (name == "bd-random") {
    return ReplaceSquare{3, SquareColor::kRandom, seed, Anchor::kBottomRight, 0};
  }
  if (name == "blend") return Blend{0.2, seed};
  if (name == "lc") return FourCorner{3, seed};
  if (name == "sig") return Sinusoid{20.0, 6};
  fail(ErrorKind::kParameter, "unknown trigger preset '" + name + "'");
}

// JSON ------------------------------------------------------------------------

namespace {

const char* anchor_name(Anchor a) {
  switch (a) {
    case Anchor::kBottomRight: return "bottom_right";
    case Anchor::kBottomLeft: return "bottom_left";
    case Anchor::kTopRight: return "top_right";
    case Anchor::kTopLeft: return "top_left";
  }
  return "bottom_right";
}

Anchor parse_anchor(const std::string& s) {
  if (s == "bottom_right") return Anchor::kBottomRight;
  if (s == "bottom_left") return Anchor::kBottomLeft;
  if (s == "top_right") return Anchor::kTopRight;
  if (s == "top_left") return Anchor::kTopLeft;
  fail(ErrorKind::kFormat, "trigger: unknown anchor '" + s + "'");
}

template <typename T>
T field_or(const nlohmann::ordered_json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    const auto& v = j.at(key);
    if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer() ||
          (!v.is_number_unsigned() && v.template get<long long>() < 0)) {
        fail(ErrorKind::kFormat,
             std::string("trigger: '") + key + "' must be a non-negative integer");
      }
      const auto u = v.template get<std::uint64_t>();
      if (u > std::numeric_limits<T>::max()) {
        fail(ErrorKind::kFormat, std::string("trigger: '") + key + "' too large");
      }
      return static_cast<T>(u);
    } else {
      return v.template get<T>();
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kFormat, std::string("trigger: bad '") + key + "': " + e.what());
  }
}

void check_spec(const TriggerSpec& spec) {
  if (const auto* b = std::get_if<Blend>(&spec)) {
    if (!(b->alpha > 0.0 && b->alpha < 1.0)) {
      fail(ErrorKind::kValidation, "trigger: blend alpha must lie in (0, 1)");
    }
  } else if (const auto* s = std::get_if<Sinusoid>(&spec)) {
    if (!(s->delta >= 0.0) || !std::isfinite(s->delta) || s->freq < 1) {
      fail(ErrorKind::kValidation, "trigger: sinusoid needs delta >= 0 and freq >= 1");
    }
  } else if (const auto* r = std::get_if<ReplaceSquare>(&spec)) {
    if (r->side == 0) fail(ErrorKind::kValidation, "trigger: square side must be positive");
  } else if (const auto* f = std::get_if<FourCorner>(&spec)) {
    if (f->patch_side == 0) {
      fail(ErrorKind::kValidation, "trigger: patch side must be positive");
    }
  }
}

}  // namespace

nlohmann::ordered_json to_json_value(const TriggerSpec& spec) {
  nlohmann::ordered_json j;
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, ReplaceSquare>) {
          j["variant"] = "replace_square";
          j["side"] = s.side;
          j["color"] = s.color == SquareColor::kWhite ? "white" : "random";
          j["seed"] = s.seed;
          j["anchor"] = anchor_name(s.anchor);
          j["margin"] = s.margin;
        } else if constexpr (std::is_same_v<T, FourCorner>) {
          j["variant"] = "four_corner";
          j["patch_side"] = s.patch_side;
          j["seed"] = s.seed;
        } else if constexpr (std::is_same_v<T, Blend>) {
          j["variant"] = "blend";
          j["alpha"] = s.alpha;
          j["pattern_seed"] = s.pattern_seed;
        } else {
          j["variant"] = "sinusoid";
          j["delta"] = s.delta;
          j["freq"] = s.freq;
        }
      },
      spec);
  return j;
}

TriggerSpec trigger_from_json_value(const nlohmann::ordered_json& j) {
  if (!j.is_object() || !j.contains("variant") || !j.at("variant").is_string()) {
    fail(ErrorKind::kFormat, "trigger: expected an object with a string 'variant'");
  }
  const auto variant = j.at("variant").get<std::string>();
  TriggerSpec spec;
  if (variant == "replace_square") {
    ReplaceSquare s;
    s.side = field_or<std::uint32_t>(j, "side", s.side);
    const auto color = field_or<std::string>(j, "color", "white");
    if (color == "white") {
      s.color = SquareColor::kWhite;
    } else if (color == "random") {
      s.color = SquareColor::kRandom;
    } else {
      fail(ErrorKind::kFormat, "trigger: unknown color '" + color + "'");
    }
    s.seed = field_or<std::uint64_t>(j, "seed", s.seed);
    s.anchor = parse_anchor(field_or<std::string>(j, "anchor", "bottom_right"));
    s.margin = field_or<std::uint32_t>(j, "margin", s.margin);
    spec = s;
  } else if (variant == "four_corner") {
    FourCorner s;
    s.patch_side = field_or<std::uint32_t>(j, "patch_side", s.patch_side);
    s.seed = field_or<std::uint64_t>(j, "seed", s.seed);
    spec = s;
  } else if (variant == "blend") {
    Blend s;
    s.alpha = field_or<double>(j, "alpha", s.alpha);
    s.pattern_seed = field_or<std::uint64_t>(j, "pattern_seed", s.pattern_seed);
    spec = s;
  } else if (variant == "sinusoid") {
    Sinusoid s;
    s.delta = field_or<double>(j, "delta", s.delta);
    s.freq = field_or<std::uint32_t>(j, "freq", s.freq);
    spec = s;
  } else {
    fail(ErrorKind::kFormat, "trigger: unknown variant '" + variant + "'");
  }
  check_spec(spec);
  return spec;
}

TriggerSpec trigger_from_json(const std::string& text) {
  nlohmann::ordered_json j;
  try {
    j = nlohmann::ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorKind::kFormat, std::string("trigger: ") + e.what());
  }
  return trigger_from_json_value(j);
}

std::string trigger_to_json(const TriggerSpec& spec) {
  return to_json_value(spec).dump(2) + "\n";
}

// Rendering -------------------------------------------------------------------

namespace {

struct Block {
  std::uint32_t row0, col0, side;
};

Block anchored_block(const ReplaceSquare& s, ImageShape shape) {
  const std::uint64_t need = std::uint64_t{s.side} + s.margin;
  if (need > shape.height || need > shape.width) {
    fail(ErrorKind::kParameter, "trigger: square of side " + std::to_string(s.side) +
                                    " with margin " + std::to_string(s.margin) +
                                    " does not fit a " + std::to_string(shape.height) +
                                    "x" + std::to_string(shape.width) + " image");
  }
  const std::uint32_t top = s.margin;
  const std::uint32_t bottom = shape.height - s.margin - s.side;
  const std::uint32_t left = s.margin;
  const std::uint32_t right = shape.width - s.margin - s.side;
  switch (s.anchor) {
    case Anchor::kBottomRight: return {bottom, right, s.side};
    case Anchor::kBottomLeft: return {bottom, left, s.side};
    case Anchor::kTopRight: return {top, right, s.side};
    case Anchor::kTopLeft: return {top, left, s.side};
  }
  return {bottom, right, s.side};
}

void mark(RenderedTrigger& rt, const Block& b) {
  for (std::uint32_t r = b.row0; r < b.row0 + b.side; ++r) {
    for (std::uint32_t c = b.col0; c < b.col0 + b.side; ++c) {
      rt.mask[std::size_t{r} * rt.shape.width + c] = 1;
    }
  }
}

RenderedTrigger render_replace(const ReplaceSquare& s, ImageShape shape) {
  RenderedTrigger rt;
  rt.kind = RenderedTrigger::Kind::kReplace;
  rt.shape = shape;
  rt.mask.assign(shape.plane(), 0);
  rt.pattern.assign(shape.size(), 0);
  mark(rt, anchored_block(s, shape));

  Rng rng(s.seed);
  // Random colors are drawn channel by channel, row-major over the mask.
  for (std::size_t ch = 0; ch < shape.channels; ++ch) {
    for (std::size_t px = 0; px < shape.plane(); ++px) {
      if (!rt.mask[px]) continue;
      rt.pattern[ch * shape.plane() + px] =
          s.color == SquareColor::kWhite ? std::uint8_t{255} : rng.byte();
    }
  }
  return rt;
}

RenderedTrigger render_four_corner(const FourCorner& s, ImageShape shape) {
  // The four patches must not touch each other's pixels.
  if (2 * std::uint64_t{s.patch_side} > shape.height ||
      2 * std::uint64_t{s.patch_side} > shape.width) {
    fail(ErrorKind::kParameter, "trigger: corner patches overlap on this image");
  }
  RenderedTrigger rt;
  rt.kind = RenderedTrigger::Kind::kReplace;
  rt.shape = shape;
  rt.mask.assign(shape.plane(), 0);
  rt.pattern.assign(shape.size(), 0);

  Rng rng(s.seed);
  const std::uint32_t p = s.patch_side;
  const std::array<Block, 4> corners = {Block{0, 0, p}, Block{0, shape.width - p, p},
                                        Block{shape.height - p, 0, p},
                                        Block{shape.height - p, shape.width - p, p}};
  for (const auto& b : corners) {
    mark(rt, b);
    // Each corner gets its own checkerboard phase.
    const std::uint32_t phase = static_cast<std::uint32_t>(rng.below(2));
    for (std::uint32_t r = 0; r < p; ++r) {
      for (std::uint32_t c = 0; c < p; ++c) {
        const std::uint8_t v = ((r + c + phase) % 2 == 0) ? 255 : 0;
        const std::size_t px = std::size_t{b.row0 + r} * shape.width + (b.col0 + c);
        for (std::size_t ch = 0; ch < shape.channels; ++ch) {
          rt.pattern[ch * shape.plane() + px] = v;
        }
      }
    }
  }
  return rt;
}

RenderedTrigger render_blend(const Blend& s, ImageShape shape) {
  RenderedTrigger rt;
  rt.kind = RenderedTrigger::Kind::kBlend;
  rt.shape = shape;
  rt.alpha = s.alpha;
  rt.pattern.resize(shape.size());
  Rng rng(s.pattern_seed);
  for (auto& v : rt.pattern) v = rng.byte();
  return rt;
}

RenderedTrigger render_sinusoid(const Sinusoid& s, ImageShape shape) {
  RenderedTrigger rt;
  rt.kind = RenderedTrigger::Kind::kAdditive;
  rt.shape = shape;
  rt.field.resize(shape.plane());
  for (std::size_t j = 0; j < shape.width; ++j) {
    const double v = s.delta * std::sin(2.0 * std::numbers::pi * static_cast<double>(j) *
                                        static_cast<double>(s.freq) /
                                        static_cast<double>(shape.width));
    for (std::size_t i = 0; i < shape.height; ++i) rt.field[i * shape.width + j] = v;
  }
  return rt;
}

}  // namespace

RenderedTrigger render(const TriggerSpec& spec, ImageShape shape) {
  if (shape.channels == 0 || shape.height == 0 || shape.width == 0) {
    fail(ErrorKind::kParameter, "trigger: image dimensions must be positive");
  }
  check_spec(spec);
  return std::visit(
      [&](const auto& s) -> RenderedTrigger {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, ReplaceSquare>) return render_replace(s, shape);
        else if constexpr (std::is_same_v<T, FourCorner>) return render_four_corner(s, shape);
        else if constexpr (std::is_same_v<T, Blend>) return render_blend(s, shape);
        else return render_sinusoid(s, shape);
      },
      spec);
}

void apply_inplace(std::span<std::uint8_t> image, const RenderedTrigger& rt) {
  if (image.size() != rt.shape.size()) {
    fail(ErrorKind::kParameter, "trigger: image has " + std::to_string(image.size()) +
                                    " values, trigger expects " +
                                    std::to_string(rt.shape.size()));
  }
  const std::size_t plane = rt.shape.plane();
  switch (rt.kind) {
    case RenderedTrigger::Kind::kReplace:
      for (std::size_t i = 0; i < image.size(); ++i) {
        if (rt.mask[i % plane]) image[i] = rt.pattern[i];
      }
      break;
    case RenderedTrigger::Kind::kBlend:
      for (std::size_t i = 0; i < image.size(); ++i) {
        image[i] = round_clamp_u8((1.0 - rt.alpha) * image[i] + rt.alpha * rt.pattern[i]);
      }
      break;
    case RenderedTrigger::Kind::kAdditive:
      for (std::size_t i = 0; i < image.size(); ++i) {
        image[i] = round_clamp_u8(static_cast<double>(image[i]) + rt.field[i % plane]);
      }
      break;
  }
}

std::vector<std::uint8_t> apply(std::span<const std::uint8_t> image,
                                const RenderedTrigger& rt) {
  std::vector<std::uint8_t> out(image.begin(), image.end());
  apply_inplace(out, rt);
  return out;
}

}  // namespace a2x
