#include "pedk/data/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "pedk/error.hpp"
#include "pedk/parallel.hpp"
#include "pedk/patching.hpp"

namespace pedk::data {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

// Part centers in object units (u along the object axis, v downwards).
std::array<double, 2> part_offset(PartKind part) {
  switch (part) {
    case PartKind::receiver:
      return {0.0, 0.0};
    case PartKind::barrel:
      return {1.9, -0.15};
    case PartKind::magazine:
      return {0.25, 0.95};
    case PartKind::stock:
      return {-1.5, 0.05};
  }
  return {0.0, 0.0};
}

// Point about which the object is rotated and shifted.
constexpr std::array<double, 2> kObjectPivot{0.4, 0.45};

struct Pose {
  double cx, cy;   // pixels
  double angle;    // radians
  double unit;     // pixels per local unit
  double radius;   // bounding radius in local units
};

Rgb jitter(const Rgb& c, double factor) {
  const auto f = static_cast<float>(factor);
  return {std::clamp(c.r * f, 0.0f, 1.0f), std::clamp(c.g * f, 0.0f, 1.0f), std::clamp(c.b * f, 0.0f, 1.0f)};
}

void put(Image& img, Index y, Index x, const Rgb& c) {
  img(0, y, x) = c.r;
  img(1, y, x) = c.g;
  img(2, y, x) = c.b;
}

// Paints every pixel whose local coordinates satisfy `shade(u, v, out)`.
template <typename Shade>
void draw(Image& img, const Pose& pose, Shade&& shade) {
  const Index h = img.dim(1), w = img.dim(2);
  const double reach = pose.radius * pose.unit + 1.0;
  const auto y0 = std::max<Index>(0, static_cast<Index>(std::floor(pose.cy - reach)));
  const auto y1 = std::min<Index>(h - 1, static_cast<Index>(std::ceil(pose.cy + reach)));
  const auto x0 = std::max<Index>(0, static_cast<Index>(std::floor(pose.cx - reach)));
  const auto x1 = std::min<Index>(w - 1, static_cast<Index>(std::ceil(pose.cx + reach)));
  const double c = std::cos(pose.angle), s = std::sin(pose.angle);
  Rgb color;
  for (Index y = y0; y <= y1; ++y) {
    for (Index x = x0; x <= x1; ++x) {
      const double dx = static_cast<double>(x) - pose.cx, dy = static_cast<double>(y) - pose.cy;
      const double u = (c * dx + s * dy) / pose.unit;
      const double v = (-s * dx + c * dy) / pose.unit;
      if (shade(u, v, color)) put(img, y, x, color);
    }
  }
}

int parity(double a, double b) {
  return static_cast<int>(std::floor(a) + std::floor(b)) & 1;
}

void draw_part(Image& img, PartKind part, const Pose& pose, const Rgb& a, const Rgb& b) {
  switch (part) {
    case PartKind::receiver:
      draw(img, {pose.cx, pose.cy, pose.angle, pose.unit, 0.9}, [&](double u, double v, Rgb& out) {
        if (std::abs(u) > 0.8 || std::abs(v) > 0.4) return false;
        out = parity(u / 0.2, v / 0.2) ? a : b;
        return true;
      });
      break;
    case PartKind::barrel:
      draw(img, {pose.cx, pose.cy, pose.angle, pose.unit, 1.2}, [&](double u, double v, Rgb& out) {
        const bool tube = std::abs(u) <= 1.1 && std::abs(v) <= 0.15;
        const bool muzzle = u >= 0.85 && u <= 1.1 && std::abs(v) <= 0.24;
        if (!tube && !muzzle) return false;
        out = (static_cast<int>(std::floor((v + 0.3) / 0.1)) & 1) ? a : b;
        return true;
      });
      break;
    case PartKind::magazine:
      draw(img, {pose.cx, pose.cy, pose.angle, pose.unit, 0.7}, [&](double u, double v, Rgb& out) {
        if (std::abs(v) > 0.55) return false;
        const double t = (v + 0.55) / 1.1;
        if (std::abs(u - 0.3 * t * t) > 0.27) return false;
        out = (static_cast<int>(std::floor((v + 0.55) / 0.16)) & 1) ? a : b;
        return true;
      });
      break;
    case PartKind::stock:
      draw(img, {pose.cx, pose.cy, pose.angle, pose.unit, 0.9}, [&](double u, double v, Rgb& out) {
        if (std::abs(u) > 0.7) return false;
        const double half = 0.2 + 0.3 * (0.7 - u) / 1.4;
        if (std::abs(v) > half) return false;
        const double gu = u / 0.25 - std::round(u / 0.25), gv = v / 0.25 - std::round(v / 0.25);
        out = (gu * gu + gv * gv) * 0.0625 < 0.07 * 0.07 ? b : a;
        return true;
      });
      break;
  }
}

const Rgb& pick(const std::vector<Rgb>& palette, Rng& rng) { return palette[rng.index(palette.size())]; }

void fill_background(Image& img, const SynthConfig& config, Rng& rng) {
  const Rgb a = jitter(pick(config.clutter_palette, rng), rng.uniform(0.8, 1.2));
  const Rgb b = jitter(pick(config.clutter_palette, rng), rng.uniform(0.8, 1.2));
  const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const double dx = std::cos(angle), dy = std::sin(angle);
  const Index h = img.dim(1), w = img.dim(2);
  const double span = static_cast<double>(std::max(h, w));
  for (Index y = 0; y < h; ++y) {
    for (Index x = 0; x < w; ++x) {
      const double t = std::clamp(0.5 + ((x - w / 2.0) * dx + (y - h / 2.0) * dy) / span, 0.0, 1.0);
      const double n = 0.03 * (rng.uniform() - 0.5);
      img(0, y, x) = static_cast<float>(std::clamp(a.r + t * (b.r - a.r) + n, 0.0, 1.0));
      img(1, y, x) = static_cast<float>(std::clamp(a.g + t * (b.g - a.g) + n, 0.0, 1.0));
      img(2, y, x) = static_cast<float>(std::clamp(a.b + t * (b.b - a.b) + n, 0.0, 1.0));
    }
  }
}

// One distractor: rectangle, ellipse, triangle or bar with a solid, striped,
// checkered or noisy fill.
void draw_clutter_shape(Image& img, const SynthConfig& config, Rng& rng) {
  const double side = static_cast<double>(img.dim(1));
  const double a = rng.uniform(0.04, 0.22) * side;
  const double b = a * rng.uniform(0.3, 1.0);
  const Pose pose{rng.uniform(0.0, side), rng.uniform(0.0, side), rng.uniform(0.0, 2.0 * std::numbers::pi), 1.0,
                  std::hypot(a, b)};
  const int kind = static_cast<int>(rng.index(4));
  const int texture = static_cast<int>(rng.index(4));
  const Rgb c0 = jitter(pick(config.clutter_palette, rng), rng.uniform(0.8, 1.2));
  const Rgb c1 = jitter(pick(config.clutter_palette, rng), rng.uniform(0.8, 1.2));
  const double period = rng.uniform(8.0, 16.0);
  draw(img, pose, [&](double u, double v, Rgb& out) {
    bool inside = false;
    switch (kind) {
      case 0:
        inside = std::abs(u) <= a && std::abs(v) <= b;
        break;
      case 1:
        inside = (u / a) * (u / a) + (v / b) * (v / b) <= 1.0;
        break;
      case 2:
        inside = v >= -b && v <= b && std::abs(u) <= a * (v + b) / (2.0 * b);
        break;
      default:
        inside = std::abs(u) <= a && std::abs(v) <= std::max(2.0, 0.25 * b);
        break;
    }
    if (!inside) return false;
    switch (texture) {
      case 0:
        out = c0;
        break;
      case 1:
        out = (static_cast<int>(std::floor(v / period)) & 1) ? c0 : c1;
        break;
      case 2:
        out = parity(u / period, v / period) ? c0 : c1;
        break;
      default:
        out = rng.bernoulli(0.5) ? c0 : c1;
        break;
    }
    return true;
  });
}

void draw_clutter(Image& img, const SynthConfig& config, Rng& rng) {
  // Poisson count by inversion.
  const double limit = std::exp(-config.clutter_density);
  int count = 0;
  for (double p = rng.uniform(); p > limit; p *= rng.uniform()) ++count;
  for (int i = 0; i < count; ++i) draw_clutter_shape(img, config, rng);
}

Sample make_sample(Image image, Label label, std::optional<PartKind> part, std::string source_id) {
  Sample s;
  s.image = std::move(image);
  s.label = label;
  s.part = part;
  s.origin = Origin::original;
  s.source_id = std::move(source_id);
  return s;
}

std::string pool_id(const std::string& prefix, std::size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%05zu", i);
  return prefix + "-" + buf;
}

// Crops a window centered near (cx, cy), kept inside the scene, and rescales
// it to the patch side.
Image crop_patch(const SynthConfig& config, const Image& scene, double cx, double cy, Rng& rng) {
  const Index side = scene.dim(1);
  const Index window = patching::window_side(side, config.window_ratio);
  const double jitter = 0.15 * static_cast<double>(window);
  cx += rng.uniform(-jitter, jitter);
  cy += rng.uniform(-jitter, jitter);
  const auto x = std::clamp<Index>(std::lround(cx - window / 2.0), 0, side - window);
  const auto y = std::clamp<Index>(std::lround(cy - window / 2.0), 0, side - window);
  return quantize(patching::extract_rescale(scene, {x, y, window, window}, config.patch_side));
}

Image random_crop(const SynthConfig& config, const Image& scene, Rng& rng) {
  const Index side = scene.dim(1);
  const Index window = patching::window_side(side, config.window_ratio);
  const auto x = static_cast<Index>(rng.index(static_cast<std::uint64_t>(side - window + 1)));
  const auto y = static_cast<Index>(rng.index(static_cast<std::uint64_t>(side - window + 1)));
  return quantize(patching::extract_rescale(scene, {x, y, window, window}, config.patch_side));
}

struct QuantizedRanges {
  int rotation, scale_lo, scale_hi, shift;
};

QuantizedRanges quantized_ranges(const SynthConfig& config) {
  return {static_cast<int>(std::floor(config.max_rotation_deg + 1e-9)),
          static_cast<int>(std::ceil(config.min_scale * 100.0 - 1e-9)),
          static_cast<int>(std::floor(config.max_scale * 100.0 + 1e-9)),
          static_cast<int>(std::floor(config.max_shift * static_cast<double>(config.scene_side) + 1e-9))};
}

void check(bool ok, const std::string& field, const std::string& why) {
  if (!ok) throw ConfigError("invalid synth config field '" + field + "': " + why);
}

}  // namespace

std::map<PartKind, std::vector<Rgb>> SynthConfig::default_part_palettes() {
  return {
      {PartKind::barrel, {{0.16f, 0.16f, 0.18f}, {0.42f, 0.42f, 0.46f}}},
      {PartKind::magazine, {{0.22f, 0.19f, 0.15f}, {0.48f, 0.42f, 0.33f}}},
      {PartKind::receiver, {{0.13f, 0.15f, 0.13f}, {0.36f, 0.41f, 0.35f}}},
      {PartKind::stock, {{0.20f, 0.17f, 0.17f}, {0.50f, 0.44f, 0.44f}}},
  };
}

std::vector<Rgb> SynthConfig::default_clutter_palette() {
  return {{0.15f, 0.15f, 0.17f}, {0.40f, 0.40f, 0.44f}, {0.22f, 0.19f, 0.15f}, {0.47f, 0.41f, 0.33f},
          {0.36f, 0.41f, 0.35f}, {0.62f, 0.58f, 0.52f}, {0.75f, 0.73f, 0.70f}, {0.55f, 0.35f, 0.25f},
          {0.30f, 0.38f, 0.52f}, {0.68f, 0.62f, 0.40f}, {0.85f, 0.84f, 0.80f}, {0.45f, 0.30f, 0.32f}};
}

void SynthConfig::validate() const {
  check(scene_side >= 16, "scene_side", "must be at least 16");
  check(patch_side >= 8, "patch_side", "must be at least 8");
  check(window_ratio > 0.0 && window_ratio <= 1.0, "window_ratio", "must lie in (0,1]");
  check(static_cast<double>(scene_side) * window_ratio >= 8.0, "window_ratio", "window below 8px");
  check(part_positives > 0, "part_positives", "must be positive");
  check(part_negatives > 0, "part_negatives", "must be positive");
  check(other_part_share >= 0.0 && other_part_share <= 1.0, "other_part_share", "must lie in [0,1]");
  check(std::abs(component_ratios[0] + component_ratios[1] + component_ratios[2] - 1.0) < 1e-9 &&
            *std::min_element(component_ratios.begin(), component_ratios.end()) >= 0.0,
        "component_ratios", "must be nonnegative and sum to 1");
  check(augment_copies >= 0, "augment_copies", "must be >= 0");
  check(whole_positive_split[0] + whole_positive_split[1] + whole_positive_split[2] > 0, "whole_positive_split",
        "must not be all zero");
  check(whole_negative_split[0] + whole_negative_split[1] + whole_negative_split[2] > 0, "whole_negative_split",
        "must not be all zero");
  check(object_scale > 0.0 && object_scale < 0.5, "object_scale", "must lie in (0,0.5)");
  check(min_scale > 0.0 && min_scale <= max_scale, "min_scale", "must be positive and <= max_scale");
  check(max_rotation_deg >= 0.0 && max_rotation_deg <= 180.0, "max_rotation_deg", "must lie in [0,180]");
  check(max_shift >= 0.0 && max_shift < 0.5, "max_shift", "must lie in [0,0.5)");
  check(part_jitter >= 0.0, "part_jitter", "must be >= 0");
  check(occlusion_probability >= 0.0 && occlusion_probability <= 1.0, "occlusion_probability", "must lie in [0,1]");
  check(clutter_density >= 0.0 && clutter_density <= 200.0, "clutter_density", "must lie in [0,200]");
  check(!clutter_palette.empty(), "clutter_palette", "must not be empty");
  for (PartKind p : kAllParts) {
    const auto it = part_palettes.find(p);
    check(it != part_palettes.end() && it->second.size() >= 2, "part_palettes",
          "needs two colors for " + to_string(p));
  }
}

void to_json(nlohmann::json& j, const SynthConfig& c) {
  const auto colors = [](const std::vector<Rgb>& palette) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& rgb : palette) out.push_back({rgb.r, rgb.g, rgb.b});
    return out;
  };
  nlohmann::json palettes = nlohmann::json::object();
  for (const auto& [part, palette] : c.part_palettes) palettes[to_string(part)] = colors(palette);
  j = {{"seed", c.seed},
       {"scene_side", c.scene_side},
       {"patch_side", c.patch_side},
       {"window_ratio", c.window_ratio},
       {"part_positives", c.part_positives},
       {"part_negatives", c.part_negatives},
       {"other_part_share", c.other_part_share},
       {"component_ratios", c.component_ratios},
       {"augment_copies", c.augment_copies},
       {"train_cap_per_class", c.train_cap_per_class},
       {"whole_positive_split", c.whole_positive_split},
       {"whole_negative_split", c.whole_negative_split},
       {"object_scale", c.object_scale},
       {"min_scale", c.min_scale},
       {"max_scale", c.max_scale},
       {"max_rotation_deg", c.max_rotation_deg},
       {"max_shift", c.max_shift},
       {"part_jitter", c.part_jitter},
       {"occlusion_probability", c.occlusion_probability},
       {"clutter_density", c.clutter_density},
       {"part_palettes", palettes},
       {"clutter_palette", colors(c.clutter_palette)}};
}

void from_json(const nlohmann::json& j, SynthConfig& c) {
  if (!j.is_object()) throw ConfigError("synth config must be a JSON object");
  const auto parse_colors = [](const nlohmann::json& value, const std::string& field) {
    std::vector<Rgb> out;
    for (const auto& rgb : value) {
      check(rgb.is_array() && rgb.size() == 3, field, "colors must be [r,g,b] triples");
      out.push_back({rgb[0].get<float>(), rgb[1].get<float>(), rgb[2].get<float>()});
    }
    return out;
  };
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "seed") c.seed = value.get<std::uint64_t>();
      else if (key == "scene_side") c.scene_side = value.get<Index>();
      else if (key == "patch_side") c.patch_side = value.get<Index>();
      else if (key == "window_ratio") c.window_ratio = value.get<double>();
      else if (key == "part_positives") c.part_positives = value.get<std::size_t>();
      else if (key == "part_negatives") c.part_negatives = value.get<std::size_t>();
      else if (key == "other_part_share") c.other_part_share = value.get<double>();
      else if (key == "component_ratios") c.component_ratios = value.get<SplitRatios>();
      else if (key == "augment_copies") c.augment_copies = value.get<int>();
      else if (key == "train_cap_per_class") c.train_cap_per_class = value.get<std::size_t>();
      else if (key == "whole_positive_split") c.whole_positive_split = value.get<std::array<std::size_t, 3>>();
      else if (key == "whole_negative_split") c.whole_negative_split = value.get<std::array<std::size_t, 3>>();
      else if (key == "object_scale") c.object_scale = value.get<double>();
      else if (key == "min_scale") c.min_scale = value.get<double>();
      else if (key == "max_scale") c.max_scale = value.get<double>();
      else if (key == "max_rotation_deg") c.max_rotation_deg = value.get<double>();
      else if (key == "max_shift") c.max_shift = value.get<double>();
      else if (key == "part_jitter") c.part_jitter = value.get<double>();
      else if (key == "occlusion_probability") c.occlusion_probability = value.get<double>();
      else if (key == "clutter_density") c.clutter_density = value.get<double>();
      else if (key == "clutter_palette") c.clutter_palette = parse_colors(value, key);
      else if (key == "part_palettes") {
        c.part_palettes.clear();
        for (const auto& [part, colors] : value.items()) c.part_palettes[part_from_string(part)] = parse_colors(colors, key);
      } else {
        throw ConfigError("unknown synth config field '" + key + "'");
      }
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("invalid synth config field '" + key + "': " + e.what());
    } catch (const ConfigError& e) {
      const std::string what = e.what();
      if (what.find('\'' + key + '\'') != std::string::npos) throw;
      throw ConfigError("invalid synth config field '" + key + "': " + what);
    }
  }
  c.validate();
}

std::uint64_t arrangement_capacity(const SynthConfig& config, bool allow_missing) {
  const auto r = quantized_ranges(config);
  const std::uint64_t rotations = 2 * static_cast<std::uint64_t>(r.rotation) + 1;
  const std::uint64_t scales = r.scale_hi >= r.scale_lo ? static_cast<std::uint64_t>(r.scale_hi - r.scale_lo + 1) : 1;
  const std::uint64_t shifts = 2 * static_cast<std::uint64_t>(r.shift) + 1;
  const std::uint64_t missing = allow_missing && config.occlusion_probability > 0.0 ? 5 : 1;
  return rotations * scales * shifts * shifts * missing;
}

std::vector<Arrangement> draw_arrangements(const SynthConfig& config, std::size_t count, bool allow_missing,
                                           std::uint64_t seed) {
  const std::uint64_t capacity = arrangement_capacity(config, allow_missing);
  if (count > capacity) {
    throw ConfigError("config demands " + std::to_string(count) + " unique object arrangements but the placement " +
                      "rules allow only " + std::to_string(capacity));
  }
  const auto r = quantized_ranges(config);
  const bool occlude = allow_missing && config.occlusion_probability > 0.0;
  const int scale_hi = std::max(r.scale_hi, r.scale_lo);
  Rng rng(seed);
  std::vector<Arrangement> out;
  out.reserve(count);
  if (2 * count > capacity) {
    // Dense request: enumerate everything and take a random subset.
    std::vector<Arrangement> all;
    all.reserve(capacity);
    for (int rot = -r.rotation; rot <= r.rotation; ++rot) {
      for (int sc = r.scale_lo; sc <= scale_hi; ++sc) {
        for (int sx = -r.shift; sx <= r.shift; ++sx) {
          for (int sy = -r.shift; sy <= r.shift; ++sy) {
            all.push_back({rot, sc, sx, sy, std::nullopt});
            if (occlude) {
              for (PartKind p : kAllParts) all.push_back({rot, sc, sx, sy, p});
            }
          }
        }
      }
    }
    rng.shuffle(all.begin(), all.end());
    all.resize(count);
    return all;
  }
  std::set<Arrangement> seen;
  while (out.size() < count) {
    Arrangement a;
    a.rotation_deg = static_cast<int>(rng.index(2 * static_cast<std::uint64_t>(r.rotation) + 1)) - r.rotation;
    a.scale_percent = r.scale_lo + static_cast<int>(rng.index(static_cast<std::uint64_t>(scale_hi - r.scale_lo + 1)));
    a.shift_x = static_cast<int>(rng.index(2 * static_cast<std::uint64_t>(r.shift) + 1)) - r.shift;
    a.shift_y = static_cast<int>(rng.index(2 * static_cast<std::uint64_t>(r.shift) + 1)) - r.shift;
    if (occlude && rng.bernoulli(config.occlusion_probability)) a.missing = kAllParts[rng.index(4)];
    if (seen.insert(a).second) out.push_back(a);
  }
  return out;
}

Scene render_clutter_scene(const SynthConfig& config, std::uint64_t seed) {
  Rng rng(seed);
  Scene scene{make_image(config.scene_side, config.scene_side), {}};
  fill_background(scene.image, config, rng);
  draw_clutter(scene.image, config, rng);
  scene.image = quantize(scene.image);
  return scene;
}

Scene render_object_scene(const SynthConfig& config, const Arrangement& arrangement, std::uint64_t seed) {
  Rng rng(seed);
  Scene scene{make_image(config.scene_side, config.scene_side), {}};
  fill_background(scene.image, config, rng);
  draw_clutter(scene.image, config, rng);

  const double side = static_cast<double>(config.scene_side);
  const double unit = config.object_scale * side * arrangement.scale_percent / 100.0;
  const double angle = arrangement.rotation_deg * kDegToRad;
  const double c = std::cos(angle), s = std::sin(angle);
  const double center_x = side / 2.0 + arrangement.shift_x;
  const double center_y = side / 2.0 + arrangement.shift_y;
  const double brightness = rng.uniform(0.85, 1.15);
  for (PartKind part : kAllParts) {
    // Jitter is drawn for every part so a missing part does not shift the
    // random stream of the others.
    const double ju = rng.uniform(-config.part_jitter, config.part_jitter);
    const double jv = rng.uniform(-config.part_jitter, config.part_jitter);
    const double jangle = rng.uniform(-4.0, 4.0) * kDegToRad;
    if (arrangement.missing == part) continue;
    const auto [ou, ov] = part_offset(part);
    const double u = (ou - kObjectPivot[0] + ju) * unit;
    const double v = (ov - kObjectPivot[1] + jv) * unit;
    const double px = center_x + c * u - s * v;
    const double py = center_y + s * u + c * v;
    const auto& palette = config.part_palettes.at(part);
    draw_part(scene.image, part, {px, py, angle + jangle, unit, 0.0}, jitter(palette[0], brightness),
              jitter(palette[1], brightness));
    scene.part_centers[part] = {px, py};
  }
  scene.image = quantize(scene.image);
  return scene;
}

SynthPools synth_generate(const SynthConfig& config, std::size_t workers) {
  config.validate();
  SynthPools pools;
  const std::uint64_t master = config.seed;

  for (PartKind part : kAllParts) {
    const std::string name = to_string(part);
    const auto positives = draw_arrangements(config, config.part_positives, false, derive_seed(master, name + "-pos-arr"));
    auto& pos = pools.part_positive[part];
    pos.resize(positives.size());
    parallel_for(positives.size(), workers, [&](std::size_t i) {
      const auto seed = derive_seed(master, name + "-pos", i);
      const Scene scene = render_object_scene(config, positives[i], seed);
      Rng rng(derive_seed(seed, "crop"));
      const auto [cx, cy] = scene.part_centers.at(part);
      pos[i] = make_sample(crop_patch(config, scene.image, cx, cy, rng), Label::positive, part,
                           pool_id(name + "-pos", i));
    });

    const auto other_count = static_cast<std::size_t>(
        std::ceil(config.other_part_share * static_cast<double>(config.part_negatives) - 1e-9));
    auto others = draw_arrangements(config, other_count, false, derive_seed(master, name + "-other-arr"));
    for (auto& a : others) a.missing = part;
    auto& neg = pools.part_negative[part];
    neg.resize(config.part_negatives);
    parallel_for(config.part_negatives, workers, [&](std::size_t i) {
      const auto seed = derive_seed(master, name + "-neg", i);
      Rng rng(derive_seed(seed, "crop"));
      if (i < other_count) {
        const Scene scene = render_object_scene(config, others[i], seed);
        std::vector<PartKind> present;
        for (PartKind p : kAllParts) {
          if (p != part) present.push_back(p);
        }
        const PartKind center_on = present[rng.index(present.size())];
        const auto [cx, cy] = scene.part_centers.at(center_on);
        neg[i] = make_sample(crop_patch(config, scene.image, cx, cy, rng), Label::negative, center_on,
                             pool_id(name + "-neg", i));
      } else {
        const Scene scene = render_clutter_scene(config, seed);
        neg[i] = make_sample(random_crop(config, scene.image, rng), Label::negative, std::nullopt,
                             pool_id(name + "-neg", i));
      }
    });
  }

  const auto& wp = config.whole_positive_split;
  const auto& wn = config.whole_negative_split;
  const std::size_t n_pos = wp[0] + wp[1] + wp[2], n_neg = wn[0] + wn[1] + wn[2];
  const auto arrangements = draw_arrangements(config, n_pos, true, derive_seed(master, "whole-pos-arr"));
  pools.whole_positive.resize(n_pos);
  parallel_for(n_pos, workers, [&](std::size_t i) {
    Scene scene = render_object_scene(config, arrangements[i], derive_seed(master, "whole-pos", i));
    pools.whole_positive[i] =
        make_sample(std::move(scene.image), Label::positive, std::nullopt, pool_id("whole-pos", i));
  });
  pools.whole_negative.resize(n_neg);
  parallel_for(n_neg, workers, [&](std::size_t i) {
    Scene scene = render_clutter_scene(config, derive_seed(master, "whole-neg", i));
    pools.whole_negative[i] =
        make_sample(std::move(scene.image), Label::negative, std::nullopt, pool_id("whole-neg", i));
  });
  return pools;
}

namespace {

SplitRatios ratios_from_counts(const std::array<std::size_t, 3>& counts) {
  const double total = static_cast<double>(counts[0] + counts[1] + counts[2]);
  return {counts[0] / total, counts[1] / total, counts[2] / total};
}

void append(std::vector<Sample>& to, std::vector<Sample>& from) {
  for (auto& s : from) to.push_back(std::move(s));
}

}  // namespace

DatasetCollection assemble_datasets(SynthPools pools, const SynthConfig& config) {
  DatasetCollection collection;
  const std::uint64_t master = config.seed;
  for (PartKind part : kAllParts) {
    const std::string name = to_string(part);
    std::vector<Sample> samples = std::move(pools.part_positive[part]);
    append(samples, pools.part_negative[part]);
    PartitionedDataset d = partition(std::move(samples), config.component_ratios, derive_seed(master, name + "-split"));
    d.name = name;
    d.part = part;
    if (config.augment_copies > 0) augment_training(d, config.augment_copies, derive_seed(master, name + "-augment"));
    if (config.train_cap_per_class > 0) cap_training(d, config.train_cap_per_class, derive_seed(master, name + "-cap"));
    collection.datasets.push_back(std::move(d));
  }

  PartitionedDataset whole = partition(std::move(pools.whole_positive), ratios_from_counts(config.whole_positive_split),
                                       derive_seed(master, "whole-pos-split"));
  PartitionedDataset negatives = partition(std::move(pools.whole_negative),
                                           ratios_from_counts(config.whole_negative_split),
                                           derive_seed(master, "whole-neg-split"));
  append(whole.train, negatives.train);
  append(whole.validation, negatives.validation);
  append(whole.test, negatives.test);
  whole.name = "whole";
  // Only positives are augmented, up to the negative training count.
  if (config.augment_copies > 0) {
    augment_training_to(whole, Label::positive, count_labels(whole.train).negatives,
                        derive_seed(master, "whole-augment"));
  }
  if (config.train_cap_per_class > 0) cap_training(whole, config.train_cap_per_class, derive_seed(master, "whole-cap"));
  collection.datasets.push_back(std::move(whole));
  return collection;
}

}  // namespace pedk::data
