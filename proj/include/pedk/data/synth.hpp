#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include <json.hpp>

#include "pedk/data/dataset.hpp"
#include "pedk/data/manifest.hpp"

namespace pedk::data {

struct Rgb {
  float r = 0, g = 0, b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

// Everything that determines a generated corpus. The object is a composite
// of the four part glyphs laid out in object units; `object_scale` converts
// one unit into a fraction of the scene side.
struct SynthConfig {
  std::uint64_t seed = 1;
  Index scene_side = 192;
  Index patch_side = 96;
  double window_ratio = 0.5;

  // Per-part pools before partitioning.
  std::size_t part_positives = 500;
  std::size_t part_negatives = 500;
  // Share of each part's negatives that are centered on a different part.
  double other_part_share = 0.25;
  SplitRatios component_ratios = kComponentRatios;
  int augment_copies = 3;
  // Training samples kept per class after augmentation; 0 keeps all.
  std::size_t train_cap_per_class = 100;

  // Whole-object corpus, given as (train, validation, test) counts.
  std::array<std::size_t, 3> whole_positive_split{100, 80, 20};
  std::array<std::size_t, 3> whole_negative_split{200, 80, 20};

  // Placement rules.
  double object_scale = 0.12;
  double min_scale = 0.85;
  double max_scale = 1.10;
  double max_rotation_deg = 30.0;
  double max_shift = 0.15;
  double part_jitter = 0.06;
  double occlusion_probability = 0.15;

  double clutter_density = 10.0;
  std::map<PartKind, std::vector<Rgb>> part_palettes = default_part_palettes();
  std::vector<Rgb> clutter_palette = default_clutter_palette();

  static std::map<PartKind, std::vector<Rgb>> default_part_palettes();
  static std::vector<Rgb> default_clutter_palette();

  // Throws ConfigError naming the offending field.
  void validate() const;
};

void to_json(nlohmann::json& j, const SynthConfig& config);
// Rejects unknown fields; missing fields keep their defaults.
void from_json(const nlohmann::json& j, SynthConfig& config);

// Quantized pose of one object instance. Two instances with equal
// arrangements render the same object geometry.
struct Arrangement {
  int rotation_deg = 0;
  int scale_percent = 100;
  int shift_x = 0;
  int shift_y = 0;
  // Part left out of the scene, if any.
  std::optional<PartKind> missing;

  friend auto operator<=>(const Arrangement&, const Arrangement&) = default;
};

// Number of distinct arrangements the placement rules allow.
std::uint64_t arrangement_capacity(const SynthConfig& config, bool allow_missing);

// Draws `count` pairwise distinct arrangements. Throws ConfigError if the
// rules cannot produce that many.
std::vector<Arrangement> draw_arrangements(const SynthConfig& config, std::size_t count, bool allow_missing,
                                           std::uint64_t seed);

// Rendered scene plus the pixel centers of the parts it contains.
struct Scene {
  Image image;
  std::map<PartKind, std::array<double, 2>> part_centers;  // (x, y)
};

Scene render_clutter_scene(const SynthConfig& config, std::uint64_t seed);
Scene render_object_scene(const SynthConfig& config, const Arrangement& arrangement, std::uint64_t seed);

// Raw pools before partitioning.
struct SynthPools {
  std::map<PartKind, std::vector<Sample>> part_positive;
  std::map<PartKind, std::vector<Sample>> part_negative;
  std::vector<Sample> whole_positive;
  std::vector<Sample> whole_negative;
};

SynthPools synth_generate(const SynthConfig& config, std::size_t workers = 1);

// Partitions, augments and caps the pools into the five training corpora:
// one per part plus "whole".
DatasetCollection assemble_datasets(SynthPools pools, const SynthConfig& config);

}  // namespace pedk::data
