#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pedk/data/image.hpp"
#include "pedk/parts.hpp"
#include "pedk/rng.hpp"

namespace pedk::data {

enum class Label { negative = 0, positive = 1 };
enum class Origin { original, augmented };
enum class Split { train, validation, test };

std::string to_string(Label label);
std::string to_string(Origin origin);
std::string to_string(Split split);
Label label_from_string(const std::string& text);
Origin origin_from_string(const std::string& text);
Split split_from_string(const std::string& text);

struct Sample {
  Image image;
  Label label = Label::negative;
  // Part whose glyph the sample is centered on, if any.
  std::optional<PartKind> part;
  Origin origin = Origin::original;
  // Shared by an original and all of its augmented copies.
  std::string source_id;
  // Path relative to the dataset root; empty until written.
  std::string path;
};

struct SplitCounts {
  std::size_t positives = 0;
  std::size_t negatives = 0;
  std::size_t total() const { return positives + negatives; }
};

SplitCounts count_labels(const std::vector<Sample>& samples);

// One training target: a component part, or the whole object when `part` is
// empty.
struct PartitionedDataset {
  std::string name;
  std::optional<PartKind> part;
  std::vector<Sample> train;
  std::vector<Sample> validation;
  std::vector<Sample> test;

  std::vector<Sample>& split(Split s);
  const std::vector<Sample>& split(Split s) const;
};

// Fractions for (train, validation, test).
using SplitRatios = std::array<double, 3>;

inline constexpr SplitRatios kComponentRatios{0.80, 0.16, 0.04};

// Shuffles by `seed`, then splits each label separately: validation and test
// take floor(n * ratio), the remainder goes to train.
PartitionedDataset partition(std::vector<Sample> samples, const SplitRatios& ratios, std::uint64_t seed);

// Random similarity transform; rotation in degrees, translation as a fraction
// of the side, scale as a factor.
struct AugmentParams {
  double rotation_deg = 0.0;
  double shift_x = 0.0;
  double shift_y = 0.0;
  double scale = 1.0;
};

struct AugmentRanges {
  double max_rotation_deg = 25.0;
  double max_shift = 0.10;
  double min_scale = 0.85;
  double max_scale = 1.15;
};

AugmentParams draw_augment_params(Rng& rng, const AugmentRanges& ranges = {});

// Resamples `image` under the transform about its center; pixels mapping
// outside the frame replicate the nearest edge.
Image apply_transform(const Image& image, const AugmentParams& params);

// k independently transformed copies of an original sample.
std::vector<Sample> augment(const Sample& sample, int k, std::uint64_t seed, const AugmentRanges& ranges = {});

// Adds k augmented copies of every original training sample.
void augment_training(PartitionedDataset& dataset, int k, std::uint64_t seed, const AugmentRanges& ranges = {});

// Adds augmented copies of the original training samples carrying `label`
// until that label has `target` training samples; copies are spread as evenly
// as possible over the originals.
void augment_training_to(PartitionedDataset& dataset, Label label, std::size_t target, std::uint64_t seed,
                         const AugmentRanges& ranges = {});

// Keeps round(fraction * n) training samples per label; validation and test
// are untouched.
PartitionedDataset subsample_training(const PartitionedDataset& dataset, double fraction, std::uint64_t seed);

// Caps each label of the training split at `per_class` samples.
void cap_training(PartitionedDataset& dataset, std::size_t per_class, std::uint64_t seed);

// Throws SplitLeakError if a source_id appears in more than one split.
void check_no_leakage(const PartitionedDataset& dataset);

}  // namespace pedk::data
