#include "pedk/data/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>

#include "pedk/error.hpp"

namespace pedk::data {

std::string to_string(Label label) { return label == Label::positive ? "positive" : "negative"; }

std::string to_string(Origin origin) { return origin == Origin::original ? "original" : "augmented"; }

std::string to_string(Split split) {
  switch (split) {
    case Split::train:
      return "train";
    case Split::validation:
      return "validation";
    case Split::test:
      return "test";
  }
  return "unknown";
}

Label label_from_string(const std::string& text) {
  if (text == "positive") return Label::positive;
  if (text == "negative") return Label::negative;
  throw DataError("unknown label '" + text + "'");
}

Origin origin_from_string(const std::string& text) {
  if (text == "original") return Origin::original;
  if (text == "augmented") return Origin::augmented;
  throw DataError("unknown origin '" + text + "'");
}

Split split_from_string(const std::string& text) {
  if (text == "train") return Split::train;
  if (text == "validation") return Split::validation;
  if (text == "test") return Split::test;
  throw DataError("unknown split '" + text + "'");
}

SplitCounts count_labels(const std::vector<Sample>& samples) {
  SplitCounts counts;
  for (const auto& s : samples) (s.label == Label::positive ? counts.positives : counts.negatives)++;
  return counts;
}

std::vector<Sample>& PartitionedDataset::split(Split s) {
  return s == Split::train ? train : s == Split::validation ? validation : test;
}

const std::vector<Sample>& PartitionedDataset::split(Split s) const {
  return s == Split::train ? train : s == Split::validation ? validation : test;
}

PartitionedDataset partition(std::vector<Sample> samples, const SplitRatios& ratios, std::uint64_t seed) {
  if (samples.empty()) throw DataError("cannot partition an empty sample list");
  const double total = ratios[0] + ratios[1] + ratios[2];
  if (std::abs(total - 1.0) > 1e-9 || *std::min_element(ratios.begin(), ratios.end()) < 0.0) {
    throw ConfigError("split ratios must be nonnegative and sum to 1");
  }
  Rng rng(seed);
  rng.shuffle(samples.begin(), samples.end());

  const auto counts = count_labels(samples);
  // Small slack so e.g. 3500 * (400/3500) floors to 400, not 399.
  const auto take = [&](std::size_t n, double r) {
    return static_cast<std::size_t>(std::floor(static_cast<double>(n) * r + 1e-7));
  };
  struct Quota {
    std::size_t validation, test, seen = 0;
  };
  Quota quotas[2] = {{take(counts.negatives, ratios[1]), take(counts.negatives, ratios[2])},
                     {take(counts.positives, ratios[1]), take(counts.positives, ratios[2])}};

  PartitionedDataset out;
  for (auto& s : samples) {
    auto& q = quotas[static_cast<int>(s.label)];
    const std::size_t i = q.seen++;
    if (i < q.validation) {
      out.validation.push_back(std::move(s));
    } else if (i < q.validation + q.test) {
      out.test.push_back(std::move(s));
    } else {
      out.train.push_back(std::move(s));
    }
  }
  return out;
}

AugmentParams draw_augment_params(Rng& rng, const AugmentRanges& ranges) {
  AugmentParams p;
  p.rotation_deg = rng.uniform(-ranges.max_rotation_deg, ranges.max_rotation_deg);
  p.shift_x = rng.uniform(-ranges.max_shift, ranges.max_shift);
  p.shift_y = rng.uniform(-ranges.max_shift, ranges.max_shift);
  p.scale = rng.uniform(ranges.min_scale, ranges.max_scale);
  return p;
}

Image apply_transform(const Image& image, const AugmentParams& params) {
  const Index channels = image.dim(0), h = image.dim(1), w = image.dim(2);
  const double cx = static_cast<double>(w - 1) / 2.0, cy = static_cast<double>(h - 1) / 2.0;
  const double theta = params.rotation_deg * std::numbers::pi / 180.0;
  const double c = std::cos(theta), s = std::sin(theta);
  const double tx = params.shift_x * static_cast<double>(w), ty = params.shift_y * static_cast<double>(h);
  Image out(image.shape());
  for (Index y = 0; y < h; ++y) {
    for (Index x = 0; x < w; ++x) {
      const double u = static_cast<double>(x) - cx - tx;
      const double v = static_cast<double>(y) - cy - ty;
      const double sx = std::clamp((c * u + s * v) / params.scale + cx, 0.0, static_cast<double>(w - 1));
      const double sy = std::clamp((-s * u + c * v) / params.scale + cy, 0.0, static_cast<double>(h - 1));
      const auto x0 = static_cast<Index>(std::floor(sx));
      const auto y0 = static_cast<Index>(std::floor(sy));
      const Index x1 = std::min(x0 + 1, w - 1), y1 = std::min(y0 + 1, h - 1);
      const double fx = sx - static_cast<double>(x0), fy = sy - static_cast<double>(y0);
      for (Index ch = 0; ch < channels; ++ch) {
        if (fx == 0.0 && fy == 0.0) {
          out(ch, y, x) = image(ch, y0, x0);
          continue;
        }
        const double top = (1.0 - fx) * image(ch, y0, x0) + fx * image(ch, y0, x1);
        const double bottom = (1.0 - fx) * image(ch, y1, x0) + fx * image(ch, y1, x1);
        out(ch, y, x) = static_cast<float>((1.0 - fy) * top + fy * bottom);
      }
    }
  }
  return out;
}

std::vector<Sample> augment(const Sample& sample, int k, std::uint64_t seed, const AugmentRanges& ranges) {
  if (k < 1) throw ConfigError("augmentation count must be >= 1");
  if (sample.origin != Origin::original) throw DataError("only original samples can be augmented");
  Rng rng(seed);
  std::vector<Sample> out;
  out.reserve(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) {
    Sample copy;
    copy.image = quantize(apply_transform(sample.image, draw_augment_params(rng, ranges)));
    copy.label = sample.label;
    copy.part = sample.part;
    copy.origin = Origin::augmented;
    copy.source_id = sample.source_id;
    out.push_back(std::move(copy));
  }
  return out;
}

void augment_training(PartitionedDataset& dataset, int k, std::uint64_t seed, const AugmentRanges& ranges) {
  const std::size_t n = dataset.train.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (dataset.train[i].origin != Origin::original) continue;
    auto copies = augment(dataset.train[i], k, derive_seed(seed, "augment", i), ranges);
    for (auto& c : copies) dataset.train.push_back(std::move(c));
  }
}

void augment_training_to(PartitionedDataset& dataset, Label label, std::size_t target, std::uint64_t seed,
                         const AugmentRanges& ranges) {
  std::vector<std::size_t> originals;
  std::size_t current = 0;
  for (std::size_t i = 0; i < dataset.train.size(); ++i) {
    if (dataset.train[i].label != label) continue;
    ++current;
    if (dataset.train[i].origin == Origin::original) originals.push_back(i);
  }
  if (current >= target || originals.empty()) return;
  const std::size_t extra = target - current;
  const std::size_t per = extra / originals.size(), rem = extra % originals.size();
  for (std::size_t j = 0; j < originals.size(); ++j) {
    const int copies = static_cast<int>(per + (j < rem ? 1 : 0));
    if (copies == 0) continue;
    auto out = augment(dataset.train[originals[j]], copies, derive_seed(seed, "augment-to", j), ranges);
    for (auto& c : out) dataset.train.push_back(std::move(c));
  }
}

namespace {

// Keeps `keep(label, n)` samples of each label, chosen by seed, preserving order.
template <typename KeepFn>
std::vector<Sample> select_per_label(const std::vector<Sample>& samples, std::uint64_t seed, KeepFn keep) {
  std::vector<std::size_t> by_label[2];
  for (std::size_t i = 0; i < samples.size(); ++i) by_label[static_cast<int>(samples[i].label)].push_back(i);
  Rng rng(seed);
  std::vector<std::size_t> kept;
  for (int l = 0; l < 2; ++l) {
    auto& idx = by_label[l];
    const std::size_t k = keep(static_cast<Label>(l), idx.size());
    rng.shuffle(idx.begin(), idx.end());
    kept.insert(kept.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(std::min(k, idx.size())));
  }
  std::sort(kept.begin(), kept.end());
  std::vector<Sample> out;
  out.reserve(kept.size());
  for (std::size_t i : kept) out.push_back(samples[i]);
  return out;
}

}  // namespace

PartitionedDataset subsample_training(const PartitionedDataset& dataset, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw ConfigError("training fraction must lie in (0,1], got " + std::to_string(fraction));
  }
  PartitionedDataset out;
  out.name = dataset.name;
  out.part = dataset.part;
  out.validation = dataset.validation;
  out.test = dataset.test;
  if (fraction == 1.0) {
    out.train = dataset.train;
    return out;
  }
  out.train = select_per_label(dataset.train, seed, [&](Label label, std::size_t n) {
    const auto k = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
    if (n > 0 && k == 0) {
      throw DataError("training fraction " + std::to_string(fraction) + " leaves no " + to_string(label) +
                      " samples in " + dataset.name);
    }
    return k;
  });
  return out;
}

void cap_training(PartitionedDataset& dataset, std::size_t per_class, std::uint64_t seed) {
  const auto counts = count_labels(dataset.train);
  if (counts.positives <= per_class && counts.negatives <= per_class) return;
  dataset.train = select_per_label(dataset.train, seed, [&](Label, std::size_t n) { return std::min(n, per_class); });
}

void check_no_leakage(const PartitionedDataset& dataset) {
  std::map<std::string, Split> owner;
  for (Split s : {Split::train, Split::validation, Split::test}) {
    for (const auto& sample : dataset.split(s)) {
      const auto [it, inserted] = owner.emplace(sample.source_id, s);
      if (!inserted && it->second != s) {
        throw SplitLeakError("source_id '" + sample.source_id + "' of dataset '" + dataset.name + "' appears in both " +
                             to_string(it->second) + " and " + to_string(s));
      }
    }
  }
}

}  // namespace pedk::data
