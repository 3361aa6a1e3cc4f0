#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "pedk/data/image.hpp"
#include "pedk/nn/network.hpp"
#include "pedk/patching.hpp"

namespace pedk::ensemble {

using data::Image;
using nn::Index;
using patching::PatchGrid;

// Per-pixel count of positively classified windows covering the pixel.
using Heatmap = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class StatisticMode { max, mean };

// Which threshold a network decision is taken against. `zero` fires as soon
// as any window does.
enum class ThresholdChoice { zero, negative, intermediate, positive };

inline constexpr std::array<ThresholdChoice, 4> kThresholdChoices{
    ThresholdChoice::zero, ThresholdChoice::negative, ThresholdChoice::intermediate, ThresholdChoice::positive};

std::string to_string(StatisticMode mode);
StatisticMode statistic_mode_from_string(const std::string& text);
std::string to_string(ThresholdChoice choice);
ThresholdChoice threshold_choice_from_string(const std::string& text);

// Number of grid windows covering each pixel.
Heatmap coverage(const PatchGrid& grid);

// Accumulates the windows whose decision is true.
Heatmap heatmap_from_decisions(const PatchGrid& grid, const std::vector<bool>& decisions);

// Classifies every window of `grid`, rescaled to the network input side.
std::vector<bool> window_decisions(const Image& image, const nn::Network<float>& network, const PatchGrid& grid);

Heatmap heatmap(const Image& image, const nn::Network<float>& network, const PatchGrid& grid);

double image_statistic(const Heatmap& h, StatisticMode mode);

struct ThresholdSet {
  double positive = 0.0;      // mean statistic over positive images
  double negative = 0.0;      // mean statistic over negative images
  double intermediate = 0.0;  // mean statistic over both
  StatisticMode mode = StatisticMode::max;

  // Threshold for `choice`; zero for ThresholdChoice::zero.
  double value(ThresholdChoice choice) const;
};

void to_json(nlohmann::json& j, const ThresholdSet& t);
void from_json(const nlohmann::json& j, ThresholdSet& t);

ThresholdSet estimate_thresholds(const std::vector<double>& positive_statistics,
                                 const std::vector<double>& negative_statistics, StatisticMode mode);

ThresholdSet estimate_thresholds(const nn::Network<float>& network, const std::vector<Image>& positives,
                                 const std::vector<Image>& negatives, const patching::WindowSpec& window,
                                 StatisticMode mode, std::size_t workers = 1);

// Positive iff statistic >= theta.
bool network_decision(double statistic, double theta);

// Decision on a heatmap against one of the thresholds, using the mode the
// thresholds were estimated with. A statistic of zero is always negative; the
// zero choice is positive iff the statistic is strictly positive.
bool network_decision(const Heatmap& h, const ThresholdSet& thresholds, ThresholdChoice choice);
bool network_decision(double statistic, const ThresholdSet& thresholds, ThresholdChoice choice);

// True when the statistic falls strictly between the negative and positive
// thresholds.
bool uncertain(double statistic, const ThresholdSet& thresholds);

// Decisions ordered barrel, magazine, receiver, stock.
using Decisions = std::array<bool, 4>;
using Weights = std::array<double, 4>;

struct VoteConfig {
  enum class Rule { k_of_4, weighted };
  Rule rule = Rule::k_of_4;
  int k = 2;
  std::optional<Weights> weights;
  double decision_threshold = 0.5;

  static VoteConfig k_of(int k);
  static VoteConfig weighted_by(const Weights& weights, double threshold = 0.5);

  // "1_of_4" ... "4_of_4" or "weighted".
  std::string name() const;
};

// Parses "K_of_4"; "weighted" needs weights supplied separately.
VoteConfig parse_rule(const std::string& text);

bool aggregate(const Decisions& decisions, const VoteConfig& config);

// w_i = a_i / sum(a).
Weights accuracy_weights(const std::array<double, 4>& accuracies);

// Gray image, linearly scaled so the heatmap maximum maps to white.
Image heatmap_image(const Heatmap& h);
nlohmann::json heatmap_json(const Heatmap& h);

// Sidecar next to a checkpoint: "<stem>.thresholds.json".
std::filesystem::path thresholds_path(const std::filesystem::path& checkpoint);
void save_thresholds(const std::filesystem::path& path, const ThresholdSet& thresholds);
ThresholdSet load_thresholds(const std::filesystem::path& path);

}  // namespace pedk::ensemble
