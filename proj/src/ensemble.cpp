#include "pedk/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pedk/error.hpp"
#include "pedk/parallel.hpp"

namespace pedk::ensemble {

std::string to_string(StatisticMode mode) { return mode == StatisticMode::max ? "max" : "mean"; }

StatisticMode statistic_mode_from_string(const std::string& text) {
  if (text == "max") return StatisticMode::max;
  if (text == "mean") return StatisticMode::mean;
  throw ConfigError("unknown statistic mode '" + text + "' (expected max or mean)");
}

std::string to_string(ThresholdChoice choice) {
  switch (choice) {
    case ThresholdChoice::zero:
      return "zero";
    case ThresholdChoice::negative:
      return "theta_n";
    case ThresholdChoice::intermediate:
      return "theta_i";
    case ThresholdChoice::positive:
      return "theta_p";
  }
  return "?";
}

ThresholdChoice threshold_choice_from_string(const std::string& text) {
  if (text == "zero" || text == "0") return ThresholdChoice::zero;
  if (text == "theta_n" || text == "n") return ThresholdChoice::negative;
  if (text == "theta_i" || text == "i") return ThresholdChoice::intermediate;
  if (text == "theta_p" || text == "p") return ThresholdChoice::positive;
  throw ConfigError("unknown threshold '" + text + "' (expected zero, theta_n, theta_i or theta_p)");
}

Heatmap coverage(const PatchGrid& grid) {
  return heatmap_from_decisions(grid, std::vector<bool>(grid.size(), true));
}

Heatmap heatmap_from_decisions(const PatchGrid& grid, const std::vector<bool>& decisions) {
  if (decisions.size() != grid.size()) {
    throw ShapeError("got " + std::to_string(decisions.size()) + " window decisions for a grid of " +
                     std::to_string(grid.size()));
  }
  Heatmap h = Heatmap::Zero(grid.image_height, grid.image_width);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!decisions[i]) continue;
    // Windows larger than the image are centered and may start off-frame.
    const auto& r = grid.rects[i];
    const Index y0 = std::max<Index>(0, r.y), x0 = std::max<Index>(0, r.x);
    const Index y1 = std::min(grid.image_height, r.y + r.height), x1 = std::min(grid.image_width, r.x + r.width);
    if (y1 > y0 && x1 > x0) h.block(y0, x0, y1 - y0, x1 - x0).array() += 1;
  }
  return h;
}

std::vector<bool> window_decisions(const Image& image, const nn::Network<float>& network, const PatchGrid& grid) {
  if (data::height(image) != grid.image_height || data::width(image) != grid.image_width) {
    throw ShapeError("image " + nn::to_string(image.shape()) + " does not match its patch grid " +
                     std::to_string(grid.image_height) + "x" + std::to_string(grid.image_width));
  }
  const Index side = network.architecture().input_side;
  std::vector<bool> decisions(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    decisions[i] = network.classify(patching::extract_rescale(image, grid.rects[i], side)) == 1;
  }
  return decisions;
}

Heatmap heatmap(const Image& image, const nn::Network<float>& network, const PatchGrid& grid) {
  return heatmap_from_decisions(grid, window_decisions(image, network, grid));
}

double image_statistic(const Heatmap& h, StatisticMode mode) {
  if (h.size() == 0) return 0.0;
  if (mode == StatisticMode::max) return static_cast<double>(h.maxCoeff());
  return static_cast<double>(h.cast<std::int64_t>().sum()) / static_cast<double>(h.size());
}

double ThresholdSet::value(ThresholdChoice choice) const {
  switch (choice) {
    case ThresholdChoice::zero:
      return 0.0;
    case ThresholdChoice::negative:
      return negative;
    case ThresholdChoice::intermediate:
      return intermediate;
    case ThresholdChoice::positive:
      return positive;
  }
  return 0.0;
}

void to_json(nlohmann::json& j, const ThresholdSet& t) {
  j = {{"theta_p", t.positive}, {"theta_n", t.negative}, {"theta_i", t.intermediate}, {"mode", to_string(t.mode)}};
}

void from_json(const nlohmann::json& j, ThresholdSet& t) {
  try {
    t.positive = j.at("theta_p").get<double>();
    t.negative = j.at("theta_n").get<double>();
    t.intermediate = j.at("theta_i").get<double>();
    t.mode = statistic_mode_from_string(j.at("mode").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed thresholds: ") + e.what());
  }
}

ThresholdSet estimate_thresholds(const std::vector<double>& positive_statistics,
                                 const std::vector<double>& negative_statistics, StatisticMode mode) {
  if (positive_statistics.empty() || negative_statistics.empty()) {
    throw DataError("threshold estimation needs at least one positive and one negative image");
  }
  const double sum_p = std::accumulate(positive_statistics.begin(), positive_statistics.end(), 0.0);
  const double sum_n = std::accumulate(negative_statistics.begin(), negative_statistics.end(), 0.0);
  const auto np = static_cast<double>(positive_statistics.size());
  const auto nn = static_cast<double>(negative_statistics.size());
  return {sum_p / np, sum_n / nn, (sum_p + sum_n) / (np + nn), mode};
}

ThresholdSet estimate_thresholds(const nn::Network<float>& network, const std::vector<Image>& positives,
                                 const std::vector<Image>& negatives, const patching::WindowSpec& window,
                                 StatisticMode mode, std::size_t workers) {
  const auto statistics = [&](const std::vector<Image>& images) {
    std::vector<double> out(images.size());
    parallel_for(images.size(), workers, [&](std::size_t i) {
      const auto grid = patching::patch_grid(data::height(images[i]), data::width(images[i]), window);
      out[i] = image_statistic(heatmap(images[i], network, grid), mode);
    });
    return out;
  };
  return estimate_thresholds(statistics(positives), statistics(negatives), mode);
}

bool network_decision(double statistic, double theta) { return statistic >= theta; }

bool network_decision(double statistic, const ThresholdSet& thresholds, ThresholdChoice choice) {
  // A heatmap in which no window fired never counts as a detection, so a
  // threshold of exactly zero behaves like the zero choice.
  if (statistic <= 0.0) return false;
  if (choice == ThresholdChoice::zero) return true;
  return network_decision(statistic, thresholds.value(choice));
}

bool network_decision(const Heatmap& h, const ThresholdSet& thresholds, ThresholdChoice choice) {
  return network_decision(image_statistic(h, thresholds.mode), thresholds, choice);
}

bool uncertain(double statistic, const ThresholdSet& thresholds) {
  const double lo = std::min(thresholds.negative, thresholds.positive);
  const double hi = std::max(thresholds.negative, thresholds.positive);
  return statistic > lo && statistic < hi;
}

VoteConfig VoteConfig::k_of(int k) {
  if (k < 1 || k > 4) throw ConfigError("k_of_4 rule needs k in 1..4, got " + std::to_string(k));
  VoteConfig c;
  c.rule = Rule::k_of_4;
  c.k = k;
  return c;
}

VoteConfig VoteConfig::weighted_by(const Weights& weights, double threshold) {
  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw ConfigError("vote weights must be finite and nonnegative");
    sum += w;
  }
  if (sum <= 0.0) throw ConfigError("vote weights must not all be zero");
  VoteConfig c;
  c.rule = Rule::weighted;
  Weights normalized;
  for (std::size_t i = 0; i < 4; ++i) normalized[i] = weights[i] / sum;
  c.weights = normalized;
  c.decision_threshold = threshold;
  return c;
}

std::string VoteConfig::name() const {
  return rule == Rule::weighted ? "weighted" : std::to_string(k) + "_of_4";
}

VoteConfig parse_rule(const std::string& text) {
  if (text == "weighted") {
    VoteConfig c;
    c.rule = VoteConfig::Rule::weighted;
    return c;
  }
  if (text.size() == 6 && text.substr(1) == "_of_4" && text[0] >= '1' && text[0] <= '4') {
    return VoteConfig::k_of(text[0] - '0');
  }
  throw ConfigError("unknown rule '" + text + "' (expected 1_of_4 .. 4_of_4 or weighted)");
}

bool aggregate(const Decisions& decisions, const VoteConfig& config) {
  if (config.rule == VoteConfig::Rule::k_of_4) {
    const auto positives = std::count(decisions.begin(), decisions.end(), true);
    return positives >= config.k;
  }
  if (!config.weights) throw ConfigError("weighted vote requires weights");
  double score = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    if (decisions[i]) score += (*config.weights)[i];
  }
  return score >= config.decision_threshold;
}

Weights accuracy_weights(const std::array<double, 4>& accuracies) {
  double sum = 0.0;
  for (double a : accuracies) {
    if (!(a >= 0.0) || !std::isfinite(a)) throw ConfigError("accuracies must be finite and nonnegative");
    sum += a;
  }
  if (sum <= 0.0) throw ConfigError("accuracy weights need at least one nonzero accuracy");
  Weights w;
  for (std::size_t i = 0; i < 4; ++i) w[i] = accuracies[i] / sum;
  return w;
}

Image heatmap_image(const Heatmap& h) {
  Image img = data::make_image(h.rows(), h.cols(), 0.0f, 1);
  const int top = h.size() ? h.maxCoeff() : 0;
  if (top <= 0) return img;
  for (Index y = 0; y < h.rows(); ++y) {
    for (Index x = 0; x < h.cols(); ++x) img(0, y, x) = static_cast<float>(h(y, x)) / static_cast<float>(top);
  }
  return data::quantize(img);
}

nlohmann::json heatmap_json(const Heatmap& h) {
  nlohmann::json rows = nlohmann::json::array();
  for (Index y = 0; y < h.rows(); ++y) {
    nlohmann::json row = nlohmann::json::array();
    for (Index x = 0; x < h.cols(); ++x) row.push_back(h(y, x));
    rows.push_back(std::move(row));
  }
  return {{"height", h.rows()}, {"width", h.cols()}, {"values", std::move(rows)}};
}

std::filesystem::path thresholds_path(const std::filesystem::path& checkpoint) {
  auto p = checkpoint;
  p.replace_extension(".thresholds.json");
  return p;
}

void save_thresholds(const std::filesystem::path& path, const ThresholdSet& thresholds) {
  const std::string text = nlohmann::json(thresholds).dump(2) + "\n";
  data::write_bytes(path, {reinterpret_cast<const unsigned char*>(text.data()), text.size()});
}

ThresholdSet load_thresholds(const std::filesystem::path& path) {
  const auto bytes = data::read_bytes(path);
  try {
    return nlohmann::json::parse(bytes.begin(), bytes.end()).get<ThresholdSet>();
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError("cannot parse thresholds " + path.string() + ": " + e.what());
  }
}

}  // namespace pedk::ensemble
