#pragma once

#include <array>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pedk/data/synth.hpp"
#include "pedk/ensemble.hpp"
#include "pedk/model_zoo.hpp"
#include "pedk/nn/network.hpp"
#include "pedk/patching.hpp"

namespace pedk::experiments {

using data::Image;
using nn::Index;
using Net = nn::Network<float>;
using zoo::ArchSpec;
using zoo::Role;

struct TrainConfig {
  int epochs = 15;
  std::size_t batch_size = 32;
  double learning_rate = 0.01;
  double momentum = 0.9;
};

void to_json(nlohmann::json& j, const TrainConfig& c);
void from_json(const nlohmann::json& j, TrainConfig& c);

// Inputs at network resolution with class indices (1 = positive).
struct LabeledSet {
  std::vector<nn::Tensor<float>> inputs;
  std::vector<int> labels;

  std::size_t size() const { return inputs.size(); }
};

// Rescales every sample to side x side where needed.
LabeledSet prepare(const std::vector<data::Sample>& samples, Index side);

struct EvalReport {
  std::size_t true_positives = 0;
  std::size_t positives = 0;
  std::size_t true_negatives = 0;
  std::size_t negatives = 0;

  double tp_rate() const;
  double tn_rate() const;
  // (TP rate + TN rate) / 2.
  double accuracy() const;
};

void to_json(nlohmann::json& j, const EvalReport& r);

EvalReport evaluate(const Net& network, const LabeledSet& set);
EvalReport report_from_predictions(const std::vector<int>& labels, const std::vector<bool>& predicted_positive);

struct EpochRecord {
  int epoch = 0;  // 1-based
  double train_loss = 0.0;
  double validation_accuracy = 0.0;
};

struct TrainRun {
  std::string target;
  ArchSpec arch;
  std::vector<EpochRecord> history;
  int best_epoch = 0;  // 1-based; 0 when no epoch completed
  // Parameters from best_epoch.
  std::optional<Net> network;
  // Set when training diverged; history holds the completed epochs.
  std::string error;

  double best_validation_accuracy() const;
};

// 1-based epoch with the highest validation accuracy, earliest on ties; 0 for
// an empty history.
int select_best_epoch(const std::vector<EpochRecord>& history);

// Trains for config.epochs epochs and keeps the parameters of the epoch with
// the highest validation accuracy (earliest on ties).
TrainRun train_with_early_stopping(Net network, const LabeledSet& train, const LabeledSet& validation,
                                   const TrainConfig& config, std::uint64_t seed);

// Scale settings selected by --profile.
struct Profile {
  std::string name = "desk";
  data::SynthConfig synth;
  TrainConfig train;
  patching::WindowSpec window;
  ensemble::StatisticMode mode = ensemble::StatisticMode::max;
  std::array<double, 4> fractions{0.25, 0.50, 0.75, 1.00};

  Index input_side() const { return synth.patch_side; }
};

Profile desk_profile();
Profile paper_profile();
Profile profile_by_name(const std::string& name);

void to_json(nlohmann::json& j, const Profile& p);
void from_json(const nlohmann::json& j, Profile& p);

// The five training targets: the four parts in aggregation order, then
// "whole" for the single network.
inline const std::array<std::string, 5> kTargets{"barrel", "magazine", "receiver", "stock", "whole"};
inline constexpr const char* kWholeTarget = "whole";

Role role_of(const std::string& target);

// Seed for training (target, arch); shared by every data fraction.
std::uint64_t run_seed(std::uint64_t master, const std::string& target, const ArchSpec& arch);

struct GridRow {
  std::string target;
  ArchSpec arch;
  int best_epoch = 0;
  double validation_accuracy = 0.0;
  EvalReport test;
  std::vector<EpochRecord> history;
  std::string error;
};

struct Simulation1Result {
  std::vector<GridRow> rows;
  std::vector<std::optional<Net>> networks;  // aligned with rows
  std::map<std::string, std::size_t> best;   // target -> row index

  const GridRow& best_row(const std::string& target) const { return rows.at(best.at(target)); }
  const Net& best_network(const std::string& target) const;
};

// Receives one line per finished training run; calls are serialized.
using Progress = std::function<void(const std::string&)>;

// Trains every (target, arch) pair, in target-major order.
Simulation1Result simulation1(const data::DatasetCollection& datasets, const Profile& profile, std::uint64_t seed,
                              std::size_t workers, const std::vector<std::string>& targets = {kTargets.begin(), kTargets.end()},
                              const std::vector<ArchSpec>& archs = zoo::architecture_grid(), const Progress& progress = {});

// Per-image statistic of each part network, parts in aggregation order.
using StatisticTable = std::vector<std::array<double, 4>>;

StatisticTable part_statistics(const std::array<const Net*, 4>& networks, const std::vector<data::Sample>& images,
                               const patching::WindowSpec& window, ensemble::StatisticMode mode, std::size_t workers);

struct Simulation2Result {
  std::array<ensemble::ThresholdSet, 4> thresholds;
};

// Thresholds for each part network from whole-object validation images.
Simulation2Result simulation2(const std::array<const Net*, 4>& networks, const std::vector<data::Sample>& validation,
                              const patching::WindowSpec& window, ensemble::StatisticMode mode, std::size_t workers);
Simulation2Result simulation2(const std::vector<int>& labels, const StatisticTable& statistics,
                              ensemble::StatisticMode mode);

struct SweepCell {
  std::string rule;
  ensemble::ThresholdChoice threshold = ensemble::ThresholdChoice::zero;
  EvalReport report;
};

struct Simulation3Result {
  std::vector<SweepCell> grid;      // 4 rules x 4 thresholds, rule-major
  std::vector<SweepCell> weighted;  // one per threshold
  ensemble::Weights weights{};
  std::array<ensemble::ThresholdSet, 4> thresholds{};
};

Simulation3Result simulation3(const std::vector<int>& labels, const StatisticTable& statistics,
                              const std::array<ensemble::ThresholdSet, 4>& thresholds, const ensemble::Weights& weights);

// Throws InvariantError if TP rises or TN falls as k grows, or as the
// threshold grows between columns whose values are ordered for every network.
void check_sweep_monotonicity(const Simulation3Result& result);

struct LowDataRow {
  std::string target;
  ArchSpec arch;
  std::array<double, 4> accuracy{};  // test accuracy per fraction
};

struct Simulation4Result {
  std::array<double, 4> fractions{};
  std::vector<LowDataRow> rows;  // one per target
};

// Retrains each target's architecture on stratified subsets of its training
// split. Fractions whose accuracy appears in `known` (target -> accuracy at
// 1.0) are not retrained.
Simulation4Result simulation4(const data::DatasetCollection& datasets, const Profile& profile,
                              const std::map<std::string, ArchSpec>& archs, std::uint64_t seed, std::size_t workers,
                              const std::map<std::string, double>& known_full = {}, const Progress& progress = {});

// Report writers. Every table is also returned as JSON for the consolidated
// report.
nlohmann::json write_simulation1(const std::filesystem::path& dir, const Simulation1Result& result);
nlohmann::json write_simulation2(const std::filesystem::path& dir, const Simulation2Result& result);
nlohmann::json write_simulation3(const std::filesystem::path& dir, const Simulation3Result& result);
nlohmann::json write_simulation4(const std::filesystem::path& dir, const Simulation4Result& result);

void write_text(const std::filesystem::path& path, const std::string& text);
void write_json(const std::filesystem::path& path, const nlohmann::json& value);
nlohmann::json read_json(const std::filesystem::path& path);

// Fixed-precision formatting used by every report.
std::string format_number(double value);

}  // namespace pedk::experiments
