// pedk: dataset generation, training, threshold estimation, aggregation
// sweeps, low-data study and detection from the command line.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pedk/data/manifest.hpp"
#include "pedk/data/synth.hpp"
#include "pedk/ensemble.hpp"
#include "pedk/error.hpp"
#include "pedk/experiments.hpp"
#include "pedk/nn/checkpoint.hpp"
#include "pedk/parallel.hpp"
#include "pedk/runtime.hpp"

namespace fs = std::filesystem;
using namespace pedk;
using experiments::Profile;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitInvariant = 3;

struct Common {
  std::string profile = "desk";
  std::string config;
  std::uint64_t seed = 1;
  std::size_t workers = default_workers();
  bool json = false;
  std::optional<double> window_ratio;
  std::optional<double> step_ratio;
  std::optional<long> patch_size;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--profile", c.profile, "Scale defaults")->check(CLI::IsMember({"desk", "paper"}));
  cmd->add_option("--config", c.config, "JSON file overriding profile fields");
  cmd->add_option("--seed", c.seed, "Master seed");
  cmd->add_option("--workers", c.workers, "Concurrent training runs")->check(CLI::PositiveNumber);
  cmd->add_flag("--json", c.json, "Machine-readable output on stdout");
  cmd->add_option("--window-ratio", c.window_ratio, "Window side as a fraction of the image side");
  cmd->add_option("--step-ratio", c.step_ratio, "Window stride as a fraction of the window side");
  cmd->add_option("--patch-size", c.patch_size, "Patch and network input side in pixels");
}

Profile resolve_profile(const Common& c) {
  Profile p = experiments::profile_by_name(c.profile);
  if (!c.config.empty()) {
    json overrides = experiments::read_json(c.config);
    if (overrides.is_object() && !overrides.contains("name")) overrides["name"] = c.profile;
    experiments::from_json(overrides, p);
  }
  if (c.window_ratio) {
    p.window.window_ratio = *c.window_ratio;
    p.synth.window_ratio = *c.window_ratio;
  }
  if (c.step_ratio) p.window.step_ratio = *c.step_ratio;
  if (c.patch_size) p.synth.patch_side = *c.patch_size;
  p.synth.seed = c.seed;
  if (!(p.window.window_ratio > 0.0 && p.window.window_ratio <= 1.0)) {
    throw ConfigError("invalid field 'window_ratio': must lie in (0,1]");
  }
  if (!(p.window.step_ratio > 0.0 && p.window.step_ratio <= 1.0)) {
    throw ConfigError("invalid field 'step_ratio': must lie in (0,1]");
  }
  p.synth.validate();
  return p;
}

// Human-readable lines go to stdout unless --json is set; progress goes to
// stderr.
struct Output {
  bool json = false;
  void line(const std::string& text) const {
    if (!json) std::cout << text << '\n';
  }
  void progress(const std::string& text) const { std::cerr << text << std::endl; }
  experiments::Progress progress_fn() const {
    return [this](const std::string& text) { progress(text); };
  }
};

void write_run_config(const fs::path& dir, const std::string& command, const Common& c, const Profile& profile,
                      const json& paths) {
  experiments::write_json(dir / "config.json", {{"command", command},
                                                {"seed", c.seed},
                                                {"workers", c.workers},
                                                {"profile", profile},
                                                {"paths", paths}});
}

// Datasets plus the synth settings they were generated with.
data::DatasetCollection load_data(const fs::path& dir, Profile& profile, std::size_t workers) {
  const fs::path config = dir / "config.json";
  if (fs::exists(config)) {
    const json j = experiments::read_json(config);
    if (j.contains("profile") && j["profile"].contains("synth")) {
      data::SynthConfig synth;
      data::from_json(j["profile"]["synth"], synth);
      profile.synth = synth;
    }
  }
  return data::read_collection(dir, workers);
}

std::string split_counts(const data::PartitionedDataset& d) {
  std::ostringstream out;
  for (auto split : {data::Split::train, data::Split::validation, data::Split::test}) {
    const auto c = data::count_labels(d.split(split));
    out << ' ' << data::to_string(split) << ' ' << c.positives << '+' << c.negatives;
  }
  return out.str();
}

json collection_counts(const data::DatasetCollection& collection) {
  json out = json::object();
  for (const auto& d : collection.datasets) {
    for (auto split : {data::Split::train, data::Split::validation, data::Split::test}) {
      const auto c = data::count_labels(d.split(split));
      out[d.name][data::to_string(split)] = {{"positives", c.positives}, {"negatives", c.negatives}};
    }
  }
  return out;
}

// ---------------------------------------------------------------- synth

json run_synth(const fs::path& out_dir, const Common& c, const Profile& profile, const Output& out,
               data::DatasetCollection* keep = nullptr) {
  out.progress("generating " + profile.name + " corpus (seed " + std::to_string(profile.synth.seed) + ")");
  auto collection = data::assemble_datasets(data::synth_generate(profile.synth, c.workers), profile.synth);
  data::write_collection(out_dir, collection, c.workers);
  write_run_config(out_dir, "synth", c, profile, {{"out", out_dir.string()}});
  for (const auto& d : collection.datasets) out.line(d.name + ":" + split_counts(d));
  json result = {{"command", "synth"}, {"out", out_dir.string()}, {"counts", collection_counts(collection)}};
  if (keep) *keep = std::move(collection);
  return result;
}

// ---------------------------------------------------------------- train

fs::path checkpoint_path(const fs::path& models, const std::string& target) { return models / (target + ".pedk"); }

json run_train(const data::DatasetCollection& collection, const fs::path& out_dir, const Common& c,
               const Profile& profile, const std::vector<std::string>& targets,
               const std::vector<zoo::ArchSpec>& archs, const Output& out,
               experiments::Simulation1Result* keep = nullptr) {
  out.progress("training " + std::to_string(targets.size() * archs.size()) + " networks");
  auto result = experiments::simulation1(collection, profile, c.seed, c.workers, targets, archs, out.progress_fn());
  json report = experiments::write_simulation1(out_dir, result);

  const fs::path models = out_dir / "models";
  json summary = {{"seed", c.seed}, {"models", json::object()}};
  for (std::size_t i = 0; i < result.rows.size(); ++i) {
    const auto& row = result.rows[i];
    if (!result.networks[i]) continue;
    nn::save_checkpoint(out_dir / "checkpoints" / (row.target + "_" + row.arch.label() + ".pedk"),
                        *result.networks[i]);
  }
  for (const auto& [target, index] : result.best) {
    const auto& row = result.rows[index];
    nn::save_checkpoint(checkpoint_path(models, target), *result.networks[index]);
    summary["models"][target] = {{"arch", row.arch.label()},
                                 {"epoch", row.best_epoch},
                                 {"acc_val", row.validation_accuracy},
                                 {"test", row.test}};
    out.line(target + ": best " + row.arch.label() + " epoch " + std::to_string(row.best_epoch) + " acc_val " +
             experiments::format_number(row.validation_accuracy) + " tp " +
             experiments::format_number(row.test.tp_rate()) + " tn " +
             experiments::format_number(row.test.tn_rate()));
  }
  experiments::write_json(models / "summary.json", summary);
  experiments::write_json(out_dir / "report.json", report);
  write_run_config(out_dir, "train", c, profile, {{"out", out_dir.string()}});
  out.line("networks trained: " + std::to_string(result.rows.size()));
  if (keep) *keep = std::move(result);
  return {{"command", "train"}, {"out", out_dir.string()}, {"report", report}};
}

// ---------------------------------------------------------------- models

json read_summary(const fs::path& models) {
  const fs::path path = models / "summary.json";
  if (!fs::exists(path)) throw MissingFileError("missing " + path.string() + "; run `pedk train` first");
  return experiments::read_json(path);
}

nn::Network<float> load_model(const fs::path& models, const std::string& target) {
  return nn::load_checkpoint(checkpoint_path(models, target));
}

std::vector<nn::Network<float>> load_parts(const fs::path& models) {
  std::vector<nn::Network<float>> parts;
  for (PartKind part : kAllParts) parts.push_back(load_model(models, to_string(part)));
  return parts;
}

std::array<const nn::Network<float>*, 4> part_pointers(const std::vector<nn::Network<float>>& parts) {
  return {&parts[0], &parts[1], &parts[2], &parts[3]};
}

std::array<ensemble::ThresholdSet, 4> load_part_thresholds(const fs::path& models) {
  std::array<ensemble::ThresholdSet, 4> out;
  for (std::size_t n = 0; n < 4; ++n) {
    const auto path = ensemble::thresholds_path(checkpoint_path(models, to_string(kAllParts[n])));
    if (!fs::exists(path)) {
      throw MissingFileError("missing thresholds sidecar " + path.string() + "; run `pedk thresholds` first");
    }
    out[n] = ensemble::load_thresholds(path);
  }
  for (const auto& t : out) {
    if (t.mode != out[0].mode) throw ConfigError("threshold sidecars disagree on the statistic mode");
  }
  return out;
}

ensemble::Weights summary_weights(const json& summary) {
  std::array<double, 4> accuracies{};
  for (std::size_t n = 0; n < 4; ++n) {
    const auto name = to_string(kAllParts[n]);
    if (!summary["models"].contains(name)) throw DataError("summary.json has no entry for " + name);
    accuracies[n] = summary["models"][name]["acc_val"].get<double>();
  }
  return ensemble::accuracy_weights(accuracies);
}

std::vector<int> labels_of(const std::vector<data::Sample>& samples) {
  std::vector<int> labels;
  for (const auto& s : samples) labels.push_back(s.label == data::Label::positive ? 1 : 0);
  return labels;
}

// ---------------------------------------------------------------- eval

json run_eval(const data::DatasetCollection& collection, const fs::path& models, const fs::path& out_dir,
              const Common& c, const Profile& profile, const Output& out) {
  std::ostringstream csv;
  csv << "model,arch,tp_test,tn_test,acc_test\n";
  json rows = json::array();
  for (const auto& target : experiments::kTargets) {
    if (!fs::exists(checkpoint_path(models, target))) continue;
    const auto net = load_model(models, target);
    const auto set = experiments::prepare(collection.get(target).test, net.architecture().input_side);
    const auto report = experiments::evaluate(net, set);
    const std::string arch =
        std::to_string(net.architecture().conv_blocks) + "x" + std::to_string(net.architecture().dense_layers);
    csv << target << ',' << arch << ',' << experiments::format_number(report.tp_rate()) << ','
        << experiments::format_number(report.tn_rate()) << ',' << experiments::format_number(report.accuracy())
        << '\n';
    rows.push_back({{"model", target}, {"arch", arch}, {"test", report}});
    out.line(target + " " + arch + ": tp " + experiments::format_number(report.tp_rate()) + " tn " +
             experiments::format_number(report.tn_rate()) + " acc " +
             experiments::format_number(report.accuracy()));
  }
  if (rows.empty()) throw MissingFileError("no checkpoints found in " + models.string());
  experiments::write_text(out_dir / "eval.csv", csv.str());
  experiments::write_json(out_dir / "eval.json", rows);
  write_run_config(out_dir, "eval", c, profile, {{"models", models.string()}, {"out", out_dir.string()}});
  return {{"command", "eval"}, {"rows", rows}};
}

// ---------------------------------------------------------------- thresholds

json run_thresholds(const data::DatasetCollection& collection, const fs::path& models, const fs::path& out_dir,
                    const Common& c, const Profile& profile, const Output& out) {
  const auto parts = load_parts(models);
  const auto& validation = collection.get(experiments::kWholeTarget).validation;
  out.progress("estimating thresholds on " + std::to_string(validation.size()) + " validation images");
  const auto result = experiments::simulation2(part_pointers(parts), validation, profile.window, profile.mode,
                                               c.workers);
  for (std::size_t n = 0; n < 4; ++n) {
    ensemble::save_thresholds(ensemble::thresholds_path(checkpoint_path(models, to_string(kAllParts[n]))),
                              result.thresholds[n]);
    const auto& t = result.thresholds[n];
    out.line(to_string(kAllParts[n]) + ": theta_p " + experiments::format_number(t.positive) + " theta_n " +
             experiments::format_number(t.negative) + " theta_i " + experiments::format_number(t.intermediate));
  }
  const json report = experiments::write_simulation2(out_dir, result);
  experiments::write_json(out_dir / "report.json", report);
  write_run_config(out_dir, "thresholds", c, profile, {{"models", models.string()}, {"out", out_dir.string()}});
  return {{"command", "thresholds"}, {"thresholds", report}};
}

// ---------------------------------------------------------------- sweep

json run_sweep(const data::DatasetCollection& collection, const fs::path& models, const fs::path& out_dir,
               const Common& c, const Profile& profile, const Output& out) {
  const auto thresholds = load_part_thresholds(models);
  const auto weights = summary_weights(read_summary(models));
  const auto parts = load_parts(models);
  const auto& test = collection.get(experiments::kWholeTarget).test;
  out.progress("sweeping rules and thresholds on " + std::to_string(test.size()) + " test images");
  const auto statistics =
      experiments::part_statistics(part_pointers(parts), test, profile.window, thresholds[0].mode, c.workers);
  const auto result = experiments::simulation3(labels_of(test), statistics, thresholds, weights);
  const json report = experiments::write_simulation3(out_dir, result);
  experiments::write_json(out_dir / "report.json", report);
  write_run_config(out_dir, "sweep", c, profile, {{"models", models.string()}, {"out", out_dir.string()}});
  for (std::size_t k = 0; k < 4; ++k) {
    std::string row = result.grid[k * 4].rule + ":";
    for (std::size_t t = 0; t < 4; ++t) row += " " + experiments::format_number(result.grid[k * 4 + t].report.accuracy());
    out.line(row);
  }
  std::string row = "weighted:";
  for (const auto& cell : result.weighted) row += " " + experiments::format_number(cell.report.accuracy());
  out.line(row);
  experiments::check_sweep_monotonicity(result);
  return {{"command", "sweep"}, {"sweep", report}};
}

// ---------------------------------------------------------------- lowdata

json run_lowdata(const data::DatasetCollection& collection, const fs::path& models, const fs::path& out_dir,
                 const Common& c, const Profile& profile, const Output& out) {
  const json summary = read_summary(models);
  std::map<std::string, zoo::ArchSpec> archs;
  std::map<std::string, double> known;
  for (const auto& target : experiments::kTargets) {
    if (!summary["models"].contains(target)) throw DataError("summary.json has no entry for " + target);
    const auto& entry = summary["models"][target];
    archs[target] = zoo::parse_arch(entry["arch"].get<std::string>(), experiments::role_of(target));
    // Full-data accuracy is reused only when it came from the same seed.
    if (summary["seed"].get<std::uint64_t>() == c.seed) known[target] = entry["test"]["accuracy"].get<double>();
  }
  const auto result = experiments::simulation4(collection, profile, archs, c.seed, c.workers, known, out.progress_fn());
  const json report = experiments::write_simulation4(out_dir, result);
  experiments::write_json(out_dir / "report.json", report);
  write_run_config(out_dir, "lowdata", c, profile, {{"models", models.string()}, {"out", out_dir.string()}});
  for (const auto& row : result.rows) {
    std::string line = row.target + ":";
    for (double a : row.accuracy) line += " " + experiments::format_number(a);
    out.line(line);
  }
  return {{"command", "lowdata"}, {"lowdata", report}};
}

// ---------------------------------------------------------------- detect

struct DetectOptions {
  std::string image;
  std::string models;
  std::string rule = "2_of_4";
  std::string threshold = "theta_i";
  bool single = false;
  std::string heatmaps;
};

json run_detect(const DetectOptions& o, const Profile& profile, const Output& out) {
  const fs::path models = o.models;
  const auto image = data::read_png(o.image);
  if (image.dim(0) != 3) throw DataError(o.image + " is not an RGB image");

  if (o.single) {
    const auto net = load_model(models, experiments::kWholeTarget);
    const nn::Index side = net.architecture().input_side;
    const auto input = (data::height(image) == side && data::width(image) == side) ? image
                                                                                     : patching::resize(image, side, side);
    const auto p = net.predict(input);
    const bool positive = p[1] > p[0];
    out.line(std::string("verdict: ") + (positive ? "positive" : "negative"));
    out.line("probability: " + experiments::format_number(static_cast<double>(p[1])));
    return {{"command", "detect"}, {"model", "single"}, {"verdict", positive ? "positive" : "negative"},
            {"probability", static_cast<double>(p[1])}};
  }

  const auto thresholds = load_part_thresholds(models);
  auto vote = ensemble::parse_rule(o.rule);
  if (vote.rule == ensemble::VoteConfig::Rule::weighted) {
    vote = ensemble::VoteConfig::weighted_by(summary_weights(read_summary(models)));
  }
  const auto choice = ensemble::threshold_choice_from_string(o.threshold);
  const auto parts = load_parts(models);
  const auto grid = patching::patch_grid(data::height(image), data::width(image), profile.window);
  ensemble::Decisions decisions{};
  json networks = json::array();
  for (std::size_t n = 0; n < 4; ++n) {
    const auto name = to_string(kAllParts[n]);
    const auto h = ensemble::heatmap(image, parts[n], grid);
    const double statistic = ensemble::image_statistic(h, thresholds[n].mode);
    decisions[n] = ensemble::network_decision(statistic, thresholds[n], choice);
    const bool unsure = ensemble::uncertain(statistic, thresholds[n]);
    networks.push_back({{"network", name},
                        {"statistic", statistic},
                        {"threshold", thresholds[n].value(choice)},
                        {"decision", decisions[n] ? "positive" : "negative"},
                        {"uncertain", unsure}});
    out.line(name + ": statistic " + experiments::format_number(statistic) + " threshold " +
             experiments::format_number(thresholds[n].value(choice)) + " -> " +
             (decisions[n] ? "positive" : "negative") + (unsure ? " (uncertain)" : ""));
    if (!o.heatmaps.empty()) {
      data::write_png(fs::path(o.heatmaps) / (name + ".png"), ensemble::heatmap_image(h));
      experiments::write_json(fs::path(o.heatmaps) / (name + ".json"), ensemble::heatmap_json(h));
    }
  }
  const bool positive = ensemble::aggregate(decisions, vote);
  const bool any_uncertain = std::any_of(networks.begin(), networks.end(), [](const json& j) { return j["uncertain"].get<bool>(); });
  out.line("rule " + vote.name() + ", threshold " + ensemble::to_string(choice));
  out.line(std::string("verdict: ") + (positive ? "positive" : "negative") + (any_uncertain ? " (uncertain)" : ""));
  return {{"command", "detect"},
          {"rule", vote.name()},
          {"threshold", ensemble::to_string(choice)},
          {"networks", networks},
          {"verdict", positive ? "positive" : "negative"},
          {"uncertain", any_uncertain}};
}

std::vector<std::string> parse_targets(const std::string& text) {
  if (text == "all") return {experiments::kTargets.begin(), experiments::kTargets.end()};
  std::vector<std::string> out;
  std::stringstream in(text);
  for (std::string item; std::getline(in, item, ',');) {
    if (std::find(experiments::kTargets.begin(), experiments::kTargets.end(), item) == experiments::kTargets.end()) {
      throw ConfigError("unknown target '" + item + "' (expected barrel, magazine, receiver, stock or whole)");
    }
    out.push_back(item);
  }
  return out;
}

std::vector<zoo::ArchSpec> parse_archs(const std::string& text) {
  if (text == "grid") return zoo::architecture_grid();
  std::vector<zoo::ArchSpec> out;
  std::stringstream in(text);
  for (std::string item; std::getline(in, item, ',');) out.push_back(zoo::parse_arch(item));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  tune_allocator();
  CLI::App app{"Part-based ensemble detection versus a single network"};
  app.require_subcommand(1);

  Common common;
  std::string data_dir, models_dir, out_dir;
  std::string targets_text = "all", archs_text = "grid";
  std::optional<int> epochs;
  std::string mode_text;
  DetectOptions detect;

  auto* synth = app.add_subcommand("synth", "Generate the synthetic corpus and its manifest");
  add_common(synth, common);
  synth->add_option("--out", out_dir, "Dataset directory")->required();

  auto* train = app.add_subcommand("train", "Train the architecture grid with early stopping");
  add_common(train, common);
  train->add_option("--data", data_dir, "Dataset directory")->required();
  train->add_option("--out", out_dir, "Output directory")->required();
  train->add_option("--targets", targets_text, "Comma-separated targets or 'all'");
  train->add_option("--archs", archs_text, "Comma-separated MxN list or 'grid'");
  train->add_option("--epochs", epochs, "Epoch budget")->check(CLI::PositiveNumber);

  auto* eval = app.add_subcommand("eval", "Evaluate the selected models on the test splits");
  add_common(eval, common);
  eval->add_option("--data", data_dir, "Dataset directory")->required();
  eval->add_option("--models", models_dir, "Models directory written by train")->required();
  eval->add_option("--out", out_dir, "Output directory")->required();

  auto* thresholds = app.add_subcommand("thresholds", "Estimate per-network thresholds on validation images");
  add_common(thresholds, common);
  thresholds->add_option("--data", data_dir, "Dataset directory")->required();
  thresholds->add_option("--models", models_dir, "Models directory written by train")->required();
  thresholds->add_option("--out", out_dir, "Output directory")->required();
  thresholds->add_option("--mode", mode_text, "Image statistic")->check(CLI::IsMember({"max", "mean"}));

  auto* sweep = app.add_subcommand("sweep", "Accuracy of every rule and threshold on the test images");
  add_common(sweep, common);
  sweep->add_option("--data", data_dir, "Dataset directory")->required();
  sweep->add_option("--models", models_dir, "Models directory with thresholds")->required();
  sweep->add_option("--out", out_dir, "Output directory")->required();

  auto* lowdata = app.add_subcommand("lowdata", "Retrain the selected architectures on training subsets");
  add_common(lowdata, common);
  lowdata->add_option("--data", data_dir, "Dataset directory")->required();
  lowdata->add_option("--models", models_dir, "Models directory written by train")->required();
  lowdata->add_option("--out", out_dir, "Output directory")->required();
  lowdata->add_option("--epochs", epochs, "Epoch budget")->check(CLI::PositiveNumber);

  auto* detect_cmd = app.add_subcommand("detect", "Run the detector on one PNG image");
  add_common(detect_cmd, common);
  detect_cmd->add_option("image", detect.image, "PNG image")->required();
  detect_cmd->add_option("--models", detect.models, "Models directory")->required();
  detect_cmd->add_option("--rule", detect.rule, "1_of_4 .. 4_of_4 or weighted");
  detect_cmd->add_option("--threshold", detect.threshold, "zero, theta_n, theta_i or theta_p");
  detect_cmd->add_flag("--single", detect.single, "Use the single network instead of the ensemble");
  detect_cmd->add_option("--heatmaps", detect.heatmaps, "Directory for heatmap PNG and JSON files");

  auto* repro = app.add_subcommand("repro-all", "Generate data and run all four simulations");
  add_common(repro, common);
  repro->add_option("--out", out_dir, "Output directory")->required();
  repro->add_option("--epochs", epochs, "Epoch budget")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  const Output out{common.json};
  try {
    Profile profile = resolve_profile(common);
    if (epochs) profile.train.epochs = *epochs;
    if (!mode_text.empty()) profile.mode = ensemble::statistic_mode_from_string(mode_text);
    json result;

    if (synth->parsed()) {
      result = run_synth(out_dir, common, profile, out);
    } else if (train->parsed()) {
      const auto collection = load_data(data_dir, profile, common.workers);
      result = run_train(collection, out_dir, common, profile, parse_targets(targets_text), parse_archs(archs_text), out);
    } else if (eval->parsed()) {
      const auto collection = load_data(data_dir, profile, common.workers);
      result = run_eval(collection, models_dir, out_dir, common, profile, out);
    } else if (thresholds->parsed()) {
      const auto collection = load_data(data_dir, profile, common.workers);
      result = run_thresholds(collection, models_dir, out_dir, common, profile, out);
    } else if (sweep->parsed()) {
      const auto collection = load_data(data_dir, profile, common.workers);
      result = run_sweep(collection, models_dir, out_dir, common, profile, out);
    } else if (lowdata->parsed()) {
      const auto collection = load_data(data_dir, profile, common.workers);
      result = run_lowdata(collection, models_dir, out_dir, common, profile, out);
    } else if (detect_cmd->parsed()) {
      result = run_detect(detect, profile, out);
    } else if (repro->parsed()) {
      const auto start = std::chrono::steady_clock::now();
      const fs::path root = out_dir;
      const fs::path models = root / "train" / "models";
      data::DatasetCollection collection;
      json report;
      report["synth"] = run_synth(root / "data", common, profile, out, &collection);
      report["simulation1"] = run_train(collection, root / "train", common, profile,
                                        {experiments::kTargets.begin(), experiments::kTargets.end()},
                                        zoo::architecture_grid(), out)["report"];
      report["simulation2"] = run_thresholds(collection, models, root / "thresholds", common, profile, out)["thresholds"];
      try {
        report["simulation3"] = run_sweep(collection, models, root / "sweep", common, profile, out)["sweep"];
      } catch (const InvariantError&) {
        experiments::write_json(root / "report.json", report);
        throw;
      }
      report["simulation4"] = run_lowdata(collection, models, root / "lowdata", common, profile, out)["lowdata"];
      experiments::write_json(root / "report.json", report);
      write_run_config(root, "repro-all", common, profile, {{"out", root.string()}});
      const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      out.progress("repro-all finished in " + std::to_string(static_cast<long>(seconds)) + " s");
      result = {{"command", "repro-all"}, {"out", root.string()}, {"report", report}};
    }
    if (common.json) std::cout << result.dump(2) << '\n';
    return kExitOk;
  } catch (const InvariantError& e) {
    std::cerr << "invariant violation: " << e.what() << '\n';
    return kExitInvariant;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const ConfigError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ShapeError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DivergenceError& e) {
    std::cerr << "training diverged: " << e.what() << '\n';
    return kExitInvariant;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}
