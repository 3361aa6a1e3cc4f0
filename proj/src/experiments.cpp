#include "pedk/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <numeric>
#include <sstream>

#include "pedk/error.hpp"
#include "pedk/parallel.hpp"
#include "pedk/rng.hpp"
#include "pedk/runtime.hpp"

namespace pedk::experiments {

namespace {

void reject_unknown(const nlohmann::json& j, const std::vector<std::string>& known, const std::string& what) {
  if (!j.is_object()) throw ConfigError(what + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw ConfigError("unknown " + what + " field '" + key + "'");
    }
  }
}

template <typename T>
void read_field(const nlohmann::json& j, const char* key, T& out, const std::string& what) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("invalid " + what + " field '" + key + "': " + e.what());
  }
}

std::mutex progress_mutex;

void report(const Progress& progress, const std::string& line) {
  if (!progress) return;
  std::lock_guard lock(progress_mutex);
  progress(line);
}

}  // namespace

void to_json(nlohmann::json& j, const TrainConfig& c) {
  j = {{"epochs", c.epochs}, {"batch_size", c.batch_size}, {"learning_rate", c.learning_rate}, {"momentum", c.momentum}};
}

void from_json(const nlohmann::json& j, TrainConfig& c) {
  reject_unknown(j, {"epochs", "batch_size", "learning_rate", "momentum"}, "train config");
  read_field(j, "epochs", c.epochs, "train config");
  read_field(j, "batch_size", c.batch_size, "train config");
  read_field(j, "learning_rate", c.learning_rate, "train config");
  read_field(j, "momentum", c.momentum, "train config");
  if (c.epochs < 1) throw ConfigError("invalid train config field 'epochs': must be >= 1");
  if (c.batch_size < 1) throw ConfigError("invalid train config field 'batch_size': must be >= 1");
  if (!(c.learning_rate > 0.0)) throw ConfigError("invalid train config field 'learning_rate': must be positive");
  if (!(c.momentum >= 0.0 && c.momentum < 1.0)) {
    throw ConfigError("invalid train config field 'momentum': must lie in [0,1)");
  }
}

LabeledSet prepare(const std::vector<data::Sample>& samples, Index side) {
  LabeledSet set;
  set.inputs.reserve(samples.size());
  set.labels.reserve(samples.size());
  for (const auto& s : samples) {
    if (data::height(s.image) == side && data::width(s.image) == side) {
      set.inputs.push_back(s.image);
    } else {
      set.inputs.push_back(patching::resize(s.image, side, side));
    }
    set.labels.push_back(s.label == data::Label::positive ? 1 : 0);
  }
  return set;
}

double EvalReport::tp_rate() const {
  return positives ? static_cast<double>(true_positives) / static_cast<double>(positives) : 0.0;
}

double EvalReport::tn_rate() const {
  return negatives ? static_cast<double>(true_negatives) / static_cast<double>(negatives) : 0.0;
}

double EvalReport::accuracy() const { return (tp_rate() + tn_rate()) / 2.0; }

void to_json(nlohmann::json& j, const EvalReport& r) {
  j = {{"true_positives", r.true_positives},
       {"positives", r.positives},
       {"true_negatives", r.true_negatives},
       {"negatives", r.negatives},
       {"tp_rate", r.tp_rate()},
       {"tn_rate", r.tn_rate()},
       {"accuracy", r.accuracy()}};
}

EvalReport report_from_predictions(const std::vector<int>& labels, const std::vector<bool>& predicted_positive) {
  if (labels.empty()) throw DataError("cannot evaluate on an empty split");
  if (labels.size() != predicted_positive.size()) throw ShapeError("labels and predictions differ in length");
  EvalReport r;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == 1) {
      ++r.positives;
      if (predicted_positive[i]) ++r.true_positives;
    } else {
      ++r.negatives;
      if (!predicted_positive[i]) ++r.true_negatives;
    }
  }
  return r;
}

EvalReport evaluate(const Net& network, const LabeledSet& set) {
  std::vector<bool> predicted(set.size());
  for (std::size_t i = 0; i < set.size(); ++i) predicted[i] = network.classify(set.inputs[i]) == 1;
  return report_from_predictions(set.labels, predicted);
}

double TrainRun::best_validation_accuracy() const {
  if (best_epoch < 1) return 0.0;
  return history.at(static_cast<std::size_t>(best_epoch - 1)).validation_accuracy;
}

int select_best_epoch(const std::vector<EpochRecord>& history) {
  int best = 0;
  double best_accuracy = 0.0;
  for (const auto& record : history) {
    if (best == 0 || record.validation_accuracy > best_accuracy) {
      best = record.epoch;
      best_accuracy = record.validation_accuracy;
    }
  }
  return best;
}

TrainRun train_with_early_stopping(Net network, const LabeledSet& train, const LabeledSet& validation,
                                   const TrainConfig& config, std::uint64_t seed) {
  if (train.size() == 0) throw DataError("training split is empty");
  if (validation.size() == 0) throw DataError("validation split is empty");
  tune_allocator();
  TrainRun run;
  nn::Sgd<float> sgd(config.learning_rate, config.momentum);
  Rng order_rng(derive_seed(seed, "order"));
  Rng dropout_rng(derive_seed(seed, "dropout"));
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  nn::Tape<float> tape;
  Net::Params best_params;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    order_rng.shuffle(order.begin(), order.end());
    double loss_sum = 0.0;
    try {
      for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
        const std::size_t end = std::min(order.size(), start + config.batch_size);
        auto grads = network.zero_gradients();
        for (std::size_t b = start; b < end; ++b) {
          const std::size_t i = order[b];
          network.forward(train.inputs[i], tape, nn::Mode::train, dropout_rng);
          const auto ce = nn::cross_entropy(tape.probabilities, train.labels[i]);
          if (!std::isfinite(ce.loss)) throw DivergenceError("non-finite loss in epoch " + std::to_string(epoch));
          loss_sum += ce.loss;
          network.backward(tape, ce.grad_logits, grads);
        }
        const float scale = 1.0f / static_cast<float>(end - start);
        for (auto& g : grads) g.data() *= scale;
        sgd.step(network, grads);
      }
    } catch (const DivergenceError& e) {
      run.error = e.what();
      break;
    }
    const double accuracy = evaluate(network, validation).accuracy();
    run.history.push_back({epoch, loss_sum / static_cast<double>(order.size()), accuracy});
    if (select_best_epoch(run.history) == epoch) {
      best_params = network.parameters();
      run.best_epoch = epoch;
    }
  }
  if (run.best_epoch > 0) {
    network.parameters() = std::move(best_params);
    run.network = std::move(network);
  }
  return run;
}

Profile desk_profile() { return {}; }

Profile paper_profile() {
  Profile p;
  p.name = "paper";
  p.synth.scene_side = 400;
  p.synth.patch_side = 200;
  p.synth.part_positives = 2500;
  p.synth.part_negatives = 2500;
  p.synth.train_cap_per_class = 0;
  p.synth.whole_positive_split = {3000, 400, 100};
  p.synth.whole_negative_split = {8000, 400, 100};
  return p;
}

Profile profile_by_name(const std::string& name) {
  if (name == "desk") return desk_profile();
  if (name == "paper") return paper_profile();
  throw ConfigError("unknown profile '" + name + "' (expected desk or paper)");
}

void to_json(nlohmann::json& j, const Profile& p) {
  j = {{"name", p.name},
       {"synth", p.synth},
       {"train", p.train},
       {"window", {{"window_ratio", p.window.window_ratio},
                   {"step_ratio", p.window.step_ratio},
                   {"per_side", p.window.per_side}}},
       {"statistic_mode", ensemble::to_string(p.mode)},
       {"fractions", p.fractions}};
}

void from_json(const nlohmann::json& j, Profile& p) {
  reject_unknown(j, {"name", "synth", "train", "window", "statistic_mode", "fractions"}, "profile");
  if (j.contains("name")) p = profile_by_name(j.at("name").get<std::string>());
  if (j.contains("synth")) {
    data::SynthConfig synth = p.synth;
    data::from_json(j.at("synth"), synth);
    p.synth = synth;
  }
  if (j.contains("train")) {
    TrainConfig train = p.train;
    from_json(j.at("train"), train);
    p.train = train;
  }
  if (j.contains("window")) {
    const auto& w = j.at("window");
    reject_unknown(w, {"window_ratio", "step_ratio", "per_side"}, "window");
    read_field(w, "window_ratio", p.window.window_ratio, "window");
    read_field(w, "step_ratio", p.window.step_ratio, "window");
    read_field(w, "per_side", p.window.per_side, "window");
  }
  if (j.contains("statistic_mode")) p.mode = ensemble::statistic_mode_from_string(j.at("statistic_mode").get<std::string>());
  read_field(j, "fractions", p.fractions, "profile");
  for (double f : p.fractions) {
    if (!(f > 0.0 && f <= 1.0)) throw ConfigError("invalid profile field 'fractions': values must lie in (0,1]");
  }
}

Role role_of(const std::string& target) { return target == kWholeTarget ? Role::single : Role::component; }

std::uint64_t run_seed(std::uint64_t master, const std::string& target, const ArchSpec& arch) {
  return derive_seed(master, "train/" + target + "/" + arch.label());
}

const Net& Simulation1Result::best_network(const std::string& target) const {
  const auto& net = networks.at(best.at(target));
  if (!net) throw InvariantError("no trained network for " + target);
  return *net;
}

namespace {

struct PreparedTarget {
  LabeledSet train, validation, test;
};

PreparedTarget prepare_target(const data::PartitionedDataset& d, Index side) {
  return {prepare(d.train, side), prepare(d.validation, side), prepare(d.test, side)};
}

Net build_for(const std::string& target, ArchSpec arch, Index side, std::uint64_t seed) {
  arch.role = role_of(target);
  return zoo::build_network<float>(arch, side, seed);
}

}  // namespace

Simulation1Result simulation1(const data::DatasetCollection& datasets, const Profile& profile, std::uint64_t seed,
                              std::size_t workers, const std::vector<std::string>& targets,
                              const std::vector<ArchSpec>& archs, const Progress& progress) {
  const Index side = profile.input_side();
  for (const auto& arch : archs) zoo::make_architecture(arch, side);
  std::map<std::string, PreparedTarget> prepared;
  for (const auto& t : targets) prepared.emplace(t, prepare_target(datasets.get(t), side));

  Simulation1Result result;
  for (const auto& t : targets) {
    for (auto arch : archs) {
      arch.role = role_of(t);
      GridRow row;
      row.target = t;
      row.arch = arch;
      result.rows.push_back(row);
    }
  }
  result.networks.resize(result.rows.size());
  parallel_for(result.rows.size(), workers, [&](std::size_t i) {
    auto& row = result.rows[i];
    const auto& data = prepared.at(row.target);
    const auto s = run_seed(seed, row.target, row.arch);
    TrainRun run = train_with_early_stopping(build_for(row.target, row.arch, side, derive_seed(s, "init")), data.train,
                                             data.validation, profile.train, s);
    row.best_epoch = run.best_epoch;
    row.validation_accuracy = run.best_validation_accuracy();
    row.history = run.history;
    row.error = run.error;
    if (run.network) row.test = evaluate(*run.network, data.test);
    result.networks[i] = std::move(run.network);
    report(progress, "trained " + row.target + " " + row.arch.label() + ": best epoch " + std::to_string(row.best_epoch) +
                         ", acc_val " + format_number(row.validation_accuracy) + ", acc_test " +
                         format_number(row.test.accuracy()) + (row.error.empty() ? "" : " (" + row.error + ")"));
  });
  for (std::size_t i = 0; i < result.rows.size(); ++i) {
    const auto& row = result.rows[i];
    if (!result.networks[i]) continue;
    const auto it = result.best.find(row.target);
    if (it == result.best.end() || row.validation_accuracy > result.rows[it->second].validation_accuracy) {
      result.best[row.target] = i;
    }
  }
  return result;
}

StatisticTable part_statistics(const std::array<const Net*, 4>& networks, const std::vector<data::Sample>& images,
                               const patching::WindowSpec& window, ensemble::StatisticMode mode, std::size_t workers) {
  tune_allocator();
  StatisticTable table(images.size());
  parallel_for(images.size(), workers, [&](std::size_t i) {
    const auto& image = images[i].image;
    const auto grid = patching::patch_grid(data::height(image), data::width(image), window);
    for (std::size_t n = 0; n < 4; ++n) {
      table[i][n] = ensemble::image_statistic(ensemble::heatmap(image, *networks[n], grid), mode);
    }
  });
  return table;
}

Simulation2Result simulation2(const std::vector<int>& labels, const StatisticTable& statistics,
                              ensemble::StatisticMode mode) {
  Simulation2Result result;
  for (std::size_t n = 0; n < 4; ++n) {
    std::vector<double> pos, neg;
    for (std::size_t i = 0; i < labels.size(); ++i) (labels[i] == 1 ? pos : neg).push_back(statistics[i][n]);
    result.thresholds[n] = ensemble::estimate_thresholds(pos, neg, mode);
    const auto& t = result.thresholds[n];
    if (!(t.negative <= t.intermediate + 1e-12 && t.intermediate <= t.positive + 1e-12) && t.negative <= t.positive) {
      throw InvariantError("threshold ordering violated for " + to_string(kAllParts[n]));
    }
  }
  return result;
}

Simulation2Result simulation2(const std::array<const Net*, 4>& networks, const std::vector<data::Sample>& validation,
                              const patching::WindowSpec& window, ensemble::StatisticMode mode, std::size_t workers) {
  std::vector<int> labels;
  for (const auto& s : validation) labels.push_back(s.label == data::Label::positive ? 1 : 0);
  return simulation2(labels, part_statistics(networks, validation, window, mode, workers), mode);
}

Simulation3Result simulation3(const std::vector<int>& labels, const StatisticTable& statistics,
                              const std::array<ensemble::ThresholdSet, 4>& thresholds,
                              const ensemble::Weights& weights) {
  if (labels.size() != statistics.size()) throw ShapeError("labels and statistics differ in length");
  Simulation3Result result;
  result.weights = weights;
  result.thresholds = thresholds;
  const auto sweep = [&](const ensemble::VoteConfig& vote, ensemble::ThresholdChoice choice) {
    std::vector<bool> predicted(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
      ensemble::Decisions d{};
      for (std::size_t n = 0; n < 4; ++n) d[n] = ensemble::network_decision(statistics[i][n], thresholds[n], choice);
      predicted[i] = ensemble::aggregate(d, vote);
    }
    return SweepCell{vote.name(), choice, report_from_predictions(labels, predicted)};
  };
  for (int k = 1; k <= 4; ++k) {
    for (auto choice : ensemble::kThresholdChoices) result.grid.push_back(sweep(ensemble::VoteConfig::k_of(k), choice));
  }
  const auto weighted = ensemble::VoteConfig::weighted_by(weights);
  for (auto choice : ensemble::kThresholdChoices) result.weighted.push_back(sweep(weighted, choice));
  return result;
}

void check_sweep_monotonicity(const Simulation3Result& result) {
  if (result.grid.size() != 16) throw InvariantError("sweep grid must have 16 cells");
  const auto cell = [&](int k, int t) -> const EvalReport& { return result.grid[static_cast<std::size_t>(k * 4 + t)].report; };
  const auto ordered = [&](int t) {
    const auto lo = ensemble::kThresholdChoices[static_cast<std::size_t>(t)];
    const auto hi = ensemble::kThresholdChoices[static_cast<std::size_t>(t + 1)];
    return std::all_of(result.thresholds.begin(), result.thresholds.end(),
                       [&](const ensemble::ThresholdSet& s) { return s.value(lo) <= s.value(hi); });
  };
  for (int k = 0; k < 4; ++k) {
    for (int t = 0; t < 4; ++t) {
      const auto& here = cell(k, t);
      if (t + 1 < 4 && ordered(t)) {
        const auto& next = cell(k, t + 1);
        if (next.true_positives > here.true_positives || next.true_negatives < here.true_negatives) {
          throw InvariantError("sweep row " + result.grid[static_cast<std::size_t>(k * 4)].rule +
                               " is not monotone between thresholds " + ensemble::to_string(ensemble::kThresholdChoices[static_cast<std::size_t>(t)]) +
                               " and " + ensemble::to_string(ensemble::kThresholdChoices[static_cast<std::size_t>(t + 1)]));
        }
      }
      if (k + 1 < 4) {
        const auto& next = cell(k + 1, t);
        if (next.true_positives > here.true_positives || next.true_negatives < here.true_negatives) {
          throw InvariantError("sweep column " + ensemble::to_string(ensemble::kThresholdChoices[static_cast<std::size_t>(t)]) +
                               " is not monotone between rules " + std::to_string(k + 1) + "_of_4 and " +
                               std::to_string(k + 2) + "_of_4");
        }
      }
    }
  }
}

Simulation4Result simulation4(const data::DatasetCollection& datasets, const Profile& profile,
                              const std::map<std::string, ArchSpec>& archs, std::uint64_t seed, std::size_t workers,
                              const std::map<std::string, double>& known_full, const Progress& progress) {
  const Index side = profile.input_side();
  Simulation4Result result;
  result.fractions = profile.fractions;
  struct Job {
    std::size_t row, column;
  };
  std::vector<Job> jobs;
  for (const auto& [target, arch] : archs) {
    LowDataRow row;
    row.target = target;
    row.arch = arch;
    row.arch.role = role_of(target);
    result.rows.push_back(row);
  }
  // Keep the fixed target order rather than map order.
  std::stable_sort(result.rows.begin(), result.rows.end(), [](const LowDataRow& a, const LowDataRow& b) {
    const auto rank = [](const std::string& t) { return std::find(kTargets.begin(), kTargets.end(), t) - kTargets.begin(); };
    return rank(a.target) < rank(b.target);
  });
  for (std::size_t r = 0; r < result.rows.size(); ++r) {
    for (std::size_t c = 0; c < 4; ++c) {
      const auto it = known_full.find(result.rows[r].target);
      if (result.fractions[c] == 1.0 && it != known_full.end()) {
        result.rows[r].accuracy[c] = it->second;
      } else {
        jobs.push_back({r, c});
      }
    }
  }
  parallel_for(jobs.size(), workers, [&](std::size_t j) {
    auto& row = result.rows[jobs[j].row];
    const double fraction = result.fractions[jobs[j].column];
    const auto& full = datasets.get(row.target);
    const auto subset = fraction == 1.0 ? full
                                        : data::subsample_training(full, fraction,
                                                                   derive_seed(seed, "subsample/" + row.target, jobs[j].column));
    const auto s = run_seed(seed, row.target, row.arch);
    const auto data = prepare_target(subset, side);
    TrainRun run = train_with_early_stopping(build_for(row.target, row.arch, side, derive_seed(s, "init")), data.train,
                                             data.validation, profile.train, s);
    row.accuracy[jobs[j].column] = run.network ? evaluate(*run.network, data.test).accuracy() : 0.0;
    report(progress, "trained " + row.target + " " + row.arch.label() + " on " + format_number(fraction) +
                         " of the training split: acc_test " + format_number(row.accuracy[jobs[j].column]));
  });
  return result;
}

std::string format_number(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", value);
  return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  data::write_bytes(path, {reinterpret_cast<const unsigned char*>(text.data()), text.size()});
}

void write_json(const std::filesystem::path& path, const nlohmann::json& value) { write_text(path, value.dump(2) + "\n"); }

nlohmann::json read_json(const std::filesystem::path& path) {
  const auto bytes = data::read_bytes(path);
  try {
    return nlohmann::json::parse(bytes.begin(), bytes.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError("cannot parse " + path.string() + ": " + e.what());
  }
}

nlohmann::json write_simulation1(const std::filesystem::path& dir, const Simulation1Result& result) {
  nlohmann::json out = nlohmann::json::object();
  std::ostringstream history;
  history << "target,arch,epoch,train_loss,acc_val\n";
  for (const auto& target : kTargets) {
    std::ostringstream csv;
    csv << "arch,epoch,acc_val,tp_test,tn_test,acc_test\n";
    nlohmann::json rows = nlohmann::json::array();
    bool any = false;
    for (const auto& row : result.rows) {
      if (row.target != target) continue;
      any = true;
      csv << row.arch.label() << ',' << row.best_epoch << ',' << format_number(row.validation_accuracy) << ','
          << format_number(row.test.tp_rate()) << ',' << format_number(row.test.tn_rate()) << ','
          << format_number(row.test.accuracy()) << '\n';
      nlohmann::json epochs = nlohmann::json::array();
      for (const auto& e : row.history) {
        history << target << ',' << row.arch.label() << ',' << e.epoch << ',' << format_number(e.train_loss) << ','
                << format_number(e.validation_accuracy) << '\n';
        epochs.push_back({{"epoch", e.epoch}, {"train_loss", e.train_loss}, {"acc_val", e.validation_accuracy}});
      }
      nlohmann::json r = {{"arch", row.arch.label()}, {"epoch", row.best_epoch}, {"acc_val", row.validation_accuracy},
                          {"test", row.test}, {"history", epochs}};
      if (!row.error.empty()) r["error"] = row.error;
      rows.push_back(r);
    }
    if (!any) continue;
    write_text(dir / ("grid_" + target + ".csv"), csv.str());
    out["grid"][target] = rows;
  }
  write_text(dir / "training_history.csv", history.str());

  std::ostringstream best;
  best << "model,arch,epoch,acc_val,tp_test,tn_test,acc_test\n";
  for (const auto& target : kTargets) {
    if (!result.best.contains(target)) continue;
    const auto& row = result.best_row(target);
    best << target << ',' << row.arch.label() << ',' << row.best_epoch << ',' << format_number(row.validation_accuracy)
         << ',' << format_number(row.test.tp_rate()) << ',' << format_number(row.test.tn_rate()) << ','
         << format_number(row.test.accuracy()) << '\n';
    out["best"][target] = {{"arch", row.arch.label()}, {"epoch", row.best_epoch}, {"acc_val", row.validation_accuracy},
                           {"test", row.test}};
  }
  write_text(dir / "best_models.csv", best.str());
  out["networks_trained"] = result.rows.size();
  return out;
}

nlohmann::json write_simulation2(const std::filesystem::path& dir, const Simulation2Result& result) {
  std::ostringstream csv;
  csv << "network,theta_p,theta_n,theta_i\n";
  nlohmann::json out = nlohmann::json::object();
  for (std::size_t n = 0; n < 4; ++n) {
    const auto& t = result.thresholds[n];
    csv << to_string(kAllParts[n]) << ',' << format_number(t.positive) << ',' << format_number(t.negative) << ','
        << format_number(t.intermediate) << '\n';
    out[to_string(kAllParts[n])] = t;
  }
  write_text(dir / "thresholds.csv", csv.str());
  return out;
}

nlohmann::json write_simulation3(const std::filesystem::path& dir, const Simulation3Result& result) {
  const auto cells_json = [](const std::vector<SweepCell>& cells, std::ostringstream& csv) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& c : cells) {
      csv << c.rule << ',' << ensemble::to_string(c.threshold) << ',' << format_number(c.report.tp_rate()) << ','
          << format_number(c.report.tn_rate()) << ',' << format_number(c.report.accuracy()) << '\n';
      out.push_back({{"rule", c.rule}, {"threshold", ensemble::to_string(c.threshold)}, {"report", c.report}});
    }
    return out;
  };
  std::ostringstream cells, weighted;
  cells << "rule,threshold,tp,tn,total\n";
  weighted << "rule,threshold,tp,tn,total\n";
  nlohmann::json out = {{"cells", cells_json(result.grid, cells)}, {"weighted", cells_json(result.weighted, weighted)},
                        {"weights", result.weights}};
  write_text(dir / "sweep_cells.csv", cells.str());
  write_text(dir / "sweep_weighted.csv", weighted.str());

  std::ostringstream grid;
  grid << "rule";
  for (auto choice : ensemble::kThresholdChoices) grid << ',' << ensemble::to_string(choice);
  grid << '\n';
  for (std::size_t k = 0; k < 4; ++k) {
    grid << result.grid[k * 4].rule;
    for (std::size_t t = 0; t < 4; ++t) grid << ',' << format_number(result.grid[k * 4 + t].report.accuracy());
    grid << '\n';
  }
  write_text(dir / "sweep_grid.csv", grid.str());
  return out;
}

nlohmann::json write_simulation4(const std::filesystem::path& dir, const Simulation4Result& result) {
  const auto percent = [](double f) { return std::to_string(static_cast<int>(std::lround(f * 100.0))) + "%"; };
  std::ostringstream table, plot;
  table << "model";
  for (double f : result.fractions) table << ',' << percent(f);
  table << '\n';
  plot << "fraction,model,accuracy\n";
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : result.rows) {
    table << row.target;
    for (std::size_t c = 0; c < 4; ++c) {
      table << ',' << format_number(row.accuracy[c]);
      plot << format_number(result.fractions[c]) << ',' << row.target << ',' << format_number(row.accuracy[c]) << '\n';
    }
    table << '\n';
    rows.push_back({{"model", row.target}, {"arch", row.arch.label()}, {"accuracy", row.accuracy}});
  }
  write_text(dir / "lowdata.csv", table.str());
  write_text(dir / "lowdata_plot.csv", plot.str());
  return {{"fractions", result.fractions}, {"rows", rows}};
}

}  // namespace pedk::experiments
