// Acceptance suite: prints one PASS/FAIL line per criterion and exits nonzero
// if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <sys/wait.h>
#include <thread>

#include <CLI11.hpp>

#include "layer_checks.hpp"
#include "pedk/data/synth.hpp"
#include "pedk/ensemble.hpp"
#include "pedk/experiments.hpp"
#include "pedk/model_zoo.hpp"
#include "pedk/nn/checkpoint.hpp"
#include "pedk/patching.hpp"

namespace fs = std::filesystem;
using namespace pedk;
using nn::Index;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

struct Settings {
  std::string cli;
  fs::path work;
  std::set<int> only;
  std::vector<std::uint64_t> seeds{1, 2, 3};
  bool reuse = false;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fixed(double v, int digits = 4) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(digits);
  os << v;
  return os.str();
}

std::string sci(double v) {
  std::ostringstream os;
  os.setf(std::ios::scientific);
  os.precision(2);
  os << v;
  return os.str();
}

// Runs the CLI; stdout+stderr go to `log`.
int run_cli(const Settings& s, const std::string& args, const fs::path& log) {
  fs::create_directories(log.parent_path());
  const std::string command = s.cli + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(command.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::vector<std::vector<std::string>> rows;
  for (std::string line; std::getline(in, line);) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    rows.push_back(std::move(cells));
  }
  return rows;
}

// Table body shape (rows, value columns) of a CSV whose first row is a header
// and first column a label.
std::pair<std::size_t, std::size_t> body_shape(const fs::path& path) {
  const auto rows = read_csv(path);
  if (rows.empty()) return {0, 0};
  std::size_t cols = rows[0].size() - 1;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].size() != rows[0].size()) return {rows.size() - 1, 0};
  }
  return {rows.size() - 1, cols};
}

std::string shape_text(std::pair<std::size_t, std::size_t> s) {
  return std::to_string(s.first) + "x" + std::to_string(s.second);
}

// ---------------------------------------------------------------------------

Verdict criterion1() {
  const auto start = Clock::now();
  Rng rng(101);
  std::vector<std::pair<std::string, nn::GradientCheckReport>> checks;
  checks.emplace_back("conv", test::check_conv(rng, 3, 16, 4, 3));
  checks.emplace_back("conv-k2", test::check_conv(rng, 2, 16, 3, 2));
  checks.emplace_back("maxpool", test::check_maxpool(rng, 3, 16));
  checks.emplace_back("dense", test::check_dense(rng, 48, 16));
  checks.emplace_back("relu", test::check_relu(rng, 256));
  checks.emplace_back("dropout", test::check_dropout(rng, 256, 0.5));
  checks.emplace_back("softmax", test::check_softmax(rng, 2));
  checks.emplace_back("softmax+ce", test::check_softmax_cross_entropy(rng, 1));

  // Full 3x3 networks with the standard widths. Three 3x3 valid conv blocks
  // collapse a 16px input, so the 16px network uses 2x2 kernels and the 3x3
  // recipe runs at its smallest valid side.
  const auto full = [&](const zoo::Recipe& recipe, Index side, const std::string& name) {
    auto net = zoo::build_component_network<double>({3, 3}, side, 202, recipe);
    const auto x = test::random_tensor<double>({3, side, side}, rng, 0.0, 1.0);
    checks.emplace_back(name + "@" + std::to_string(side) + "px", nn::gradient_check(net, x, 1, 1e-5, 1e-4));
  };
  zoo::Recipe k2;
  k2.kernel = 2;
  full(k2, 16, "net3x3-k2");
  full(zoo::Recipe{}, zoo::minimum_input_side(3), "net3x3-k3");

  bool pass = true;
  double worst = 0.0;
  Index entries = 0;
  std::string failing;
  for (const auto& [name, r] : checks) {
    pass = pass && r.passed;
    worst = std::max(worst, r.max_relative_error);
    entries += r.checked;
    if (!r.passed) failing += " " + name + "(" + sci(r.max_relative_error) + ")";
  }
  const double elapsed = seconds_since(start);
  pass = pass && elapsed < 60.0;
  return {pass, std::to_string(checks.size()) + " checks, " + std::to_string(entries) +
                    " entries, max rel err " + sci(worst) + ", " + fixed(elapsed, 1) + " s" +
                    (failing.empty() ? "" : ", failing:" + failing)};
}

// ---------------------------------------------------------------------------

Verdict criterion2() {
  Rng rng(303);
  double worst = 0.0;
  int trials = 0;
  // Random balanced statistic sets, integer (max mode) and real (mean mode).
  for (int t = 0; t < 10000; ++t, ++trials) {
    const std::size_t n = 1 + rng.index(400);
    std::vector<double> pos(n), neg(n);
    const bool integer = t % 2 == 0;
    for (std::size_t i = 0; i < n; ++i) {
      pos[i] = integer ? static_cast<double>(rng.index(80)) : rng.uniform(0.0, 50.0);
      neg[i] = integer ? static_cast<double>(rng.index(40)) : rng.uniform(0.0, 20.0);
    }
    const auto th = ensemble::estimate_thresholds(pos, neg, integer ? ensemble::StatisticMode::max
                                                                     : ensemble::StatisticMode::mean);
    worst = std::max(worst, std::abs(th.intermediate - (th.positive + th.negative) / 2.0));
  }
  // Balanced sets of real heatmaps from a small random network.
  {
    auto net = zoo::build_component_network({3, 3}, 32, 7);
    std::vector<data::Image> pos, neg;
    for (int i = 0; i < 8; ++i) {
      pos.push_back(test::random_tensor<float>({3, 64, 64}, rng, 0.0, 1.0));
      neg.push_back(test::random_tensor<float>({3, 64, 64}, rng, 0.0, 0.5));
    }
    for (auto mode : {ensemble::StatisticMode::max, ensemble::StatisticMode::mean}) {
      const auto th = ensemble::estimate_thresholds(net, pos, neg, {0.5, 0.25}, mode);
      worst = std::max(worst, std::abs(th.intermediate - (th.positive + th.negative) / 2.0));
      ++trials;
    }
  }
  const bool identity = worst <= 1e-9;

  struct Row {
    const char* name;
    double p, n, i;
  };
  const Row rows[] = {{"barrels", 32.385, 10.407, 21.396},
                      {"magazines", 4.345, 3.462, 3.903},
                      {"receivers", 24.822, 3.915, 14.368},
                      {"stocks", 45.437, 6.397, 25.917}};
  bool published = true;
  std::string detail;
  for (const auto& r : rows) {
    const auto th = ensemble::estimate_thresholds({r.p}, {r.n}, ensemble::StatisticMode::max);
    const double err = std::abs(th.intermediate - r.i);
    published = published && err <= 5e-4 + 1e-9;
    detail += std::string(" ") + r.name + " " + fixed(th.intermediate, 4) + " vs " + fixed(r.i, 3) + ";";
  }
  const double barrels = ensemble::estimate_thresholds({32.385}, {10.407}, ensemble::StatisticMode::max).intermediate;
  const bool exact = std::abs(barrels - 21.396) <= 1e-9;
  return {identity && published && exact,
          std::to_string(trials) + " balanced sets, max |theta_i - midpoint| " + sci(worst) + ";" + detail};
}

// ---------------------------------------------------------------------------

struct Counts {
  std::size_t tp = 0, tn = 0;
};

Counts count(const std::vector<int>& labels, const std::vector<bool>& predicted) {
  Counts c;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == 1 && predicted[i]) ++c.tp;
    if (labels[i] == 0 && !predicted[i]) ++c.tn;
  }
  return c;
}

Verdict criterion3() {
  Rng rng(404);
  std::size_t cases = 0, violations = 0;
  std::string first_violation;
  const auto violated = [&](const std::string& what) {
    if (violations++ == 0) first_violation = what;
  };

  // Rule monotonicity on random decision matrices.
  for (int t = 0; t < 10000; ++t, ++cases) {
    const std::size_t n = 1 + rng.index(60);
    std::vector<int> labels(n);
    std::vector<ensemble::Decisions> d(n);
    const double p = rng.uniform();
    for (std::size_t i = 0; i < n; ++i) {
      labels[i] = static_cast<int>(rng.index(2));
      for (auto& b : d[i]) b = rng.bernoulli(p);
    }
    Counts prev{};
    for (int k = 1; k <= 4; ++k) {
      std::vector<bool> predicted(n);
      for (std::size_t i = 0; i < n; ++i) predicted[i] = ensemble::aggregate(d[i], ensemble::VoteConfig::k_of(k));
      const auto c = count(labels, predicted);
      if (k > 1 && (c.tp > prev.tp || c.tn < prev.tn)) violated("decision matrix, k=" + std::to_string(k));
      prev = c;
    }
  }

  // Heatmap fixtures: random window decisions on a patch grid, statistics in
  // both modes, increasing per-network thresholds and every rule.
  const auto grid = patching::patch_grid(40, 40, {0.5, 0.25});
  for (int t = 0; t < 10000; ++t, ++cases) {
    const std::size_t n = 2 + rng.index(24);
    const auto mode = t % 2 ? ensemble::StatisticMode::mean : ensemble::StatisticMode::max;
    std::vector<int> labels(n);
    std::vector<std::array<double, 4>> stats(n);
    for (std::size_t i = 0; i < n; ++i) {
      labels[i] = static_cast<int>(rng.index(2));
      for (std::size_t net = 0; net < 4; ++net) {
        const double rate = rng.uniform() * (labels[i] ? 0.8 : 0.4);
        std::vector<bool> fired(grid.size());
        for (std::size_t w = 0; w < fired.size(); ++w) fired[w] = rng.bernoulli(rate);
        stats[i][net] = ensemble::image_statistic(ensemble::heatmap_from_decisions(grid, fired), mode);
      }
    }
    // Per-network nondecreasing threshold ladders, ties and zero included.
    const std::size_t steps = 2 + rng.index(5);
    std::array<std::vector<double>, 4> ladder;
    for (auto& l : ladder) {
      double v = rng.bernoulli(0.3) ? 0.0 : rng.uniform(0.0, 4.0);
      for (std::size_t s = 0; s < steps; ++s) {
        l.push_back(v);
        if (!rng.bernoulli(0.2)) v += rng.uniform(0.0, 6.0);
      }
    }
    std::vector<std::vector<Counts>> table(4, std::vector<Counts>(steps));
    for (int k = 1; k <= 4; ++k) {
      for (std::size_t s = 0; s < steps; ++s) {
        std::vector<bool> predicted(n);
        for (std::size_t i = 0; i < n; ++i) {
          ensemble::Decisions d{};
          for (std::size_t net = 0; net < 4; ++net) d[net] = ensemble::network_decision(stats[i][net], ladder[net][s]);
          predicted[i] = ensemble::aggregate(d, ensemble::VoteConfig::k_of(k));
        }
        table[static_cast<std::size_t>(k - 1)][s] = count(labels, predicted);
      }
    }
    for (std::size_t k = 0; k < 4; ++k) {
      for (std::size_t s = 0; s < steps; ++s) {
        const auto& c = table[k][s];
        if (s > 0 && (c.tp > table[k][s - 1].tp || c.tn < table[k][s - 1].tn)) violated("heatmap fixture, theta step");
        if (k > 0 && (c.tp > table[k - 1][s].tp || c.tn < table[k - 1][s].tn)) violated("heatmap fixture, rule step");
      }
    }
  }

  // The sweep itself, with thresholds estimated from the fixture.
  for (int t = 0; t < 2000; ++t, ++cases) {
    const std::size_t n = 4 + rng.index(40);
    std::vector<int> labels(n);
    experiments::StatisticTable stats(n);
    for (std::size_t i = 0; i < n; ++i) {
      labels[i] = static_cast<int>(i % 2);
      for (auto& v : stats[i]) v = std::floor(rng.uniform(0.0, 30.0) + (labels[i] ? rng.uniform(0.0, 15.0) : 0.0));
    }
    try {
      const auto sim2 = experiments::simulation2(labels, stats, ensemble::StatisticMode::max);
      const auto sim3 = experiments::simulation3(labels, stats, sim2.thresholds, {0.25, 0.25, 0.25, 0.25});
      experiments::check_sweep_monotonicity(sim3);
    } catch (const InvariantError& e) {
      violated(std::string("sweep: ") + e.what());
    }
  }
  return {cases >= 10000 && violations == 0,
          std::to_string(cases) + " random cases, " + std::to_string(violations) + " violations" +
              (first_violation.empty() ? "" : " (first: " + first_violation + ")")};
}

// ---------------------------------------------------------------------------

Verdict criterion4() {
  const ensemble::Weights uniform{0.25, 0.25, 0.25, 0.25};
  int checked = 0, mismatches = 0;
  for (int k = 1; k <= 4; ++k) {
    const auto weighted = ensemble::VoteConfig::weighted_by(uniform, k / 4.0 - 1e-9);
    for (int bits = 0; bits < 16; ++bits) {
      const ensemble::Decisions d{(bits & 1) != 0, (bits & 2) != 0, (bits & 4) != 0, (bits & 8) != 0};
      ++checked;
      if (ensemble::aggregate(d, weighted) != ensemble::aggregate(d, ensemble::VoteConfig::k_of(k))) ++mismatches;
    }
  }
  return {mismatches == 0, std::to_string(checked) + " (k, vector) pairs over all 16 vectors, " +
                               std::to_string(mismatches) + " mismatches"};
}

// ---------------------------------------------------------------------------

// Valid window origins along one axis by direct enumeration.
std::vector<Index> enumerate_positions(Index extent, Index side, Index stride) {
  if (side > extent) return {(extent - side) / 2};
  std::vector<Index> out;
  for (Index p = 0; p + side <= extent; ++p) {
    if (p % stride == 0 || p + side == extent) out.push_back(p);
  }
  return out;
}

Verdict criterion5() {
  Rng rng(505);
  int mismatches = 0, cases = 0;
  for (; cases < 1000; ++cases) {
    const auto h = static_cast<Index>(8 + rng.index(600));
    const auto w = static_cast<Index>(8 + rng.index(600));
    const Index shorter = std::min(h, w);
    patching::WindowSpec spec;
    spec.window_ratio = rng.uniform(std::min(1.0, 8.0 / static_cast<double>(shorter)), 1.0);
    spec.step_ratio = rng.uniform(1e-3, 1.0);
    if (rng.bernoulli(0.1)) spec.step_ratio = 1.0;
    spec.per_side = rng.bernoulli(0.25);
    if (static_cast<double>(shorter) * spec.window_ratio < 8.0) spec.window_ratio = 1.0;
    const auto grid = patching::patch_grid(h, w, spec);
    const Index sy = std::max<Index>(1, std::lround(spec.window_ratio * static_cast<double>(spec.per_side ? h : shorter)));
    const Index sx = spec.per_side ? std::max<Index>(1, std::lround(spec.window_ratio * static_cast<double>(w))) : sy;
    const Index ty = std::max<Index>(1, std::lround(spec.step_ratio * static_cast<double>(sy)));
    const Index tx = std::max<Index>(1, std::lround(spec.step_ratio * static_cast<double>(sx)));
    const auto ys = enumerate_positions(h, sy, ty);
    const auto xs = enumerate_positions(w, sx, tx);
    bool same = grid.size() == ys.size() * xs.size();
    for (std::size_t i = 0; same && i < grid.size(); ++i) {
      const auto& r = grid.rects[i];
      same = r.y == ys[i / xs.size()] && r.x == xs[i % xs.size()] && r.width == sx && r.height == sy;
    }
    if (!same) ++mismatches;
  }
  const auto example = patching::patch_grid(400, 400, {0.5, 0.5});
  return {mismatches == 0 && example.size() == 9,
          std::to_string(cases) + " random cases, " + std::to_string(mismatches) +
              " mismatches; 400x400 at 0.5/0.5 gives " + std::to_string(example.size()) + " patches"};
}

// ---------------------------------------------------------------------------

fs::path repro_dir(const Settings& s) { return s.work / "repro"; }

bool repro_complete(const Settings& s) { return fs::exists(repro_dir(s) / "report.json"); }

Verdict criterion6(const Settings& s, double& repro_seconds) {
  const auto dir = repro_dir(s);
  int code = 0;
  if (!(s.reuse && repro_complete(s))) {
    fs::remove_all(dir);
    const auto start = Clock::now();
    code = run_cli(s, "repro-all --profile desk --seed 1 --out " + dir.string(), s.work / "logs" / "repro.log");
    repro_seconds = seconds_since(start);
  }
  if (code != 0) return {false, "repro-all exited with code " + std::to_string(code) + ", see logs/repro.log"};

  bool pass = true;
  std::string detail;
  for (const auto& target : experiments::kTargets) {
    const auto shape = body_shape(dir / "train" / ("grid_" + target + ".csv"));
    pass = pass && shape.first == 5 && shape.second == 5;
    detail += "grid_" + target + " " + std::to_string(shape.first) + " rows; ";
  }
  const auto thresholds = body_shape(dir / "thresholds" / "thresholds.csv");
  const auto sweep = body_shape(dir / "sweep" / "sweep_grid.csv");
  const auto lowdata = body_shape(dir / "lowdata" / "lowdata.csv");
  pass = pass && thresholds == std::pair<std::size_t, std::size_t>{4, 3} &&
         sweep == std::pair<std::size_t, std::size_t>{4, 4} && lowdata == std::pair<std::size_t, std::size_t>{5, 4};
  std::size_t checkpoints = 0;
  for (const auto& e : fs::directory_iterator(dir / "train" / "checkpoints")) checkpoints += e.path().extension() == ".pedk";
  const auto report = experiments::read_json(dir / "report.json");
  const auto trained = report.at("simulation1").at("networks_trained").get<std::size_t>();
  pass = pass && checkpoints == 25 && trained == 25;
  detail += "thresholds " + shape_text(thresholds) + ", sweep " + shape_text(sweep) + ", lowdata " +
            shape_text(lowdata) + ", " + std::to_string(checkpoints) + " checkpoints";
  if (repro_seconds > 0.0) {
    pass = pass && repro_seconds < 20 * 60;
    detail += ", " + fixed(repro_seconds / 60.0, 1) + " min on " + std::to_string(std::thread::hardware_concurrency()) +
              " core(s)";
  } else {
    detail += ", runtime not measured (reused output)";
  }
  return {pass, detail};
}

// ---------------------------------------------------------------------------

struct Drops {
  double single = 0.0;
  double parts = 0.0;
};

Drops lowdata_drops(const fs::path& csv) {
  const auto rows = read_csv(csv);
  Drops d;
  int parts = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double drop = std::stod(rows[i].at(4)) - std::stod(rows[i].at(1));
    if (rows[i][0] == experiments::kWholeTarget) {
      d.single = drop;
    } else {
      d.parts += drop;
      ++parts;
    }
  }
  if (parts != 4) throw std::runtime_error(csv.string() + " does not list four part networks");
  d.parts /= 4.0;
  return d;
}

Verdict criterion7(const Settings& s) {
  if (!repro_complete(s)) return {false, "needs the repro-all output of criterion 6"};
  const auto models = repro_dir(s) / "train" / "models";
  int wins = 0;
  std::string detail;
  for (auto seed : s.seeds) {
    fs::path csv;
    if (seed == 1) {
      csv = repro_dir(s) / "lowdata" / "lowdata.csv";
    } else {
      const auto dir = s.work / ("seed" + std::to_string(seed));
      csv = dir / "lowdata" / "lowdata.csv";
      if (!(s.reuse && fs::exists(csv))) {
        fs::remove_all(dir);
        const auto seed_arg = " --profile desk --seed " + std::to_string(seed);
        int code = run_cli(s, "synth" + seed_arg + " --out " + (dir / "data").string(),
                           s.work / "logs" / ("synth" + std::to_string(seed) + ".log"));
        if (code == 0) {
          code = run_cli(s,
                         "lowdata" + seed_arg + " --data " + (dir / "data").string() + " --models " + models.string() +
                             " --out " + (dir / "lowdata").string(),
                         s.work / "logs" / ("lowdata" + std::to_string(seed) + ".log"));
        }
        if (code != 0) {
          detail += " seed " + std::to_string(seed) + ": exit " + std::to_string(code) + ";";
          continue;
        }
      }
    }
    const auto d = lowdata_drops(csv);
    const bool win = d.single > d.parts;
    wins += win;
    detail += " seed " + std::to_string(seed) + ": single drop " + fixed(d.single, 3) + " vs mean part drop " +
              fixed(d.parts, 3) + (win ? " (yes)" : " (no)") + ";";
  }
  const auto needed = (2 * s.seeds.size() + 2) / 3;
  return {wins >= static_cast<int>(needed),
          "single network drops more in " + std::to_string(wins) + "/" + std::to_string(s.seeds.size()) + " seeds;" +
              detail};
}

// ---------------------------------------------------------------------------

std::map<std::string, std::string> snapshot(const fs::path& root) {
  std::map<std::string, std::string> files;
  if (!fs::exists(root)) return files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    std::ifstream in(e.path(), std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    files[fs::relative(e.path(), root).string()] = ss.str();
  }
  return files;
}

Verdict criterion8(const Settings& s) {
  const auto dir = s.work / "determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const auto config = dir / "tiny.json";
  {
    std::ofstream out(config);
    out << R"({"synth": {"scene_side": 192, "patch_side": 96, "part_positives": 40, "part_negatives": 40,
 "train_cap_per_class": 20, "whole_positive_split": [10, 6, 6], "whole_negative_split": [20, 6, 6],
 "clutter_density": 4}, "train": {"epochs": 2, "batch_size": 8}})";
  }
  const std::string common = " --config " + config.string() + " --seed 5 --workers 2";
  const auto data = dir / "data";
  const auto train = dir / "train";
  const auto models = train / "models";
  const auto positive = dir / "fixture.png";

  struct Step {
    std::string name;
    std::string args;
    std::vector<fs::path> outputs;  // compared between runs
    bool capture_stdout = false;
  };
  const std::vector<Step> steps{
      {"synth", "synth" + common + " --out " + data.string(), {data}},
      {"train", "train" + common + " --archs 3x3,4x3 --data " + data.string() + " --out " + train.string(), {train}},
      {"eval", "eval" + common + " --data " + data.string() + " --models " + models.string() + " --out " +
                   (dir / "eval").string(),
       {dir / "eval"}},
      {"thresholds", "thresholds" + common + " --data " + data.string() + " --models " + models.string() + " --out " +
                         (dir / "thresholds").string(),
       {dir / "thresholds", models}},
      {"sweep", "sweep" + common + " --data " + data.string() + " --models " + models.string() + " --out " +
                    (dir / "sweep").string(),
       {dir / "sweep"}},
      {"lowdata", "lowdata" + common + " --data " + data.string() + " --models " + models.string() + " --out " +
                      (dir / "lowdata").string(),
       {dir / "lowdata"}},
      {"detect", "detect " + positive.string() + common + " --json --models " + models.string() + " --heatmaps " +
                     (dir / "heatmaps").string(),
       {dir / "heatmaps"},
       true},
      {"detect-single", "detect " + positive.string() + common + " --json --single --models " + models.string(), {}, true},
      {"repro-all", "repro-all" + common + " --epochs 1 --out " + (dir / "repro").string(), {dir / "repro"}},
  };

  std::string detail;
  bool pass = true;
  std::size_t compared = 0;
  for (const auto& step : steps) {
    if (step.name == "detect") {
      // A whole-object test image from the generated corpus.
      const auto manifest = experiments::read_json(data / data::kManifestName);
      for (const auto& d : manifest.at("datasets")) {
        if (d.at("name") != experiments::kWholeTarget) continue;
        for (const auto& sm : d.at("samples")) {
          if (sm.at("split") == "test" && sm.at("label") == "positive") {
            fs::copy_file(data / sm.at("path").get<std::string>(), positive, fs::copy_options::overwrite_existing);
            break;
          }
        }
      }
    }
    std::array<std::map<std::string, std::string>, 2> seen;
    bool ok = true;
    for (int round = 0; round < 2 && ok; ++round) {
      for (const auto& out : step.outputs) {
        if (out != models) fs::remove_all(out);
      }
      const auto log = dir / "logs" / (step.name + std::to_string(round) + ".log");
      const auto args = step.args;
      const int code = run_cli(s, args, log);
      if (code != 0) {
        ok = false;
        detail += " " + step.name + " exit " + std::to_string(code) + ";";
        break;
      }
      for (const auto& out : step.outputs) {
        for (auto& [name, bytes] : snapshot(out)) seen[static_cast<std::size_t>(round)][out.filename().string() + "/" + name] = bytes;
      }
      if (step.capture_stdout) {
        std::ifstream in(log, std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        seen[static_cast<std::size_t>(round)]["stdout"] = ss.str();
      }
    }
    if (ok && seen[0] != seen[1]) {
      ok = false;
      std::string differing;
      for (const auto& [name, bytes] : seen[0]) {
        const auto it = seen[1].find(name);
        if (it == seen[1].end() || it->second != bytes) {
          differing = name;
          break;
        }
      }
      detail += " " + step.name + " differs (" + differing + ");";
    }
    if (ok && seen[0].empty()) {
      ok = false;
      detail += " " + step.name + " produced no output;";
    }
    compared += seen[0].size();
    pass = pass && ok;
  }
  return {pass, std::to_string(steps.size()) + " commands run twice, " + std::to_string(compared) +
                    " outputs compared byte for byte" + (detail.empty() ? "" : ";" + detail)};
}

// ---------------------------------------------------------------------------

Verdict criterion9(const Settings& s) {
  const auto dir = s.work / "checkpoints";
  fs::remove_all(dir);
  fs::create_directories(dir);
  std::vector<std::pair<std::string, nn::Network<float>>> networks;
  if (repro_complete(s)) {
    for (const auto& target : experiments::kTargets) {
      const auto path = repro_dir(s) / "train" / "models" / (target + ".pedk");
      if (fs::exists(path)) networks.emplace_back(target, nn::load_checkpoint(path));
    }
  }
  for (const auto& arch : zoo::architecture_grid()) {
    networks.emplace_back("init-" + arch.label(), zoo::build_component_network(arch, 96, 900 + static_cast<std::uint64_t>(arch.conv_blocks)));
  }

  data::SynthConfig synth;
  std::vector<data::Image> fixture;
  Rng rng(909);
  for (int i = 0; i < 100; ++i) {
    const auto seed = derive_seed(909, "fixture", static_cast<std::uint64_t>(i));
    const auto scene = i % 2 ? data::render_clutter_scene(synth, seed)
                             : data::render_object_scene(synth, data::draw_arrangements(synth, 1, true, seed)[0], seed);
    fixture.push_back(scene.image);
  }

  bool pass = true;
  std::size_t identical = 0, classified = 0;
  std::string detail;
  for (const auto& [name, net] : networks) {
    const auto a = dir / (name + ".a.pedk");
    const auto b = dir / (name + ".b.pedk");
    nn::save_checkpoint(a, net);
    const auto loaded = nn::load_checkpoint(a);
    nn::save_checkpoint(b, loaded);
    const bool same_bytes = snapshot(dir)[a.filename().string()] == snapshot(dir)[b.filename().string()];
    identical += same_bytes;
    bool same_outputs = loaded.parameters() == net.parameters();
    const Index side = net.architecture().input_side;
    for (const auto& image : fixture) {
      const auto x = patching::resize(image, side, side);
      same_outputs = same_outputs && net.classify(x) == loaded.classify(x) && net.predict(x) == loaded.predict(x);
      ++classified;
    }
    if (!same_bytes || !same_outputs) detail += " " + name + " differs;";
    pass = pass && same_bytes && same_outputs;
  }
  return {pass && !networks.empty(),
          std::to_string(identical) + "/" + std::to_string(networks.size()) +
              " checkpoints bit-identical after save-load-save, " + std::to_string(classified) +
              " classifications on a 100-image fixture compared" + detail};
}

}  // namespace

int main(int argc, char** argv) {
  Settings s;
  std::vector<int> only;
  std::string work = "acceptance-work";
  CLI::App app("Acceptance suite");
  app.add_option("--cli", s.cli, "Path to the pedk executable")->required();
  app.add_option("--work", work, "Scratch directory");
  app.add_option("--only", only, "Run only these criteria")->delimiter(',');
  app.add_option("--seeds", s.seeds, "Seeds for the low-data comparison")->delimiter(',');
  app.add_flag("--reuse", s.reuse, "Reuse completed runs found in the scratch directory");
  CLI11_PARSE(app, argc, argv);
  s.work = fs::absolute(work);
  s.only = {only.begin(), only.end()};
  fs::create_directories(s.work);

  const auto wanted = [&](int c) { return s.only.empty() || s.only.count(c) != 0; };
  const std::map<int, std::string> names{{1, "gradient correctness"},
                                         {2, "threshold identities"},
                                         {3, "vote/threshold monotonicity"},
                                         {4, "uniform-weight equivalence"},
                                         {5, "patch-grid oracle"},
                                         {6, "protocol shapes"},
                                         {7, "low-data comparison"},
                                         {8, "determinism"},
                                         {9, "checkpoint round trip"}};
  double repro_seconds = 0.0;
  const std::map<int, std::function<Verdict()>> criteria{
      {1, criterion1},
      {2, criterion2},
      {3, criterion3},
      {4, criterion4},
      {5, criterion5},
      {6, [&] { return criterion6(s, repro_seconds); }},
      {7, [&] { return criterion7(s); }},
      {8, [&] { return criterion8(s); }},
      {9, [&] { return criterion9(s); }},
  };
  int failures = 0;
  for (const auto& [id, fn] : criteria) {
    if (!wanted(id)) continue;
    Verdict v;
    try {
      v = fn();
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    failures += !v.pass;
    std::cout << "criterion " << id << " " << (v.pass ? "PASS" : "FAIL") << "  " << names.at(id) << ": " << v.detail
              << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
