#include "pedk/data/manifest.hpp"

#include <cstdio>
#include <fstream>

#include "pedk/error.hpp"
#include "pedk/parallel.hpp"

namespace pedk::data {

namespace fs = std::filesystem;

namespace {

struct Entry {
  PartitionedDataset* dataset;
  Sample* sample;
  std::string digest;
};

}  // namespace

const PartitionedDataset& DatasetCollection::get(const std::string& name) const {
  for (const auto& d : datasets) {
    if (d.name == name) return d;
  }
  throw DataError("dataset '" + name + "' not found in manifest");
}

PartitionedDataset& DatasetCollection::get(const std::string& name) {
  return const_cast<PartitionedDataset&>(std::as_const(*this).get(name));
}

bool DatasetCollection::contains(const std::string& name) const {
  for (const auto& d : datasets) {
    if (d.name == name) return true;
  }
  return false;
}

nlohmann::json manifest_json(const DatasetCollection& collection) {
  nlohmann::json datasets = nlohmann::json::array();
  for (const auto& d : collection.datasets) {
    nlohmann::json samples = nlohmann::json::array();
    for (Split split : {Split::train, Split::validation, Split::test}) {
      for (const auto& s : d.split(split)) {
        samples.push_back({{"path", s.path},
                           {"label", to_string(s.label)},
                           {"part", s.part ? nlohmann::json(to_string(*s.part)) : nlohmann::json(nullptr)},
                           {"split", to_string(split)},
                           {"origin", to_string(s.origin)},
                           {"source_id", s.source_id}});
      }
    }
    datasets.push_back({{"name", d.name},
                        {"target", d.part ? to_string(*d.part) : std::string("whole")},
                        {"samples", std::move(samples)}});
  }
  return {{"format", "pedk-manifest"}, {"version", 1}, {"datasets", std::move(datasets)}};
}

void write_collection(const fs::path& root, DatasetCollection& collection, std::size_t workers) {
  std::vector<Entry> entries;
  for (auto& d : collection.datasets) {
    check_no_leakage(d);
    for (Split split : {Split::train, Split::validation, Split::test}) {
      std::size_t index = 0;
      for (auto& s : d.split(split)) {
        char name[64];
        std::snprintf(name, sizeof name, "%s_%05zu.png", to_string(s.label).c_str(), index++);
        s.path = d.name + "/" + to_string(split) + "/" + name;
        entries.push_back({&d, &s, {}});
      }
    }
  }
  parallel_for(entries.size(), workers, [&](std::size_t i) {
    const auto bytes = encode_png(entries[i].sample->image);
    write_bytes(root / entries[i].sample->path, bytes);
    entries[i].digest = sha256_hex(bytes);
  });
  auto manifest = manifest_json(collection);
  std::size_t k = 0;
  for (auto& d : manifest["datasets"]) {
    for (auto& s : d["samples"]) s["sha256"] = entries[k++].digest;
  }
  fs::create_directories(root);
  std::ofstream out(root / kManifestName, std::ios::trunc);
  out << manifest.dump(1) << '\n';
  if (!out) throw DataError("failed writing " + (root / kManifestName).string());
}

DatasetCollection read_collection(const fs::path& root, std::size_t workers) {
  const fs::path manifest_path = root / kManifestName;
  std::ifstream in(manifest_path);
  if (!in) throw MissingFileError("manifest not found: " + manifest_path.string());
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DataError("invalid manifest " + manifest_path.string() + ": " + e.what());
  }

  DatasetCollection collection;
  std::vector<Entry> entries;
  try {
    const auto& datasets = manifest.at("datasets");
    collection.datasets.reserve(datasets.size());
    for (const auto& d : datasets) {
      PartitionedDataset dataset;
      dataset.name = d.at("name").get<std::string>();
      const auto target = d.at("target").get<std::string>();
      if (target != "whole") dataset.part = part_from_string(target);
      for (const auto& s : d.at("samples")) {
        Sample sample;
        sample.path = s.at("path").get<std::string>();
        sample.label = label_from_string(s.at("label").get<std::string>());
        if (!s.at("part").is_null()) sample.part = part_from_string(s.at("part").get<std::string>());
        sample.origin = origin_from_string(s.at("origin").get<std::string>());
        sample.source_id = s.at("source_id").get<std::string>();
        dataset.split(split_from_string(s.at("split").get<std::string>())).push_back(std::move(sample));
      }
      check_no_leakage(dataset);
      collection.datasets.push_back(std::move(dataset));
    }
    std::size_t k = 0;
    for (const auto& d : datasets) {
      auto& dataset = collection.datasets[k++];
      std::size_t counters[3] = {0, 0, 0};
      for (const auto& s : d.at("samples")) {
        const auto split = split_from_string(s.at("split").get<std::string>());
        auto& sample = dataset.split(split)[counters[static_cast<int>(split)]++];
        entries.push_back({&dataset, &sample, s.at("sha256").get<std::string>()});
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError("malformed manifest " + manifest_path.string() + ": " + e.what());
  } catch (const ConfigError& e) {
    throw DataError("malformed manifest " + manifest_path.string() + ": " + e.what());
  }

  for (const auto& e : entries) {
    if (!fs::exists(root / e.sample->path)) {
      throw MissingFileError("manifest references missing image: " + (root / e.sample->path).string());
    }
  }
  parallel_for(entries.size(), workers, [&](std::size_t i) {
    const auto path = root / entries[i].sample->path;
    const auto bytes = read_bytes(path);
    if (sha256_hex(bytes) != entries[i].digest) {
      throw DigestMismatchError("content digest mismatch for " + path.string());
    }
    entries[i].sample->image = decode_png(bytes);
  });
  return collection;
}

}  // namespace pedk::data
