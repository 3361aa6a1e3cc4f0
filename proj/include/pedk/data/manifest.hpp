#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "pedk/data/dataset.hpp"

namespace pedk::data {

inline constexpr const char* kManifestName = "manifest.json";

struct DatasetCollection {
  std::vector<PartitionedDataset> datasets;

  const PartitionedDataset& get(const std::string& name) const;
  PartitionedDataset& get(const std::string& name);
  bool contains(const std::string& name) const;
};

// Assigns relative paths, writes every image as PNG under `root`, and writes
// root/manifest.json with the SHA-256 of each file.
void write_collection(const std::filesystem::path& root, DatasetCollection& collection, std::size_t workers = 1);

// Parses and validates root/manifest.json. Throws SplitLeakError for a
// source_id in more than one split, MissingFileError naming an absent image,
// DigestMismatchError when a file's content changed.
DatasetCollection read_collection(const std::filesystem::path& root, std::size_t workers = 1);

nlohmann::json manifest_json(const DatasetCollection& collection);

}  // namespace pedk::data
