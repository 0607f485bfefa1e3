#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "scenediff/geometric.hpp"
#include "scenediff/relation.hpp"
#include "scenediff/simulator.hpp"

namespace scenediff {

// Every tunable in one flat JSON object; unknown keys are rejected.
struct EngineConfig {
  SimConfig sim;
  GeoConfig geo;
  HeuristicConfig heuristic;
};

EngineConfig parse_engine_config(std::string_view text);
EngineConfig load_engine_config(const std::filesystem::path& path);
std::string engine_config_json(const EngineConfig& config);

struct DatasetOptions {
  bool render = false;
  bool emit_crops = false;  // implies render
  int jobs = 1;
};

struct ManifestFile {
  std::string path;  // relative to the dataset root
  std::string sha256;
};

struct Manifest {
  SimConfig config;
  std::uint64_t n = 0;
  std::vector<ManifestFile> files;  // sorted by path
};

// truth.json: truth tasks plus the per-scene relation listings.
std::string serialize_truth(const ScenePairSample& sample);

// Writes sample_<k>/{initial,final}.json, truth.json, optional PNGs and
// crops, then manifest.json. Output bytes depend only on (config, n, options
// other than jobs).
Manifest generate_dataset(const SimConfig& config, std::uint64_t n,
                          const std::filesystem::path& out_dir, const DatasetOptions& options = {});

std::string serialize_manifest(const Manifest& manifest);

// `sample_<k>` subdirectories sorted by k.
std::vector<std::filesystem::path> list_sample_dirs(const std::filesystem::path& root);

}  // namespace scenediff
