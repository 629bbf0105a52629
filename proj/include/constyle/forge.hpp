#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "constyle/degrade.hpp"

namespace constyle {

struct CropPlan {
  std::vector<std::pair<int, int>> positions;  // (x, y) top-left, row-major order
};

// Grid positions {0, step, 2*step, ...} per axis plus an edge-snapped final
// position at (dim - crop) when the grid does not land there.
CropPlan plan_crops(int width, int height, int crop, int step);

// One source directory to tile. paired=false marks synthetic tasks whose
// degraded inputs are generated from the clean source (field `synthesis`).
struct SourceSpec {
  std::string task;
  std::string input_dir;
  std::string target_dir;  // unused for synthetic tasks
  int crop = 256;
  int step = 150;
  bool paired = true;
  std::string synthesis;  // "gaussian_noise" | "jpeg" when paired == false
  std::vector<std::string> exclude;  // glob patterns on filenames (curation)
  double noise_sigma_min = 0.0, noise_sigma_max = 50.0 / 255.0;
  int jpeg_quality_min = 10, jpeg_quality_max = 40;

  void validate() const;
  nlohmann::json to_json() const;
  static SourceSpec from_json(const nlohmann::json& j);
};

struct ManifestEntry {
  std::string task;
  std::string source_id;
  int x = 0, y = 0, w = 0, h = 0;
  std::string input_path;   // relative to the dataset root
  std::string target_path;  // relative to the dataset root
  std::optional<DegradationRecipe> recipe;

  nlohmann::json to_json() const;
  static ManifestEntry from_json(const nlohmann::json& j);
};

struct ForgeResult {
  std::vector<ManifestEntry> entries;
  std::vector<std::string> warnings;  // skipped undersized/excluded sources
};

// Tiles every usable source image of one task into crop x crop PNG pairs under
// out_dir/task/{input,target}/ and returns the manifest entries in
// (source_id, crop index) order. Deterministic for a fixed seed, independent
// of thread count.
ForgeResult forge_task(const SourceSpec& spec, const std::string& out_dir, std::uint64_t seed,
                       int threads = 1);

void write_manifest(const std::vector<ManifestEntry>& entries, const std::string& path);
std::vector<ManifestEntry> read_manifest(const std::string& path);

struct VerifyReport {
  std::size_t entries_checked = 0;
  std::size_t replays_checked = 0;
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
  nlohmann::json to_json() const;
};

// Checks file existence, tile dimensions, coordinate pairing, and replays the
// recipes of up to `replay_samples` synthetic entries bit-exactly.
VerifyReport verify_manifest(const std::vector<ManifestEntry>& entries,
                             const std::string& data_root, std::size_t replay_samples = 10,
                             std::uint64_t sample_seed = 0);

// Simple glob with '*' and '?'.
bool glob_match(const std::string& pattern, const std::string& name);

}  // namespace constyle
