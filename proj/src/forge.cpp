#include "constyle/forge.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "constyle/image_io.hpp"
#include "constyle/parallel.hpp"

namespace constyle {

namespace fs = std::filesystem;
using nlohmann::json;

CropPlan plan_crops(int width, int height, int crop, int step) {
  if (crop <= 0 || step <= 0) throw ValueError("plan_crops: crop and step must be positive");
  if (width < crop || height < crop) throw ValueError("plan_crops: image smaller than crop");

  auto axis_positions = [&](int dim) {
    std::vector<int> pos;
    for (int p = 0; p <= dim - crop; p += step) pos.push_back(p);
    if (pos.back() != dim - crop) pos.push_back(dim - crop);
    return pos;
  };

  const std::vector<int> xs = axis_positions(width);
  const std::vector<int> ys = axis_positions(height);
  CropPlan plan;
  plan.positions.reserve(xs.size() * ys.size());
  for (int y : ys)
    for (int x : xs) plan.positions.emplace_back(x, y);
  return plan;
}

bool glob_match(const std::string& pattern, const std::string& name) {
  std::size_t p = 0, n = 0, star_p = std::string::npos, star_n = 0;
  while (n < name.size()) {
    if (p < pattern.size() && (pattern[p] == '?' || pattern[p] == name[n])) {
      ++p, ++n;
    } else if (p < pattern.size() && pattern[p] == '*') {
      star_p = p++;
      star_n = n;
    } else if (star_p != std::string::npos) {
      p = star_p + 1;
      n = ++star_n;
    } else {
      return false;
    }
  }
  while (p < pattern.size() && pattern[p] == '*') ++p;
  return p == pattern.size();
}

void SourceSpec::validate() const {
  if (task.empty()) throw ValueError("SourceSpec: task name required");
  if (crop <= 0 || step <= 0) throw ValueError("SourceSpec: crop and step must be positive");
  if (!paired && synthesis != "gaussian_noise" && synthesis != "jpeg")
    throw ValueError("SourceSpec: synthetic task requires synthesis 'gaussian_noise' or 'jpeg'");
  if (noise_sigma_min > noise_sigma_max || jpeg_quality_min > jpeg_quality_max)
    throw ValueError("SourceSpec: min > max in synthesis ranges");
}

json SourceSpec::to_json() const {
  return json{{"task", task},
              {"input_dir", input_dir},
              {"target_dir", target_dir},
              {"crop", crop},
              {"step", step},
              {"paired", paired},
              {"synthesis", synthesis},
              {"exclude", exclude},
              {"noise_sigma_min", noise_sigma_min},
              {"noise_sigma_max", noise_sigma_max},
              {"jpeg_quality_min", jpeg_quality_min},
              {"jpeg_quality_max", jpeg_quality_max}};
}

SourceSpec SourceSpec::from_json(const json& j) {
  SourceSpec s;
  s.task = j.at("task").get<std::string>();
  s.input_dir = j.value("input_dir", std::string());
  s.target_dir = j.value("target_dir", std::string());
  s.crop = j.value("crop", s.crop);
  s.step = j.value("step", s.step);
  s.paired = j.value("paired", s.paired);
  s.synthesis = j.value("synthesis", s.synthesis);
  if (j.contains("exclude")) s.exclude = j.at("exclude").get<std::vector<std::string>>();
  s.noise_sigma_min = j.value("noise_sigma_min", s.noise_sigma_min);
  s.noise_sigma_max = j.value("noise_sigma_max", s.noise_sigma_max);
  s.jpeg_quality_min = j.value("jpeg_quality_min", s.jpeg_quality_min);
  s.jpeg_quality_max = j.value("jpeg_quality_max", s.jpeg_quality_max);
  s.validate();
  return s;
}

json ManifestEntry::to_json() const {
  json j{{"task", task},     {"source_id", source_id}, {"x", x},
         {"y", y},           {"w", w},                 {"h", h},
         {"input", input_path}, {"target", target_path}};
  if (recipe) j["recipe"] = recipe->to_json();
  return j;
}

ManifestEntry ManifestEntry::from_json(const json& j) {
  ManifestEntry e;
  e.task = j.at("task").get<std::string>();
  e.source_id = j.at("source_id").get<std::string>();
  e.x = j.at("x").get<int>();
  e.y = j.at("y").get<int>();
  e.w = j.at("w").get<int>();
  e.h = j.at("h").get<int>();
  e.input_path = j.at("input").get<std::string>();
  e.target_path = j.at("target").get<std::string>();
  if (j.contains("recipe")) e.recipe = DegradationRecipe::from_json(j.at("recipe"));
  return e;
}

namespace {

std::vector<std::string> list_pngs(const std::string& dir) {
  if (!fs::is_directory(dir)) throw DataError("forge: source directory not found: " + dir);
  std::vector<std::string> names;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), ::tolower);
    if (ext == ".png") names.push_back(entry.path().filename().string());
  }
  std::sort(names.begin(), names.end());
  return names;
}

std::string tile_name(const std::string& source_id, int x, int y) {
  const std::string stem = fs::path(source_id).stem().string();
  return stem + "_x" + std::to_string(x) + "_y" + std::to_string(y) + ".png";
}

struct PerImageResult {
  std::vector<ManifestEntry> entries;
  std::string warning;
};

}  // namespace

ForgeResult forge_task(const SourceSpec& spec, const std::string& out_dir, std::uint64_t seed,
                       int threads) {
  spec.validate();
  std::vector<std::string> names = list_pngs(spec.input_dir);
  if (!spec.exclude.empty()) {
    std::vector<std::string> kept;
    for (const auto& n : names) {
      const bool excluded = std::any_of(spec.exclude.begin(), spec.exclude.end(),
                                        [&](const std::string& p) { return glob_match(p, n); });
      if (!excluded) kept.push_back(n);
    }
    names = std::move(kept);
  }
  if (names.empty()) throw DataError("forge: no usable source images in " + spec.input_dir);

  const fs::path input_out = fs::path(out_dir) / spec.task / "input";
  const fs::path target_out = fs::path(out_dir) / spec.task / "target";
  fs::create_directories(input_out);
  fs::create_directories(target_out);

  // master seed is folded with a task-name hash so tasks draw distinct streams
  std::uint64_t task_seed = seed;
  for (char c : spec.task) task_seed = splitmix64(task_seed ^ static_cast<std::uint64_t>(c));

  std::vector<PerImageResult> results(names.size());

  parallel_for(names.size(), threads, [&](std::size_t idx) {
    const std::string& name = names[idx];
    PerImageResult& res = results[idx];

    const ImageTensor source = load_image((fs::path(spec.input_dir) / name).string());
    if (source.height < spec.crop || source.width < spec.crop) {
      res.warning = "skipped undersized image " + name + " (" + std::to_string(source.width) +
                    "x" + std::to_string(source.height) + ")";
      return;
    }

    ImageTensor target_img;
    if (spec.paired) {
      const fs::path tpath = fs::path(spec.target_dir) / name;
      target_img = load_image(tpath.string());
      if (!target_img.same_shape(source))
        throw DataError("forge: dimension mismatch between input/target pair " + name);
    }

    const CropPlan plan = plan_crops(source.width, source.height, spec.crop, spec.step);
    Rng image_rng(child_seed(task_seed, idx));

    std::size_t tile_idx = 0;
    for (const auto& [cx, cy] : plan.positions) {
      ManifestEntry entry;
      entry.task = spec.task;
      entry.source_id = name;
      entry.x = cx;
      entry.y = cy;
      entry.w = spec.crop;
      entry.h = spec.crop;
      const std::string tile = tile_name(name, cx, cy);
      entry.input_path = (fs::path(spec.task) / "input" / tile).string();
      entry.target_path = (fs::path(spec.task) / "target" / tile).string();

      const ImageTensor clean_tile = crop(spec.paired ? target_img : source, cx, cy, spec.crop, spec.crop);
      ImageTensor input_tile;
      if (spec.paired) {
        input_tile = crop(source, cx, cy, spec.crop, spec.crop);
      } else {
        // Synthetic pair: degrade the clean tile, log the recipe.
        Rng tile_rng = image_rng.child(tile_idx);
        DegradationRecipe recipe;
        recipe.seed = tile_rng.seed();
        if (spec.synthesis == "gaussian_noise") {
          const double sigma = tile_rng.uniform(spec.noise_sigma_min, spec.noise_sigma_max);
          const std::uint64_t noise_seed = tile_rng.next_u64();
          recipe.steps.push_back(
              {"gaussian_noise", json{{"sigma", sigma}, {"gray", false}, {"seed", noise_seed}}});
        } else {
          const int q = static_cast<int>(
              tile_rng.uniform_int(spec.jpeg_quality_min, spec.jpeg_quality_max));
          recipe.steps.push_back({"jpeg", json{{"quality", q}, {"chroma_subsample", false}}});
        }
        input_tile = apply_recipe(recipe, clean_tile);
        entry.recipe = std::move(recipe);
      }

      save_image(input_tile, (fs::path(out_dir) / entry.input_path).string());
      save_image(clean_tile, (fs::path(out_dir) / entry.target_path).string());
      res.entries.push_back(std::move(entry));
      ++tile_idx;
    }
  });

  ForgeResult out;
  for (auto& res : results) {
    if (!res.warning.empty()) out.warnings.push_back(res.warning);
    for (auto& e : res.entries) out.entries.push_back(std::move(e));
  }
  return out;
}

void write_manifest(const std::vector<ManifestEntry>& entries, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("write_manifest: cannot open " + path);
  for (const auto& e : entries) out << e.to_json().dump() << "\n";
}

std::vector<ManifestEntry> read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("read_manifest: cannot open " + path);
  std::vector<ManifestEntry> entries;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      entries.push_back(ManifestEntry::from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw DataError("read_manifest: bad line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return entries;
}

json VerifyReport::to_json() const {
  return json{{"entries_checked", entries_checked},
              {"replays_checked", replays_checked},
              {"violations", violations},
              {"ok", ok()}};
}

VerifyReport verify_manifest(const std::vector<ManifestEntry>& entries,
                             const std::string& data_root, std::size_t replay_samples,
                             std::uint64_t sample_seed) {
  VerifyReport report;
  std::vector<std::size_t> synthetic;

  for (std::size_t i = 0; i < entries.size(); ++i) {
    const ManifestEntry& e = entries[i];
    ++report.entries_checked;
    const fs::path in_path = fs::path(data_root) / e.input_path;
    const fs::path tg_path = fs::path(data_root) / e.target_path;
    if (!fs::exists(in_path)) {
      report.violations.push_back("missing input tile: " + e.input_path);
      continue;
    }
    if (!fs::exists(tg_path)) {
      report.violations.push_back("missing target tile: " + e.target_path);
      continue;
    }
    if (e.w <= 0 || e.h <= 0 || e.x < 0 || e.y < 0) {
      report.violations.push_back("bad crop coords in entry for " + e.input_path);
      continue;
    }
    const ImageTensor input = load_image(in_path.string());
    const ImageTensor target = load_image(tg_path.string());
    if (input.height != e.h || input.width != e.w)
      report.violations.push_back("input tile dimension mismatch: " + e.input_path);
    if (target.height != e.h || target.width != e.w)
      report.violations.push_back("target tile dimension mismatch: " + e.target_path);
    if (!input.same_shape(target))
      report.violations.push_back("input/target shape mismatch: " + e.input_path);
    if (e.recipe) synthetic.push_back(i);
  }

  // Replay spot-checks on a deterministic sample of synthetic entries.
  Rng rng(sample_seed);
  std::vector<std::size_t> sample = synthetic;
  for (std::size_t i = sample.size(); i > 1; --i)
    std::swap(sample[i - 1], sample[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i) - 1))]);
  if (sample.size() > replay_samples) sample.resize(replay_samples);

  for (std::size_t idx : sample) {
    const ManifestEntry& e = entries[idx];
    const fs::path in_path = fs::path(data_root) / e.input_path;
    const fs::path tg_path = fs::path(data_root) / e.target_path;
    if (!fs::exists(in_path) || !fs::exists(tg_path)) continue;
    const ImageTensor stored = load_image(in_path.string());
    const ImageTensor clean = load_image(tg_path.string());
    const ImageTensor replayed = apply_recipe(*e.recipe, clean);
    ++report.replays_checked;
    // Compare at 8-bit precision: stored tiles went through PNG quantization.
    bool equal = stored.same_shape(replayed);
    if (equal) {
      for (std::size_t i = 0; i < stored.data.size(); ++i) {
        const int a = static_cast<int>(std::lround(clamp01(stored.data[i]) * 255.f));
        const int b = static_cast<int>(std::lround(clamp01(replayed.data[i]) * 255.f));
        if (a != b) {
          equal = false;
          break;
        }
      }
    }
    if (!equal) report.violations.push_back("recipe replay mismatch: " + e.input_path);
  }

  return report;
}

}  // namespace constyle
