#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "constyle/image.hpp"
#include "constyle/rng.hpp"

namespace constyle {

struct Severity {
  int level;  // 1..5
  explicit Severity(int lv) : level(lv) {
    if (lv < 1 || lv > 5) throw ValueError("Severity: level must be in 1..5");
  }
};

struct SnowParams {
  double loc, scale, zoom, threshold;
  int blur_length;  // odd
  double blend;
};

// Severity tables for the weather-branch operators. Values mirror the usual
// corruption-benchmark intensities and can be overridden from config.
struct WeatherConstants {
  std::array<int, 5> motion_blur_length{7, 9, 13, 17, 21};
  std::array<double, 5> contrast_factor{0.4, 0.3, 0.2, 0.1, 0.05};
  std::array<SnowParams, 5> snow{{{0.1, 0.3, 3.0, 0.5, 11, 0.8},
                                  {0.2, 0.3, 2.0, 0.5, 13, 0.7},
                                  {0.55, 0.3, 4.0, 0.9, 13, 0.7},
                                  {0.55, 0.3, 4.5, 0.85, 13, 0.65},
                                  {0.55, 0.3, 2.5, 0.85, 13, 0.55}}};
};

// Normalized anisotropic Gaussian; theta rotates the ellipse axes.
Kernel2D gaussian_kernel(double sigma_x, double sigma_y, double theta, int size);

// Normalized line kernel of odd `length` oriented at `angle`.
Kernel2D line_kernel(int length, double angle);

// Additive N(0, sigma^2) per sample; with gray=true one noise plane is shared
// across channels. Output clamped to [0,1].
ImageTensor add_gaussian_noise(const ImageTensor& img, double sigma, bool gray, Rng& rng);

// Poisson(x*scale)/scale shot noise, clamped to [0,1].
ImageTensor add_poisson_noise(const ImageTensor& img, double scale, Rng& rng);

ImageTensor motion_blur(const ImageTensor& img, Severity severity, double angle,
                        const WeatherConstants& wc = WeatherConstants{});

// Composite snow: sparse Gaussian layer, zoom, threshold, motion blur, then
// blend with a luminance-lifted copy and add the layer plus its 180-degree
// rotation. 3-channel input only.
ImageTensor snow(const ImageTensor& img, Severity severity, Rng& rng,
                 const WeatherConstants& wc = WeatherConstants{});

ImageTensor contrast(const ImageTensor& img, Severity severity,
                     const WeatherConstants& wc = WeatherConstants{});

// Resolved-parameter forms used by recipe replay.
ImageTensor motion_blur_resolved(const ImageTensor& img, int length, double angle);
ImageTensor snow_resolved(const ImageTensor& img, const SnowParams& p, Rng& rng);
ImageTensor contrast_resolved(const ImageTensor& img, double factor);

// Ordered, replayable log of degradation steps. Every sampled parameter is
// recorded resolved (lengths, factors, per-step seeds), so replay does not
// depend on the configuration tables that produced the recipe.
struct RecipeStep {
  std::string op;
  nlohmann::json params;
};

struct DegradationRecipe {
  std::uint64_t seed = 0;
  std::vector<RecipeStep> steps;

  nlohmann::json to_json() const;
  static DegradationRecipe from_json(const nlohmann::json& j);
};

// Parameter ranges for one blur -> noise -> JPEG stage.
struct StageRanges {
  int kernel_min = 7, kernel_max = 21;  // odd sizes
  double sigma_min = 0.2, sigma_max = 3.0;
  double gaussian_noise_prob = 0.5;
  double noise_sigma_min = 1.0 / 255.0, noise_sigma_max = 30.0 / 255.0;
  double gray_noise_prob = 0.4;
  double poisson_scale_min = 200.0, poisson_scale_max = 4000.0;
  int jpeg_quality_min = 30, jpeg_quality_max = 95;
  double chroma_subsample_prob = 0.5;
};

struct DegradeConfig {
  StageRanges stage1;
  StageRanges stage2{.kernel_min = 7,
                     .kernel_max = 15,
                     .sigma_min = 0.2,
                     .sigma_max = 1.5,
                     .gaussian_noise_prob = 0.5,
                     .noise_sigma_min = 1.0 / 255.0,
                     .noise_sigma_max = 25.0 / 255.0,
                     .gray_noise_prob = 0.4,
                     .poisson_scale_min = 500.0,
                     .poisson_scale_max = 8000.0,
                     .jpeg_quality_min = 30,
                     .jpeg_quality_max = 95,
                     .chroma_subsample_prob = 0.5};
  double stage2_prob = 0.8;
  double weather_fraction = 0.4;
  WeatherConstants weather;

  void validate() const;
  nlohmann::json to_json() const;
  static DegradeConfig from_json(const nlohmann::json& j);
};

// Two rounds of blur -> (Gaussian|Poisson) noise -> JPEG with independently
// sampled parameters; the second round runs with probability stage2_prob.
// Spatial size is preserved throughout.
std::pair<ImageTensor, DegradationRecipe> two_stage_pipeline(const ImageTensor& img,
                                                             const DegradeConfig& cfg, Rng& rng);

enum class BranchTag { weather, chain };

const char* branch_name(BranchTag t);

struct DegradedItem {
  ImageTensor image;
  DegradationRecipe recipe;
  BranchTag branch;
};

// Branch assignment for item i depends only on (master_seed, i); identical to
// the tags batch_policy produces for the same seed.
std::vector<BranchTag> route_branches(std::size_t count, std::uint64_t master_seed,
                                      const DegradeConfig& cfg);

// Routes each image independently: weather_fraction of items get motion blur +
// snow + contrast at sampled severities, the rest the two-stage chain.
std::vector<DegradedItem> batch_policy(const std::vector<ImageTensor>& batch,
                                       std::uint64_t master_seed, const DegradeConfig& cfg,
                                       int threads = 1);

// Replays a recipe bit-exactly.
ImageTensor apply_recipe(const DegradationRecipe& recipe, const ImageTensor& img);

}  // namespace constyle
