#include "constyle/degrade.hpp"

#include <algorithm>
#include <cmath>

#include "constyle/jpeg.hpp"
#include "constyle/parallel.hpp"

namespace constyle {

using nlohmann::json;

Kernel2D gaussian_kernel(double sigma_x, double sigma_y, double theta, int size) {
  if (sigma_x <= 0.0 || sigma_y <= 0.0) throw ValueError("gaussian_kernel: sigma must be positive");
  if (size <= 0 || size % 2 == 0) throw ValueError("gaussian_kernel: size must be odd");

  const double ct = std::cos(theta), st = std::sin(theta);
  // Inverse covariance of the rotated ellipse.
  const double a = ct * ct / (2.0 * sigma_x * sigma_x) + st * st / (2.0 * sigma_y * sigma_y);
  const double b = st * ct * (1.0 / (2.0 * sigma_y * sigma_y) - 1.0 / (2.0 * sigma_x * sigma_x));
  const double c = st * st / (2.0 * sigma_x * sigma_x) + ct * ct / (2.0 * sigma_y * sigma_y);

  Kernel2D k;
  k.size = size;
  k.weights.resize(static_cast<std::size_t>(size) * size);
  const int r = size / 2;
  double sum = 0.0;
  for (int y = -r; y <= r; ++y) {
    for (int x = -r; x <= r; ++x) {
      const double w = std::exp(-(a * x * x + 2.0 * b * x * y + c * y * y));
      k.at(y + r, x + r) = w;
      sum += w;
    }
  }
  for (double& w : k.weights) w /= sum;
  return k;
}

Kernel2D line_kernel(int length, double angle) {
  if (length <= 0 || length % 2 == 0) throw ValueError("line_kernel: length must be odd");
  Kernel2D k;
  k.size = length;
  k.weights.assign(static_cast<std::size_t>(length) * length, 0.0);
  const int r = length / 2;
  const double cx = std::cos(angle), cy = std::sin(angle);
  for (int t = -r; t <= r; ++t) {
    const double px = t * cx + r;
    const double py = t * cy + r;
    const int x0 = static_cast<int>(std::floor(px));
    const int y0 = static_cast<int>(std::floor(py));
    const double fx = px - x0, fy = py - y0;
    // Bilinear splat of a unit deposit.
    for (int dy = 0; dy <= 1; ++dy) {
      for (int dx = 0; dx <= 1; ++dx) {
        const int xx = x0 + dx, yy = y0 + dy;
        if (xx < 0 || xx >= length || yy < 0 || yy >= length) continue;
        const double w = (dx ? fx : 1.0 - fx) * (dy ? fy : 1.0 - fy);
        if (w > 0.0) k.at(yy, xx) += w;
      }
    }
  }
  double sum = 0.0;
  for (double w : k.weights) sum += w;
  for (double& w : k.weights) w /= sum;
  return k;
}

ImageTensor add_gaussian_noise(const ImageTensor& img, double sigma, bool gray, Rng& rng) {
  if (sigma < 0.0) throw ValueError("add_gaussian_noise: sigma must be >= 0");
  ImageTensor out = img;
  if (sigma == 0.0) return out;
  if (gray || img.channels == 1) {
    for (int y = 0; y < img.height; ++y) {
      for (int x = 0; x < img.width; ++x) {
        const float n = static_cast<float>(sigma * rng.normal());
        for (int c = 0; c < img.channels; ++c) out.at(y, x, c) = clamp01(img.at(y, x, c) + n);
      }
    }
  } else {
    for (std::size_t i = 0; i < out.data.size(); ++i)
      out.data[i] = clamp01(img.data[i] + static_cast<float>(sigma * rng.normal()));
  }
  return out;
}

ImageTensor add_poisson_noise(const ImageTensor& img, double scale, Rng& rng) {
  if (scale <= 0.0) throw ValueError("add_poisson_noise: scale must be positive");
  ImageTensor out = img;
  for (std::size_t i = 0; i < out.data.size(); ++i) {
    const double lambda = std::max(0.0, static_cast<double>(img.data[i])) * scale;
    out.data[i] = clamp01(static_cast<float>(static_cast<double>(rng.poisson(lambda)) / scale));
  }
  return out;
}

ImageTensor motion_blur_resolved(const ImageTensor& img, int length, double angle) {
  const int max_len = std::min(img.height, img.width);
  int len = std::min(length, max_len % 2 ? max_len : max_len - 1);
  if (len < 1) len = 1;
  return convolve2d(img, line_kernel(len, angle));
}

ImageTensor motion_blur(const ImageTensor& img, Severity severity, double angle,
                        const WeatherConstants& wc) {
  return motion_blur_resolved(img, wc.motion_blur_length[severity.level - 1], angle);
}

ImageTensor snow_resolved(const ImageTensor& img, const SnowParams& p, Rng& rng) {
  if (img.channels != 3) throw ValueError("snow: 3-channel input required");
  const int h = img.height, w = img.width;

  ImageTensor layer(h, w, 1);
  for (float& v : layer.data) v = static_cast<float>(p.loc + p.scale * rng.normal());

  if (p.zoom > 1.0) {
    const int zh = std::max(h, static_cast<int>(std::ceil(h * p.zoom)));
    const int zw = std::max(w, static_cast<int>(std::ceil(w * p.zoom)));
    ImageTensor zoomed = resize_bilinear(layer, zh, zw);
    layer = crop(zoomed, (zw - w) / 2, (zh - h) / 2, w, h);
  }

  for (float& v : layer.data) v = v < p.threshold ? 0.f : clamp01(v);

  const double angle = rng.uniform(-3.0 * M_PI / 4.0, -M_PI / 4.0);
  layer = motion_blur_resolved(layer, p.blur_length, angle);

  ImageTensor lum = luminance(img);
  ImageTensor out(h, w, 3);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const float s = layer.at(y, x, 0);
      const float s_rot = layer.at(h - 1 - y, w - 1 - x, 0);
      const float lifted = static_cast<float>(lum.at(y, x, 0) * 1.5 + 0.5);
      for (int c = 0; c < 3; ++c) {
        const float v = img.at(y, x, c);
        const float base =
            static_cast<float>(p.blend * v + (1.0 - p.blend) * std::max(v, lifted));
        out.at(y, x, c) = clamp01(base + s + s_rot);
      }
    }
  }
  return out;
}

ImageTensor snow(const ImageTensor& img, Severity severity, Rng& rng, const WeatherConstants& wc) {
  return snow_resolved(img, wc.snow[severity.level - 1], rng);
}

ImageTensor contrast_resolved(const ImageTensor& img, double factor) {
  ImageTensor out(img.height, img.width, img.channels);
  const std::size_t npix = static_cast<std::size_t>(img.height) * img.width;
  for (int c = 0; c < img.channels; ++c) {
    double mean = 0.0;
    for (std::size_t i = 0; i < npix; ++i) mean += img.data[i * img.channels + c];
    mean /= static_cast<double>(npix);
    for (std::size_t i = 0; i < npix; ++i) {
      const double v = (img.data[i * img.channels + c] - mean) * factor + mean;
      out.data[i * img.channels + c] = clamp01(static_cast<float>(v));
    }
  }
  return out;
}

ImageTensor contrast(const ImageTensor& img, Severity severity, const WeatherConstants& wc) {
  return contrast_resolved(img, wc.contrast_factor[severity.level - 1]);
}

// ---------------------------------------------------------------------------
// Recipes

json DegradationRecipe::to_json() const {
  json steps_j = json::array();
  for (const auto& s : steps) steps_j.push_back({{"op", s.op}, {"params", s.params}});
  return json{{"seed", seed}, {"steps", steps_j}};
}

DegradationRecipe DegradationRecipe::from_json(const json& j) {
  DegradationRecipe r;
  r.seed = j.at("seed").get<std::uint64_t>();
  for (const auto& s : j.at("steps")) {
    r.steps.push_back({s.at("op").get<std::string>(), s.at("params")});
  }
  return r;
}

ImageTensor apply_recipe(const DegradationRecipe& recipe, const ImageTensor& img) {
  ImageTensor cur = img;
  for (const auto& step : recipe.steps) {
    const json& p = step.params;
    if (step.op == "gaussian_blur") {
      cur = convolve2d(cur, gaussian_kernel(p.at("sigma_x").get<double>(),
                                            p.at("sigma_y").get<double>(),
                                            p.at("theta").get<double>(), p.at("size").get<int>()));
    } else if (step.op == "gaussian_noise") {
      Rng r(p.at("seed").get<std::uint64_t>());
      cur = add_gaussian_noise(cur, p.at("sigma").get<double>(), p.at("gray").get<bool>(), r);
    } else if (step.op == "poisson_noise") {
      Rng r(p.at("seed").get<std::uint64_t>());
      cur = add_poisson_noise(cur, p.at("scale").get<double>(), r);
    } else if (step.op == "jpeg") {
      cur = jpeg_roundtrip(cur, p.at("quality").get<int>(), p.at("chroma_subsample").get<bool>());
    } else if (step.op == "motion_blur") {
      cur = motion_blur_resolved(cur, p.at("length").get<int>(), p.at("angle").get<double>());
    } else if (step.op == "snow") {
      SnowParams sp{p.at("loc").get<double>(),       p.at("scale").get<double>(),
                    p.at("zoom").get<double>(),      p.at("threshold").get<double>(),
                    p.at("blur_length").get<int>(),  p.at("blend").get<double>()};
      Rng r(p.at("seed").get<std::uint64_t>());
      cur = snow_resolved(cur, sp, r);
    } else if (step.op == "contrast") {
      cur = contrast_resolved(cur, p.at("factor").get<double>());
    } else {
      throw DataError("apply_recipe: unknown op '" + step.op + "'");
    }
  }
  return cur;
}

// ---------------------------------------------------------------------------
// Config

void DegradeConfig::validate() const {
  auto check_stage = [](const StageRanges& s, const char* name) {
    if (s.kernel_min > s.kernel_max || s.sigma_min > s.sigma_max ||
        s.noise_sigma_min > s.noise_sigma_max || s.poisson_scale_min > s.poisson_scale_max ||
        s.jpeg_quality_min > s.jpeg_quality_max)
      throw ValueError(std::string("DegradeConfig: min > max in ") + name);
    if (s.kernel_min < 1 || s.sigma_min <= 0.0 || s.noise_sigma_min < 0.0 ||
        s.poisson_scale_min <= 0.0 || s.jpeg_quality_min < 1 || s.jpeg_quality_max > 100)
      throw ValueError(std::string("DegradeConfig: out-of-range bound in ") + name);
  };
  check_stage(stage1, "stage1");
  check_stage(stage2, "stage2");
  if (stage2_prob < 0.0 || stage2_prob > 1.0 || weather_fraction < 0.0 || weather_fraction > 1.0)
    throw ValueError("DegradeConfig: probabilities must lie in [0,1]");
}

namespace {

json stage_to_json(const StageRanges& s) {
  return json{{"kernel_min", s.kernel_min},
              {"kernel_max", s.kernel_max},
              {"sigma_min", s.sigma_min},
              {"sigma_max", s.sigma_max},
              {"gaussian_noise_prob", s.gaussian_noise_prob},
              {"noise_sigma_min", s.noise_sigma_min},
              {"noise_sigma_max", s.noise_sigma_max},
              {"gray_noise_prob", s.gray_noise_prob},
              {"poisson_scale_min", s.poisson_scale_min},
              {"poisson_scale_max", s.poisson_scale_max},
              {"jpeg_quality_min", s.jpeg_quality_min},
              {"jpeg_quality_max", s.jpeg_quality_max},
              {"chroma_subsample_prob", s.chroma_subsample_prob}};
}

StageRanges stage_from_json(const json& j, StageRanges s) {
  s.kernel_min = j.value("kernel_min", s.kernel_min);
  s.kernel_max = j.value("kernel_max", s.kernel_max);
  s.sigma_min = j.value("sigma_min", s.sigma_min);
  s.sigma_max = j.value("sigma_max", s.sigma_max);
  s.gaussian_noise_prob = j.value("gaussian_noise_prob", s.gaussian_noise_prob);
  s.noise_sigma_min = j.value("noise_sigma_min", s.noise_sigma_min);
  s.noise_sigma_max = j.value("noise_sigma_max", s.noise_sigma_max);
  s.gray_noise_prob = j.value("gray_noise_prob", s.gray_noise_prob);
  s.poisson_scale_min = j.value("poisson_scale_min", s.poisson_scale_min);
  s.poisson_scale_max = j.value("poisson_scale_max", s.poisson_scale_max);
  s.jpeg_quality_min = j.value("jpeg_quality_min", s.jpeg_quality_min);
  s.jpeg_quality_max = j.value("jpeg_quality_max", s.jpeg_quality_max);
  s.chroma_subsample_prob = j.value("chroma_subsample_prob", s.chroma_subsample_prob);
  return s;
}

}  // namespace

json DegradeConfig::to_json() const {
  json snow_j = json::array();
  for (const auto& p : weather.snow)
    snow_j.push_back({p.loc, p.scale, p.zoom, p.threshold, p.blur_length, p.blend});
  return json{{"stage1", stage_to_json(stage1)},
              {"stage2", stage_to_json(stage2)},
              {"stage2_prob", stage2_prob},
              {"weather_fraction", weather_fraction},
              {"weather",
               {{"motion_blur_length", weather.motion_blur_length},
                {"contrast_factor", weather.contrast_factor},
                {"snow", snow_j}}}};
}

DegradeConfig DegradeConfig::from_json(const json& j) {
  DegradeConfig cfg;
  if (j.contains("stage1")) cfg.stage1 = stage_from_json(j.at("stage1"), cfg.stage1);
  if (j.contains("stage2")) cfg.stage2 = stage_from_json(j.at("stage2"), cfg.stage2);
  cfg.stage2_prob = j.value("stage2_prob", cfg.stage2_prob);
  cfg.weather_fraction = j.value("weather_fraction", cfg.weather_fraction);
  if (j.contains("weather")) {
    const json& w = j.at("weather");
    if (w.contains("motion_blur_length"))
      for (int i = 0; i < 5; ++i) cfg.weather.motion_blur_length[i] = w.at("motion_blur_length").at(i).get<int>();
    if (w.contains("contrast_factor"))
      for (int i = 0; i < 5; ++i) cfg.weather.contrast_factor[i] = w.at("contrast_factor").at(i).get<double>();
    if (w.contains("snow")) {
      for (int i = 0; i < 5; ++i) {
        const json& s = w.at("snow").at(i);
        cfg.weather.snow[i] = SnowParams{s.at(0).get<double>(), s.at(1).get<double>(),
                                         s.at(2).get<double>(), s.at(3).get<double>(),
                                         s.at(4).get<int>(),    s.at(5).get<double>()};
      }
    }
  }
  cfg.validate();
  return cfg;
}

// ---------------------------------------------------------------------------
// Pipelines

namespace {

ImageTensor apply_stage(const ImageTensor& img, const StageRanges& ranges, Rng& rng,
                        DegradationRecipe& recipe) {
  ImageTensor cur = img;

  // Blur. Kernel sizes larger than the image are snapped down to fit.
  int size = static_cast<int>(rng.uniform_int(0, (ranges.kernel_max - ranges.kernel_min) / 2)) * 2 +
             ranges.kernel_min;
  const int max_size = std::min(cur.height, cur.width);
  size = std::min(size, max_size % 2 ? max_size : max_size - 1);
  const double sx = rng.uniform(ranges.sigma_min, ranges.sigma_max);
  const double sy = rng.uniform(ranges.sigma_min, ranges.sigma_max);
  const double theta = rng.uniform(0.0, M_PI);
  recipe.steps.push_back({"gaussian_blur",
                          json{{"sigma_x", sx}, {"sigma_y", sy}, {"theta", theta}, {"size", size}}});
  cur = convolve2d(cur, gaussian_kernel(sx, sy, theta, size));

  // Noise, Gaussian or Poisson.
  if (rng.bernoulli(ranges.gaussian_noise_prob)) {
    const double sigma = rng.uniform(ranges.noise_sigma_min, ranges.noise_sigma_max);
    const bool gray = rng.bernoulli(ranges.gray_noise_prob);
    const std::uint64_t seed = rng.next_u64();
    recipe.steps.push_back(
        {"gaussian_noise", json{{"sigma", sigma}, {"gray", gray}, {"seed", seed}}});
    Rng noise_rng(seed);
    cur = add_gaussian_noise(cur, sigma, gray, noise_rng);
  } else {
    const double scale = rng.uniform(ranges.poisson_scale_min, ranges.poisson_scale_max);
    const std::uint64_t seed = rng.next_u64();
    recipe.steps.push_back({"poisson_noise", json{{"scale", scale}, {"seed", seed}}});
    Rng noise_rng(seed);
    cur = add_poisson_noise(cur, scale, noise_rng);
  }

  // JPEG.
  const int quality =
      static_cast<int>(rng.uniform_int(ranges.jpeg_quality_min, ranges.jpeg_quality_max));
  const bool subsample = rng.bernoulli(ranges.chroma_subsample_prob) && cur.channels == 3;
  recipe.steps.push_back({"jpeg", json{{"quality", quality}, {"chroma_subsample", subsample}}});
  cur = jpeg_roundtrip(cur, quality, subsample);

  return cur;
}

DegradedItem degrade_one(const ImageTensor& img, std::uint64_t item_seed,
                         const DegradeConfig& cfg) {
  Rng rng(item_seed);
  const bool weather = rng.bernoulli(cfg.weather_fraction);
  DegradedItem item;
  item.branch = weather ? BranchTag::weather : BranchTag::chain;
  item.recipe.seed = item_seed;

  if (weather) {
    ImageTensor cur = img;

    const int mb_sev = static_cast<int>(rng.uniform_int(1, 5));
    const double angle = rng.uniform(0.0, M_PI);
    const int length = cfg.weather.motion_blur_length[mb_sev - 1];
    item.recipe.steps.push_back(
        {"motion_blur", json{{"length", length}, {"angle", angle}, {"severity", mb_sev}}});
    cur = motion_blur_resolved(cur, length, angle);

    const int snow_sev = static_cast<int>(rng.uniform_int(1, 5));
    const SnowParams& sp = cfg.weather.snow[snow_sev - 1];
    const std::uint64_t snow_seed = rng.next_u64();
    item.recipe.steps.push_back({"snow", json{{"loc", sp.loc},
                                              {"scale", sp.scale},
                                              {"zoom", sp.zoom},
                                              {"threshold", sp.threshold},
                                              {"blur_length", sp.blur_length},
                                              {"blend", sp.blend},
                                              {"seed", snow_seed},
                                              {"severity", snow_sev}}});
    Rng snow_rng(snow_seed);
    cur = snow_resolved(cur, sp, snow_rng);

    const int con_sev = static_cast<int>(rng.uniform_int(1, 5));
    const double factor = cfg.weather.contrast_factor[con_sev - 1];
    item.recipe.steps.push_back({"contrast", json{{"factor", factor}, {"severity", con_sev}}});
    cur = contrast_resolved(cur, factor);

    item.image = std::move(cur);
  } else {
    auto [out, recipe] = two_stage_pipeline(img, cfg, rng);
    item.image = std::move(out);
    item.recipe.steps = std::move(recipe.steps);
  }
  return item;
}

}  // namespace

std::pair<ImageTensor, DegradationRecipe> two_stage_pipeline(const ImageTensor& img,
                                                             const DegradeConfig& cfg, Rng& rng) {
  cfg.validate();
  DegradationRecipe recipe;
  recipe.seed = rng.seed();
  ImageTensor cur = apply_stage(img, cfg.stage1, rng, recipe);
  if (rng.bernoulli(cfg.stage2_prob)) cur = apply_stage(cur, cfg.stage2, rng, recipe);
  return {std::move(cur), std::move(recipe)};
}

const char* branch_name(BranchTag t) { return t == BranchTag::weather ? "weather" : "chain"; }

std::vector<BranchTag> route_branches(std::size_t count, std::uint64_t master_seed,
                                      const DegradeConfig& cfg) {
  std::vector<BranchTag> tags(count);
  for (std::size_t i = 0; i < count; ++i) {
    Rng rng(child_seed(master_seed, i));
    tags[i] = rng.bernoulli(cfg.weather_fraction) ? BranchTag::weather : BranchTag::chain;
  }
  return tags;
}

std::vector<DegradedItem> batch_policy(const std::vector<ImageTensor>& batch,
                                       std::uint64_t master_seed, const DegradeConfig& cfg,
                                       int threads) {
  if (batch.empty()) throw ValueError("batch_policy: empty batch");
  cfg.validate();
  std::vector<DegradedItem> items(batch.size());
  parallel_for(batch.size(), threads, [&](std::size_t i) {
    items[i] = degrade_one(batch[i], child_seed(master_seed, i), cfg);
  });
  return items;
}

}  // namespace constyle
