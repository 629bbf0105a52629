#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "constyle/forge.hpp"
#include "constyle/image.hpp"

namespace constyle {

// 10*log10(peak^2/MSE), capped at 100 dB (identical images included) so that
// aggregation stays finite.
double psnr(const ImageTensor& a, const ImageTensor& b, double peak = 1.0);

inline constexpr double kPsnrCap = 100.0;

struct SsimOptions {
  bool on_luminance = true;  // false: per-channel SSIM averaged over channels
  int border_crop = 0;       // pixels trimmed from each side before scoring
};

// Mean local SSIM over valid 11x11 Gaussian windows (sigma 1.5, K1=0.01,
// K2=0.03, dynamic range 1).
double ssim(const ImageTensor& a, const ImageTensor& b, const SsimOptions& opts = SsimOptions{});

struct ItemScore {
  std::string id;
  double psnr = 0.0;
  double ssim = 0.0;
};

struct SetReport {
  std::string name;
  std::vector<ItemScore> items;
  double mean_psnr = 0.0;
  double mean_ssim = 0.0;
};

struct MetricReport {
  std::vector<SetReport> sets;
  double grand_mean_psnr = 0.0;  // unweighted mean over set means
  double grand_mean_ssim = 0.0;

  nlohmann::json to_json() const;
  std::string to_table() const;
};

// Scores restored_dir/<entry.input_path> against the manifest target of each
// entry, grouped per task. Results are independent of item order.
MetricReport evaluate_benchmark(const std::vector<ManifestEntry>& entries,
                                const std::string& data_root, const std::string& restored_dir,
                                const SsimOptions& opts = SsimOptions{}, int threads = 1);

}  // namespace constyle
