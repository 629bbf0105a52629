#include "constyle/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <sstream>

#include "constyle/image_io.hpp"
#include "constyle/parallel.hpp"

namespace constyle {

namespace fs = std::filesystem;
using nlohmann::json;

double psnr(const ImageTensor& a, const ImageTensor& b, double peak) {
  if (!a.same_shape(b)) throw ValueError("psnr: dimension mismatch");
  if (peak <= 0.0) throw ValueError("psnr: peak must be positive");
  double sse = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    const double d = static_cast<double>(a.data[i]) - b.data[i];
    sse += d * d;
  }
  const double mse = sse / static_cast<double>(a.data.size());
  if (mse == 0.0) return kPsnrCap;
  const double v = 10.0 * std::log10(peak * peak / mse);
  return std::min(v, kPsnrCap);
}

namespace {

struct SsimWindow {
  static constexpr int kSize = 11;
  double w[kSize * kSize];
  SsimWindow() {
    const double sigma = 1.5;
    double sum = 0.0;
    for (int y = 0; y < kSize; ++y)
      for (int x = 0; x < kSize; ++x) {
        const double dy = y - kSize / 2, dx = x - kSize / 2;
        w[y * kSize + x] = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
        sum += w[y * kSize + x];
      }
    for (double& v : w) v /= sum;
  }
};

double ssim_plane(const float* a, const float* b, int h, int w) {
  static const SsimWindow win;
  constexpr int S = SsimWindow::kSize;
  constexpr double C1 = 0.01 * 0.01;  // (K1*L)^2, L = 1
  constexpr double C2 = 0.03 * 0.03;

  double total = 0.0;
  std::size_t count = 0;
  for (int y = 0; y + S <= h; ++y) {
    for (int x = 0; x + S <= w; ++x) {
      double mu_a = 0.0, mu_b = 0.0, aa = 0.0, bb = 0.0, ab = 0.0;
      for (int wy = 0; wy < S; ++wy) {
        const float* ra = a + static_cast<std::size_t>(y + wy) * w + x;
        const float* rb = b + static_cast<std::size_t>(y + wy) * w + x;
        const double* rw = win.w + wy * S;
        for (int wx = 0; wx < S; ++wx) {
          const double va = ra[wx], vb = rb[wx], wt = rw[wx];
          mu_a += wt * va;
          mu_b += wt * vb;
          aa += wt * va * va;
          bb += wt * vb * vb;
          ab += wt * va * vb;
        }
      }
      const double var_a = aa - mu_a * mu_a;
      const double var_b = bb - mu_b * mu_b;
      const double cov = ab - mu_a * mu_b;
      const double num = (2.0 * mu_a * mu_b + C1) * (2.0 * cov + C2);
      const double den = (mu_a * mu_a + mu_b * mu_b + C1) * (var_a + var_b + C2);
      total += num / den;
      ++count;
    }
  }
  return total / static_cast<double>(count);
}

}  // namespace

double ssim(const ImageTensor& a, const ImageTensor& b, const SsimOptions& opts) {
  if (!a.same_shape(b)) throw ValueError("ssim: dimension mismatch");
  ImageTensor pa = a, pb = b;
  if (opts.border_crop > 0) {
    const int c = opts.border_crop;
    if (a.width <= 2 * c || a.height <= 2 * c) throw ValueError("ssim: border crop too large");
    pa = crop(a, c, c, a.width - 2 * c, a.height - 2 * c);
    pb = crop(b, c, c, b.width - 2 * c, b.height - 2 * c);
  }
  if (pa.height < SsimWindow::kSize || pa.width < SsimWindow::kSize)
    throw ValueError("ssim: image smaller than the 11x11 window");

  if (opts.on_luminance || pa.channels == 1) {
    const ImageTensor la = luminance(pa), lb = luminance(pb);
    return ssim_plane(la.data.data(), lb.data.data(), la.height, la.width);
  }
  // Per-channel SSIM averaged across channels.
  double total = 0.0;
  ImageTensor ca(pa.height, pa.width, 1), cb(pa.height, pa.width, 1);
  for (int c = 0; c < pa.channels; ++c) {
    const std::size_t n = static_cast<std::size_t>(pa.height) * pa.width;
    for (std::size_t i = 0; i < n; ++i) {
      ca.data[i] = pa.data[i * pa.channels + c];
      cb.data[i] = pb.data[i * pb.channels + c];
    }
    total += ssim_plane(ca.data.data(), cb.data.data(), ca.height, ca.width);
  }
  return total / pa.channels;
}

json MetricReport::to_json() const {
  json sets_j = json::array();
  for (const auto& s : sets) {
    json items = json::array();
    for (const auto& it : s.items)
      items.push_back({{"id", it.id}, {"psnr", it.psnr}, {"ssim", it.ssim}});
    sets_j.push_back({{"name", s.name},
                      {"mean_psnr", s.mean_psnr},
                      {"mean_ssim", s.mean_ssim},
                      {"items", items}});
  }
  return json{{"sets", sets_j},
              {"grand_mean_psnr", grand_mean_psnr},
              {"grand_mean_ssim", grand_mean_ssim}};
}

std::string MetricReport::to_table() const {
  std::ostringstream out;
  std::size_t name_w = 4;
  for (const auto& s : sets) name_w = std::max(name_w, s.name.size());
  char line[256];
  std::snprintf(line, sizeof(line), "%-*s  %10s  %8s  %6s\n", static_cast<int>(name_w), "set",
                "psnr_db", "ssim", "items");
  out << line;
  for (const auto& s : sets) {
    std::snprintf(line, sizeof(line), "%-*s  %10.4f  %8.4f  %6zu\n", static_cast<int>(name_w),
                  s.name.c_str(), s.mean_psnr, s.mean_ssim, s.items.size());
    out << line;
  }
  std::snprintf(line, sizeof(line), "%-*s  %10.4f  %8.4f\n", static_cast<int>(name_w), "mean",
                grand_mean_psnr, grand_mean_ssim);
  out << line;
  return out.str();
}

MetricReport evaluate_benchmark(const std::vector<ManifestEntry>& entries,
                                const std::string& data_root, const std::string& restored_dir,
                                const SsimOptions& opts, int threads) {
  if (entries.empty()) throw DataError("evaluate_benchmark: empty manifest");

  // Sort by (task, input path) so results do not depend on manifest order.
  std::vector<const ManifestEntry*> sorted;
  sorted.reserve(entries.size());
  for (const auto& e : entries) sorted.push_back(&e);
  std::sort(sorted.begin(), sorted.end(), [](const ManifestEntry* a, const ManifestEntry* b) {
    return std::tie(a->task, a->input_path) < std::tie(b->task, b->input_path);
  });

  std::vector<ItemScore> scores(sorted.size());
  parallel_for(sorted.size(), threads, [&](std::size_t i) {
    const ManifestEntry& e = *sorted[i];
    const fs::path restored_path = fs::path(restored_dir) / e.input_path;
    if (!fs::exists(restored_path))
      throw DataError("evaluate_benchmark: missing restored image: " + restored_path.string());
    const ImageTensor restored = load_image(restored_path.string());
    const ImageTensor target = load_image((fs::path(data_root) / e.target_path).string());
    scores[i] = {e.input_path, psnr(restored, target), ssim(restored, target, opts)};
  });

  MetricReport report;
  std::map<std::string, SetReport> by_task;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    SetReport& set = by_task[sorted[i]->task];
    set.name = sorted[i]->task;
    set.items.push_back(scores[i]);
  }
  double grand_psnr = 0.0, grand_ssim = 0.0;
  for (auto& [name, set] : by_task) {
    double sp = 0.0, ss = 0.0;
    for (const auto& it : set.items) {
      sp += it.psnr;
      ss += it.ssim;
    }
    set.mean_psnr = sp / static_cast<double>(set.items.size());
    set.mean_ssim = ss / static_cast<double>(set.items.size());
    grand_psnr += set.mean_psnr;
    grand_ssim += set.mean_ssim;
    report.sets.push_back(std::move(set));
  }
  report.grand_mean_psnr = grand_psnr / static_cast<double>(report.sets.size());
  report.grand_mean_ssim = grand_ssim / static_cast<double>(report.sets.size());
  return report;
}

}  // namespace constyle
