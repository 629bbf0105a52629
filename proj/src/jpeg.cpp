#include "constyle/jpeg.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace constyle {

namespace {

// Annex K base tables.
constexpr int kLumaBase[64] = {
    16, 11, 10, 16, 24,  40,  51,  61,  //
    12, 12, 14, 19, 26,  58,  60,  55,  //
    14, 13, 16, 24, 40,  57,  69,  56,  //
    14, 17, 22, 29, 51,  87,  80,  62,  //
    18, 22, 37, 56, 68,  109, 103, 77,  //
    24, 35, 55, 64, 81,  104, 113, 92,  //
    49, 64, 78, 87, 103, 121, 120, 101, //
    72, 92, 95, 98, 112, 100, 103, 99};

constexpr int kChromaBase[64] = {
    17, 18, 24, 47, 99, 99, 99, 99,  //
    18, 21, 26, 66, 99, 99, 99, 99,  //
    24, 26, 56, 99, 99, 99, 99, 99,  //
    47, 66, 99, 99, 99, 99, 99, 99,  //
    99, 99, 99, 99, 99, 99, 99, 99,  //
    99, 99, 99, 99, 99, 99, 99, 99,  //
    99, 99, 99, 99, 99, 99, 99, 99,  //
    99, 99, 99, 99, 99, 99, 99, 99};

std::array<int, 64> scale_table(const int* base, int quality) {
  const int s = quality < 50 ? 5000 / quality : 200 - 2 * quality;
  std::array<int, 64> t{};
  for (int i = 0; i < 64; ++i) {
    int q = (base[i] * s + 50) / 100;
    t[i] = std::clamp(q, 1, 255);
  }
  return t;
}

struct DctBasis {
  double c[8][8];  // c[u][x] = alpha(u) * cos((2x+1) u pi / 16)
  DctBasis() {
    for (int u = 0; u < 8; ++u) {
      const double alpha = u == 0 ? std::sqrt(1.0 / 8.0) : 0.5;
      for (int x = 0; x < 8; ++x) c[u][x] = alpha * std::cos((2 * x + 1) * u * M_PI / 16.0);
    }
  }
};

const DctBasis& basis() {
  static const DctBasis b;
  return b;
}

// One plane in natural units [0,1]; values are scaled to [-128,127], blocks
// are quantized in place, and the plane is converted back.
void quantize_plane(std::vector<double>& plane, int h, int w, const std::array<int, 64>& table) {
  const DctBasis& B = basis();
  double block[8][8], tmp[8][8], coeff[8][8];
  for (int by = 0; by < h; by += 8) {
    for (int bx = 0; bx < w; bx += 8) {
      for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x) block[y][x] = plane[(by + y) * static_cast<std::size_t>(w) + bx + x] * 255.0 - 128.0;
      // DCT: coeff = C * block * C^T
      for (int u = 0; u < 8; ++u)
        for (int x = 0; x < 8; ++x) {
          double acc = 0.0;
          for (int y = 0; y < 8; ++y) acc += B.c[u][y] * block[y][x];
          tmp[u][x] = acc;
        }
      for (int u = 0; u < 8; ++u)
        for (int v = 0; v < 8; ++v) {
          double acc = 0.0;
          for (int x = 0; x < 8; ++x) acc += tmp[u][x] * B.c[v][x];
          coeff[u][v] = acc;
        }
      // Quantize / dequantize.
      for (int u = 0; u < 8; ++u)
        for (int v = 0; v < 8; ++v) {
          const double q = table[u * 8 + v];
          coeff[u][v] = std::round(coeff[u][v] / q) * q;
        }
      // Inverse DCT: block = C^T * coeff * C
      for (int y = 0; y < 8; ++y)
        for (int v = 0; v < 8; ++v) {
          double acc = 0.0;
          for (int u = 0; u < 8; ++u) acc += B.c[u][y] * coeff[u][v];
          tmp[y][v] = acc;
        }
      for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x) {
          double acc = 0.0;
          for (int v = 0; v < 8; ++v) acc += tmp[y][v] * B.c[v][x];
          plane[(by + y) * static_cast<std::size_t>(w) + bx + x] = (acc + 128.0) / 255.0;
        }
    }
  }
}

std::vector<double> pad_replicate(const std::vector<double>& src, int h, int w, int ph, int pw) {
  std::vector<double> dst(static_cast<std::size_t>(ph) * pw);
  for (int y = 0; y < ph; ++y) {
    const int sy = std::min(y, h - 1);
    for (int x = 0; x < pw; ++x) dst[y * static_cast<std::size_t>(pw) + x] = src[sy * static_cast<std::size_t>(w) + std::min(x, w - 1)];
  }
  return dst;
}

int round_up(int v, int m) { return (v + m - 1) / m * m; }

}  // namespace

std::array<int, 64> jpeg_quant_table_luma(int quality) {
  if (quality < 1 || quality > 100) throw ValueError("jpeg: quality out of 1..100");
  return scale_table(kLumaBase, quality);
}

std::array<int, 64> jpeg_quant_table_chroma(int quality) {
  if (quality < 1 || quality > 100) throw ValueError("jpeg: quality out of 1..100");
  return scale_table(kChromaBase, quality);
}

ImageTensor jpeg_roundtrip(const ImageTensor& img, int quality, bool chroma_subsample) {
  if (quality < 1 || quality > 100) throw ValueError("jpeg_roundtrip: quality out of 1..100");
  const auto luma_t = jpeg_quant_table_luma(quality);

  const int h = img.height, w = img.width;

  if (img.channels == 1) {
    std::vector<double> y(static_cast<std::size_t>(h) * w);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = img.data[i];
    const int ph = round_up(h, 8), pw = round_up(w, 8);
    auto plane = pad_replicate(y, h, w, ph, pw);
    quantize_plane(plane, ph, pw, luma_t);
    ImageTensor out(h, w, 1);
    for (int yy = 0; yy < h; ++yy)
      for (int xx = 0; xx < w; ++xx)
        out.at(yy, xx, 0) = clamp01(static_cast<float>(plane[yy * static_cast<std::size_t>(pw) + xx]));
    return out;
  }

  const auto chroma_t = jpeg_quant_table_chroma(quality);
  const ImageTensor ycc = rgb_to_ycbcr(img);

  const int block = chroma_subsample ? 16 : 8;
  const int ph = round_up(h, block), pw = round_up(w, block);

  std::vector<std::vector<double>> planes(3, std::vector<double>(static_cast<std::size_t>(h) * w));
  for (int yy = 0; yy < h; ++yy)
    for (int xx = 0; xx < w; ++xx)
      for (int c = 0; c < 3; ++c) planes[c][yy * static_cast<std::size_t>(w) + xx] = ycc.at(yy, xx, c);

  std::vector<std::vector<double>> padded(3);
  for (int c = 0; c < 3; ++c) padded[c] = pad_replicate(planes[c], h, w, ph, pw);

  quantize_plane(padded[0], ph, pw, luma_t);

  if (chroma_subsample) {
    const int sh = ph / 2, sw = pw / 2;
    for (int c = 1; c < 3; ++c) {
      std::vector<double> sub(static_cast<std::size_t>(sh) * sw);
      for (int yy = 0; yy < sh; ++yy)
        for (int xx = 0; xx < sw; ++xx) {
          const std::size_t base = 2 * yy * static_cast<std::size_t>(pw) + 2 * xx;
          sub[yy * static_cast<std::size_t>(sw) + xx] =
              0.25 * (padded[c][base] + padded[c][base + 1] + padded[c][base + pw] + padded[c][base + pw + 1]);
        }
      quantize_plane(sub, sh, sw, chroma_t);
      // Box upsample back to full resolution.
      for (int yy = 0; yy < ph; ++yy)
        for (int xx = 0; xx < pw; ++xx)
          padded[c][yy * static_cast<std::size_t>(pw) + xx] = sub[(yy / 2) * static_cast<std::size_t>(sw) + xx / 2];
    }
  } else {
    quantize_plane(padded[1], ph, pw, chroma_t);
    quantize_plane(padded[2], ph, pw, chroma_t);
  }

  ImageTensor ycc_out(h, w, 3);
  for (int yy = 0; yy < h; ++yy)
    for (int xx = 0; xx < w; ++xx)
      for (int c = 0; c < 3; ++c)
        ycc_out.at(yy, xx, c) = static_cast<float>(padded[c][yy * static_cast<std::size_t>(pw) + xx]);

  ImageTensor out = ycbcr_to_rgb(ycc_out);
  clamp01_inplace(out);
  return out;
}

}  // namespace constyle
