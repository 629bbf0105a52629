#pragma once

#include <cstddef>
#include <vector>

#include "constyle/common.hpp"

namespace constyle {

// H x W x C interleaved row-major float image, samples nominally in [0,1].
struct ImageTensor {
  int height = 0;
  int width = 0;
  int channels = 0;
  std::vector<float> data;

  ImageTensor() = default;
  ImageTensor(int h, int w, int c, float fill = 0.f);

  float& at(int y, int x, int ch) {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + ch];
  }
  float at(int y, int x, int ch) const {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + ch];
  }

  std::size_t size() const { return data.size(); }
  bool same_shape(const ImageTensor& o) const {
    return height == o.height && width == o.width && channels == o.channels;
  }
};

// Square kernel, odd size.
struct Kernel2D {
  int size = 0;
  std::vector<double> weights;  // size*size, row-major

  double at(int y, int x) const { return weights[static_cast<std::size_t>(y) * size + x]; }
  double& at(int y, int x) { return weights[static_cast<std::size_t>(y) * size + x]; }
};

// Symmetric reflection (edge sample repeated): index -1 maps to 0, n maps to n-1.
inline int reflect_index(int i, int n) {
  if (n == 1) return 0;
  while (i < 0 || i >= n) {
    if (i < 0) i = -i - 1;
    if (i >= n) i = 2 * n - 1 - i;
  }
  return i;
}

// Correlation-form convolution with reflect padding; accumulates in double.
// All built-in kernels are symmetric under 180-degree rotation, so the
// correlation/convolution distinction does not matter for them.
ImageTensor convolve2d(const ImageTensor& img, const Kernel2D& k);

// Full-range BT.601; chroma centered at 0.5. Inputs must be 3-channel.
ImageTensor rgb_to_ycbcr(const ImageTensor& img);
ImageTensor ycbcr_to_rgb(const ImageTensor& img);

// BT.601 luminance; 1-channel input passes through as a copy.
ImageTensor luminance(const ImageTensor& img);

// Half-pixel-center bilinear resampling with edge clamping.
ImageTensor resize_bilinear(const ImageTensor& img, int out_h, int out_w);

ImageTensor crop(const ImageTensor& img, int x, int y, int w, int h);

void clamp01_inplace(ImageTensor& img);

}  // namespace constyle
