#include "constyle/image.hpp"

#include <algorithm>
#include <cmath>

namespace constyle {

ImageTensor::ImageTensor(int h, int w, int c, float fill) {
  if (h <= 0 || w <= 0 || (c != 1 && c != 3))
    throw ValueError("ImageTensor: dimensions must be positive and channels 1 or 3");
  height = h;
  width = w;
  channels = c;
  data.assign(static_cast<std::size_t>(h) * w * c, fill);
}

ImageTensor convolve2d(const ImageTensor& img, const Kernel2D& k) {
  if (k.size <= 0 || k.size % 2 == 0) throw ValueError("convolve2d: kernel size must be odd");
  if (k.size > std::min(img.height, img.width))
    throw ValueError("convolve2d: kernel larger than image");
  const int r = k.size / 2;
  ImageTensor out(img.height, img.width, img.channels);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      for (int c = 0; c < img.channels; ++c) {
        double acc = 0.0;
        for (int dy = -r; dy <= r; ++dy) {
          const int sy = reflect_index(y + dy, img.height);
          for (int dx = -r; dx <= r; ++dx) {
            const int sx = reflect_index(x + dx, img.width);
            acc += k.at(dy + r, dx + r) * img.at(sy, sx, c);
          }
        }
        out.at(y, x, c) = static_cast<float>(acc);
      }
    }
  }
  return out;
}

ImageTensor rgb_to_ycbcr(const ImageTensor& img) {
  if (img.channels != 3) throw ValueError("rgb_to_ycbcr: 3-channel input required");
  ImageTensor out(img.height, img.width, 3);
  const std::size_t n = static_cast<std::size_t>(img.height) * img.width;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = img.data[3 * i], g = img.data[3 * i + 1], b = img.data[3 * i + 2];
    const double y = 0.299 * r + 0.587 * g + 0.114 * b;
    const double cb = 0.5 + (b - y) * (0.5 / (1.0 - 0.114));
    const double cr = 0.5 + (r - y) * (0.5 / (1.0 - 0.299));
    out.data[3 * i] = static_cast<float>(y);
    out.data[3 * i + 1] = static_cast<float>(cb);
    out.data[3 * i + 2] = static_cast<float>(cr);
  }
  return out;
}

ImageTensor ycbcr_to_rgb(const ImageTensor& img) {
  if (img.channels != 3) throw ValueError("ycbcr_to_rgb: 3-channel input required");
  ImageTensor out(img.height, img.width, 3);
  const std::size_t n = static_cast<std::size_t>(img.height) * img.width;
  for (std::size_t i = 0; i < n; ++i) {
    const double y = img.data[3 * i];
    const double cb = img.data[3 * i + 1] - 0.5;
    const double cr = img.data[3 * i + 2] - 0.5;
    const double r = y + 2.0 * (1.0 - 0.299) * cr;
    const double b = y + 2.0 * (1.0 - 0.114) * cb;
    const double g = (y - 0.299 * r - 0.114 * b) / 0.587;
    out.data[3 * i] = clamp01(static_cast<float>(r));
    out.data[3 * i + 1] = clamp01(static_cast<float>(g));
    out.data[3 * i + 2] = clamp01(static_cast<float>(b));
  }
  return out;
}

ImageTensor luminance(const ImageTensor& img) {
  if (img.channels == 1) return img;
  ImageTensor out(img.height, img.width, 1);
  const std::size_t n = static_cast<std::size_t>(img.height) * img.width;
  for (std::size_t i = 0; i < n; ++i) {
    out.data[i] = static_cast<float>(0.299 * img.data[3 * i] + 0.587 * img.data[3 * i + 1] +
                                     0.114 * img.data[3 * i + 2]);
  }
  return out;
}

ImageTensor resize_bilinear(const ImageTensor& img, int out_h, int out_w) {
  if (out_h < 1 || out_w < 1) throw ValueError("resize_bilinear: target size must be >= 1");
  ImageTensor out(out_h, out_w, img.channels);
  const double sy = static_cast<double>(img.height) / out_h;
  const double sx = static_cast<double>(img.width) / out_w;
  for (int y = 0; y < out_h; ++y) {
    double fy = (y + 0.5) * sy - 0.5;
    fy = std::clamp(fy, 0.0, static_cast<double>(img.height - 1));
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, img.height - 1);
    const double wy = fy - y0;
    for (int x = 0; x < out_w; ++x) {
      double fx = (x + 0.5) * sx - 0.5;
      fx = std::clamp(fx, 0.0, static_cast<double>(img.width - 1));
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, img.width - 1);
      const double wx = fx - x0;
      for (int c = 0; c < img.channels; ++c) {
        const double top = (1.0 - wx) * img.at(y0, x0, c) + wx * img.at(y0, x1, c);
        const double bot = (1.0 - wx) * img.at(y1, x0, c) + wx * img.at(y1, x1, c);
        out.at(y, x, c) = static_cast<float>((1.0 - wy) * top + wy * bot);
      }
    }
  }
  return out;
}

ImageTensor crop(const ImageTensor& img, int x, int y, int w, int h) {
  if (x < 0 || y < 0 || w <= 0 || h <= 0 || x + w > img.width || y + h > img.height)
    throw ValueError("crop: rectangle out of bounds");
  ImageTensor out(h, w, img.channels);
  for (int yy = 0; yy < h; ++yy)
    for (int xx = 0; xx < w; ++xx)
      for (int c = 0; c < img.channels; ++c) out.at(yy, xx, c) = img.at(y + yy, x + xx, c);
  return out;
}

void clamp01_inplace(ImageTensor& img) {
  for (float& v : img.data) v = clamp01(v);
}

}  // namespace constyle
