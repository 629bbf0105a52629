#pragma once

#include <cstddef>
#include <numeric>
#include <vector>

#include "constyle/common.hpp"
#include "constyle/rng.hpp"

namespace constyle {

// Dense double-precision array. The training core runs entirely in doubles so
// gradient checks against central finite differences are meaningful.
struct Tensor {
  std::vector<int> shape;
  std::vector<double> data;

  Tensor() = default;
  explicit Tensor(std::vector<int> s, double fill = 0.0) : shape(std::move(s)) {
    data.assign(count(shape), fill);
  }

  static std::size_t count(const std::vector<int>& s) {
    std::size_t n = 1;
    for (int d : s) {
      if (d <= 0) throw ValueError("Tensor: non-positive dimension");
      n *= static_cast<std::size_t>(d);
    }
    return n;
  }

  static Tensor zeros_like(const Tensor& t) { return Tensor(t.shape); }

  static Tensor randn(std::vector<int> s, Rng& rng, double std_dev = 1.0) {
    Tensor t(std::move(s));
    for (double& v : t.data) v = std_dev * rng.normal();
    return t;
  }

  std::size_t numel() const { return data.size(); }
  int dim(std::size_t i) const { return shape[i]; }
  bool same_shape(const Tensor& o) const { return shape == o.shape; }

  // {N,C,H,W}
  double& at4(int n, int c, int y, int x) {
    const int C = shape[1], H = shape[2], W = shape[3];
    return data[((static_cast<std::size_t>(n) * C + c) * H + y) * W + x];
  }
  double at4(int n, int c, int y, int x) const {
    const int C = shape[1], H = shape[2], W = shape[3];
    return data[((static_cast<std::size_t>(n) * C + c) * H + y) * W + x];
  }
  // {N,D}
  double& at2(int n, int d) { return data[static_cast<std::size_t>(n) * shape[1] + d]; }
  double at2(int n, int d) const { return data[static_cast<std::size_t>(n) * shape[1] + d]; }
};

}  // namespace constyle
