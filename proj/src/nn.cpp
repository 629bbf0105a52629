#include "constyle/nn.hpp"

#include <cmath>

namespace constyle::nn {

namespace {

void require(bool cond, const char* msg) {
  if (!cond) throw ValueError(msg);
}

}  // namespace

Tensor conv2d_forward(const Tensor& x, const Tensor& w, const Tensor& b, int stride, int pad) {
  require(x.shape.size() == 4 && w.shape.size() == 4, "conv2d: rank-4 input and weight required");
  require(x.shape[1] == w.shape[1], "conv2d: channel mismatch");
  require(b.shape.size() == 1 && b.shape[0] == w.shape[0], "conv2d: bias shape mismatch");
  require(stride >= 1 && pad >= 0, "conv2d: bad stride/pad");

  const int N = x.shape[0], Cin = x.shape[1], H = x.shape[2], W = x.shape[3];
  const int Cout = w.shape[0], kh = w.shape[2], kw = w.shape[3];
  const int Ho = (H + 2 * pad - kh) / stride + 1;
  const int Wo = (W + 2 * pad - kw) / stride + 1;
  require(Ho >= 1 && Wo >= 1, "conv2d: kernel larger than padded input");

  Tensor y({N, Cout, Ho, Wo});
  for (int n = 0; n < N; ++n) {
    for (int co = 0; co < Cout; ++co) {
      const double bias = b.data[co];
      for (int oy = 0; oy < Ho; ++oy) {
        for (int ox = 0; ox < Wo; ++ox) {
          double acc = bias;
          for (int ci = 0; ci < Cin; ++ci) {
            for (int ky = 0; ky < kh; ++ky) {
              const int iy = oy * stride - pad + ky;
              if (iy < 0 || iy >= H) continue;
              const double* xrow = &x.data[((static_cast<std::size_t>(n) * Cin + ci) * H + iy) * W];
              const double* wrow =
                  &w.data[((static_cast<std::size_t>(co) * Cin + ci) * kh + ky) * kw];
              for (int kx = 0; kx < kw; ++kx) {
                const int ix = ox * stride - pad + kx;
                if (ix < 0 || ix >= W) continue;
                acc += wrow[kx] * xrow[ix];
              }
            }
          }
          y.at4(n, co, oy, ox) = acc;
        }
      }
    }
  }
  return y;
}

void conv2d_backward(const Tensor& x, const Tensor& w, const Tensor& dy, int stride, int pad,
                     Tensor& dx, Tensor& dw, Tensor& db) {
  const int N = x.shape[0], Cin = x.shape[1], H = x.shape[2], W = x.shape[3];
  const int Cout = w.shape[0], kh = w.shape[2], kw = w.shape[3];
  const int Ho = dy.shape[2], Wo = dy.shape[3];

  dx = Tensor::zeros_like(x);
  dw = Tensor::zeros_like(w);
  db = Tensor({Cout});

  for (int n = 0; n < N; ++n) {
    for (int co = 0; co < Cout; ++co) {
      for (int oy = 0; oy < Ho; ++oy) {
        for (int ox = 0; ox < Wo; ++ox) {
          const double g = dy.at4(n, co, oy, ox);
          if (g == 0.0) continue;
          db.data[co] += g;
          for (int ci = 0; ci < Cin; ++ci) {
            for (int ky = 0; ky < kh; ++ky) {
              const int iy = oy * stride - pad + ky;
              if (iy < 0 || iy >= H) continue;
              double* dxrow = &dx.data[((static_cast<std::size_t>(n) * Cin + ci) * H + iy) * W];
              const double* xrow =
                  &x.data[((static_cast<std::size_t>(n) * Cin + ci) * H + iy) * W];
              double* dwrow =
                  &dw.data[((static_cast<std::size_t>(co) * Cin + ci) * kh + ky) * kw];
              const double* wrow =
                  &w.data[((static_cast<std::size_t>(co) * Cin + ci) * kh + ky) * kw];
              for (int kx = 0; kx < kw; ++kx) {
                const int ix = ox * stride - pad + kx;
                if (ix < 0 || ix >= W) continue;
                dxrow[ix] += wrow[kx] * g;
                dwrow[kx] += xrow[ix] * g;
              }
            }
          }
        }
      }
    }
  }
}

BnStats bn_batch_stats(const Tensor& x) {
  require(x.shape.size() == 4, "batchnorm: rank-4 input required");
  const int N = x.shape[0], C = x.shape[1], H = x.shape[2], W = x.shape[3];
  const double m = static_cast<double>(N) * H * W;
  BnStats s{Tensor({C}), Tensor({C})};
  for (int c = 0; c < C; ++c) {
    double sum = 0.0, sq = 0.0;
    for (int n = 0; n < N; ++n)
      for (int y = 0; y < H; ++y)
        for (int xx = 0; xx < W; ++xx) {
          const double v = x.at4(n, c, y, xx);
          sum += v;
          sq += v * v;
        }
    const double mean = sum / m;
    s.mean.data[c] = mean;
    s.var.data[c] = std::max(0.0, sq / m - mean * mean);
  }
  return s;
}

Tensor bn_normalize(const Tensor& x, const Tensor& gamma, const Tensor& beta, const Tensor& mean,
                    const Tensor& var, double eps) {
  const int N = x.shape[0], C = x.shape[1], H = x.shape[2], W = x.shape[3];
  require(gamma.shape == std::vector<int>{C} && beta.shape == std::vector<int>{C},
          "batchnorm: affine shape mismatch");
  Tensor y({N, C, H, W});
  for (int c = 0; c < C; ++c) {
    const double inv = 1.0 / std::sqrt(var.data[c] + eps);
    const double g = gamma.data[c], b = beta.data[c], mu = mean.data[c];
    for (int n = 0; n < N; ++n)
      for (int yy = 0; yy < H; ++yy)
        for (int xx = 0; xx < W; ++xx) y.at4(n, c, yy, xx) = g * (x.at4(n, c, yy, xx) - mu) * inv + b;
  }
  return y;
}

void bn_backward_train(const Tensor& x, const Tensor& gamma, const BnStats& stats, double eps,
                       const Tensor& dy, Tensor& dx, Tensor& dgamma, Tensor& dbeta) {
  const int N = x.shape[0], C = x.shape[1], H = x.shape[2], W = x.shape[3];
  const double m = static_cast<double>(N) * H * W;
  dx = Tensor::zeros_like(x);
  dgamma = Tensor({C});
  dbeta = Tensor({C});
  for (int c = 0; c < C; ++c) {
    const double inv = 1.0 / std::sqrt(stats.var.data[c] + eps);
    const double mu = stats.mean.data[c];
    double sum_dy = 0.0, sum_dy_xhat = 0.0;
    for (int n = 0; n < N; ++n)
      for (int y = 0; y < H; ++y)
        for (int xx = 0; xx < W; ++xx) {
          const double xhat = (x.at4(n, c, y, xx) - mu) * inv;
          const double g = dy.at4(n, c, y, xx);
          sum_dy += g;
          sum_dy_xhat += g * xhat;
        }
    dgamma.data[c] = sum_dy_xhat;
    dbeta.data[c] = sum_dy;
    const double gm = gamma.data[c];
    for (int n = 0; n < N; ++n)
      for (int y = 0; y < H; ++y)
        for (int xx = 0; xx < W; ++xx) {
          const double xhat = (x.at4(n, c, y, xx) - mu) * inv;
          const double g = dy.at4(n, c, y, xx);
          dx.at4(n, c, y, xx) = gm * inv * (g - sum_dy / m - xhat * sum_dy_xhat / m);
        }
  }
}

void bn_backward_eval(const Tensor& x, const Tensor& gamma, const Tensor& mean, const Tensor& var,
                      double eps, const Tensor& dy, Tensor& dx, Tensor& dgamma, Tensor& dbeta) {
  const int N = x.shape[0], C = x.shape[1], H = x.shape[2], W = x.shape[3];
  dx = Tensor::zeros_like(x);
  dgamma = Tensor({C});
  dbeta = Tensor({C});
  for (int c = 0; c < C; ++c) {
    const double inv = 1.0 / std::sqrt(var.data[c] + eps);
    const double mu = mean.data[c];
    const double gm = gamma.data[c];
    for (int n = 0; n < N; ++n)
      for (int y = 0; y < H; ++y)
        for (int xx = 0; xx < W; ++xx) {
          const double g = dy.at4(n, c, y, xx);
          dx.at4(n, c, y, xx) = gm * inv * g;
          dgamma.data[c] += g * (x.at4(n, c, y, xx) - mu) * inv;
          dbeta.data[c] += g;
        }
  }
}

Tensor relu_forward(const Tensor& x) {
  Tensor y = x;
  for (double& v : y.data)
    if (v < 0.0) v = 0.0;
  return y;
}

void relu_backward(const Tensor& x, const Tensor& dy, Tensor& dx) {
  dx = Tensor::zeros_like(x);
  for (std::size_t i = 0; i < x.data.size(); ++i) dx.data[i] = x.data[i] > 0.0 ? dy.data[i] : 0.0;
}

Tensor linear_forward(const Tensor& x, const Tensor& w, const Tensor& b) {
  require(x.shape.size() == 2 && w.shape.size() == 2, "linear: rank-2 input and weight required");
  const int N = x.shape[0], In = x.shape[1], Out = w.shape[0];
  require(w.shape[1] == In, "linear: shape mismatch");
  require(b.shape == std::vector<int>{Out}, "linear: bias shape mismatch");
  Tensor y({N, Out});
  for (int n = 0; n < N; ++n) {
    for (int o = 0; o < Out; ++o) {
      double acc = b.data[o];
      const double* xr = &x.data[static_cast<std::size_t>(n) * In];
      const double* wr = &w.data[static_cast<std::size_t>(o) * In];
      for (int i = 0; i < In; ++i) acc += xr[i] * wr[i];
      y.at2(n, o) = acc;
    }
  }
  return y;
}

void linear_backward(const Tensor& x, const Tensor& w, const Tensor& dy, Tensor& dx, Tensor& dw,
                     Tensor& db) {
  const int N = x.shape[0], In = x.shape[1], Out = w.shape[0];
  dx = Tensor::zeros_like(x);
  dw = Tensor::zeros_like(w);
  db = Tensor({Out});
  for (int n = 0; n < N; ++n) {
    for (int o = 0; o < Out; ++o) {
      const double g = dy.at2(n, o);
      if (g == 0.0) continue;
      db.data[o] += g;
      const double* xr = &x.data[static_cast<std::size_t>(n) * In];
      const double* wr = &w.data[static_cast<std::size_t>(o) * In];
      double* dxr = &dx.data[static_cast<std::size_t>(n) * In];
      double* dwr = &dw.data[static_cast<std::size_t>(o) * In];
      for (int i = 0; i < In; ++i) {
        dxr[i] += wr[i] * g;
        dwr[i] += xr[i] * g;
      }
    }
  }
}

Tensor gap_forward(const Tensor& x) {
  require(x.shape.size() == 4, "gap: rank-4 input required");
  const int N = x.shape[0], C = x.shape[1], H = x.shape[2], W = x.shape[3];
  Tensor y({N, C});
  const double inv = 1.0 / (static_cast<double>(H) * W);
  for (int n = 0; n < N; ++n)
    for (int c = 0; c < C; ++c) {
      double acc = 0.0;
      for (int yy = 0; yy < H; ++yy)
        for (int xx = 0; xx < W; ++xx) acc += x.at4(n, c, yy, xx);
      y.at2(n, c) = acc * inv;
    }
  return y;
}

void gap_backward(const Tensor& x, const Tensor& dy, Tensor& dx) {
  const int N = x.shape[0], C = x.shape[1], H = x.shape[2], W = x.shape[3];
  dx = Tensor::zeros_like(x);
  const double inv = 1.0 / (static_cast<double>(H) * W);
  for (int n = 0; n < N; ++n)
    for (int c = 0; c < C; ++c) {
      const double g = dy.at2(n, c) * inv;
      for (int yy = 0; yy < H; ++yy)
        for (int xx = 0; xx < W; ++xx) dx.at4(n, c, yy, xx) = g;
    }
}

Tensor l2norm_rows_forward(const Tensor& x) {
  require(x.shape.size() == 2, "l2norm: rank-2 input required");
  const int N = x.shape[0], D = x.shape[1];
  Tensor y({N, D});
  for (int n = 0; n < N; ++n) {
    double sq = 0.0;
    for (int d = 0; d < D; ++d) sq += x.at2(n, d) * x.at2(n, d);
    const double norm = std::sqrt(sq);
    const double scale = norm > 1e-12 ? 1.0 / norm : 1.0;
    for (int d = 0; d < D; ++d) y.at2(n, d) = x.at2(n, d) * scale;
  }
  return y;
}

void l2norm_rows_backward(const Tensor& x, const Tensor& y, const Tensor& dy, Tensor& dx) {
  const int N = x.shape[0], D = x.shape[1];
  dx = Tensor::zeros_like(x);
  for (int n = 0; n < N; ++n) {
    double sq = 0.0;
    for (int d = 0; d < D; ++d) sq += x.at2(n, d) * x.at2(n, d);
    const double norm = std::sqrt(sq);
    if (norm <= 1e-12) {  // passthrough region
      for (int d = 0; d < D; ++d) dx.at2(n, d) = dy.at2(n, d);
      continue;
    }
    double dot = 0.0;
    for (int d = 0; d < D; ++d) dot += y.at2(n, d) * dy.at2(n, d);
    const double inv = 1.0 / norm;
    for (int d = 0; d < D; ++d) dx.at2(n, d) = (dy.at2(n, d) - y.at2(n, d) * dot) * inv;
  }
}

Tensor softmax_rows(const Tensor& logits) {
  require(logits.shape.size() == 2, "softmax: rank-2 input required");
  const int N = logits.shape[0], K = logits.shape[1];
  Tensor p({N, K});
  for (int n = 0; n < N; ++n) {
    double mx = logits.at2(n, 0);
    for (int k = 1; k < K; ++k) mx = std::max(mx, logits.at2(n, k));
    double sum = 0.0;
    for (int k = 0; k < K; ++k) {
      const double e = std::exp(logits.at2(n, k) - mx);
      p.at2(n, k) = e;
      sum += e;
    }
    for (int k = 0; k < K; ++k) p.at2(n, k) /= sum;
  }
  return p;
}

}  // namespace constyle::nn
