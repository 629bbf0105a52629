#pragma once

#include "constyle/tensor.hpp"

namespace constyle::nn {

// Plain forward/backward kernels shared by the autodiff graph (training) and
// the no-gradient eval path (teacher, exported encoder).

// x {N,Cin,H,W}, w {Cout,Cin,kh,kw}, b {Cout}; zero padding.
Tensor conv2d_forward(const Tensor& x, const Tensor& w, const Tensor& b, int stride, int pad);
void conv2d_backward(const Tensor& x, const Tensor& w, const Tensor& dy, int stride, int pad,
                     Tensor& dx, Tensor& dw, Tensor& db);

struct BnStats {
  Tensor mean, var;  // per channel, biased variance
};

BnStats bn_batch_stats(const Tensor& x);
// y = gamma * (x - mean)/sqrt(var + eps) + beta, channel-wise over {N,.,H,W}.
Tensor bn_normalize(const Tensor& x, const Tensor& gamma, const Tensor& beta, const Tensor& mean,
                    const Tensor& var, double eps);
// Backward through batch statistics (mean/var computed from x).
void bn_backward_train(const Tensor& x, const Tensor& gamma, const BnStats& stats, double eps,
                       const Tensor& dy, Tensor& dx, Tensor& dgamma, Tensor& dbeta);
// Backward when mean/var are constants (eval mode).
void bn_backward_eval(const Tensor& x, const Tensor& gamma, const Tensor& mean, const Tensor& var,
                      double eps, const Tensor& dy, Tensor& dx, Tensor& dgamma, Tensor& dbeta);

Tensor relu_forward(const Tensor& x);
void relu_backward(const Tensor& x, const Tensor& dy, Tensor& dx);

// x {N,in}, w {out,in}, b {out} -> {N,out}
Tensor linear_forward(const Tensor& x, const Tensor& w, const Tensor& b);
void linear_backward(const Tensor& x, const Tensor& w, const Tensor& dy, Tensor& dx, Tensor& dw,
                     Tensor& db);

// {N,C,H,W} -> {N,C}
Tensor gap_forward(const Tensor& x);
void gap_backward(const Tensor& x, const Tensor& dy, Tensor& dx);

// Row-wise L2 normalization of {N,D}; zero rows pass through unchanged.
Tensor l2norm_rows_forward(const Tensor& x);
void l2norm_rows_backward(const Tensor& x, const Tensor& y, const Tensor& dy, Tensor& dx);

// Numerically stable row-wise softmax of {N,K}.
Tensor softmax_rows(const Tensor& logits);

}  // namespace constyle::nn
