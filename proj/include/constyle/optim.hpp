#pragma once

#include <map>
#include <string>

#include "constyle/tensor.hpp"

namespace constyle {

struct AdamWConfig {
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 1e-4;
};

struct AdamWState {
  std::map<std::string, Tensor> m, v;
};

// Bias-corrected AdamW with decoupled weight decay: the decay term
// theta -= lr * wd * theta is applied separately from the adaptive step.
// Only parameters present in `grads` are updated; t is 1-based.
void adamw_step(std::map<std::string, Tensor>& params,
                const std::map<std::string, Tensor>& grads, AdamWState& state, long t,
                const AdamWConfig& cfg);

// lr_min + 0.5*(lr_max - lr_min)*(1 + cos(pi * t / total)); t in [0, total].
double cosine_lr(long t, double lr_max, double lr_min, long total_iters);

}  // namespace constyle
