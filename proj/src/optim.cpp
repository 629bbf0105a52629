#include "constyle/optim.hpp"

#include <cmath>

namespace constyle {

void adamw_step(std::map<std::string, Tensor>& params,
                const std::map<std::string, Tensor>& grads, AdamWState& state, long t,
                const AdamWConfig& cfg) {
  if (t < 1) throw ValueError("adamw_step: t must be >= 1");
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));

  for (const auto& [name, g] : grads) {
    auto it = params.find(name);
    if (it == params.end()) throw ValueError("adamw_step: unknown parameter " + name);
    Tensor& p = it->second;
    if (!p.same_shape(g)) throw ValueError("adamw_step: gradient shape mismatch for " + name);

    Tensor& m = state.m.try_emplace(name, Tensor::zeros_like(p)).first->second;
    Tensor& v = state.v.try_emplace(name, Tensor::zeros_like(p)).first->second;

    for (std::size_t i = 0; i < p.data.size(); ++i) {
      m.data[i] = cfg.beta1 * m.data[i] + (1.0 - cfg.beta1) * g.data[i];
      v.data[i] = cfg.beta2 * v.data[i] + (1.0 - cfg.beta2) * g.data[i] * g.data[i];
      const double mhat = m.data[i] / bc1;
      const double vhat = v.data[i] / bc2;
      p.data[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
      p.data[i] -= cfg.lr * cfg.weight_decay * p.data[i];
    }
  }
}

double cosine_lr(long t, double lr_max, double lr_min, long total_iters) {
  if (total_iters < 1) throw ValueError("cosine_lr: total_iters must be >= 1");
  if (t < 0 || t > total_iters) throw ValueError("cosine_lr: t out of range");
  return lr_min +
         0.5 * (lr_max - lr_min) * (1.0 + std::cos(M_PI * static_cast<double>(t) / total_iters));
}

}  // namespace constyle
