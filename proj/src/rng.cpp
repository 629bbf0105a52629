#include "constyle/rng.hpp"

namespace constyle {

namespace {

// Knuth's product method; O(lambda), fine for small rates.
std::int64_t poisson_small(Rng& rng, double lambda) {
  const double limit = std::exp(-lambda);
  std::int64_t k = 0;
  double p = 1.0;
  do {
    ++k;
    p *= rng.uniform();
  } while (p > limit);
  return k - 1;
}

// Hoermann's PTRS transformed rejection, valid for lambda >= 10.
std::int64_t poisson_ptrs(Rng& rng, double lambda) {
  const double b = 0.931 + 2.53 * std::sqrt(lambda);
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double v_r = 0.9277 - 3.6224 / (b - 2.0);
  const double log_lambda = std::log(lambda);
  for (;;) {
    double u = rng.uniform() - 0.5;
    double v = rng.uniform();
    double us = 0.5 - std::fabs(u);
    double kf = std::floor((2.0 * a / us + b) * u + lambda + 0.43);
    if (us >= 0.07 && v <= v_r) return static_cast<std::int64_t>(kf);
    if (kf < 0.0 || (us < 0.013 && v > us)) continue;
    if (std::log(v * inv_alpha / (a / (us * us) + b)) <=
        kf * log_lambda - lambda - std::lgamma(kf + 1.0)) {
      return static_cast<std::int64_t>(kf);
    }
  }
}

}  // namespace

std::int64_t Rng::poisson(double lambda) {
  if (lambda < 0.0 || !std::isfinite(lambda)) throw ValueError("poisson: invalid rate");
  if (lambda == 0.0) return 0;
  if (lambda < 10.0) return poisson_small(*this, lambda);
  return poisson_ptrs(*this, lambda);
}

}  // namespace constyle
