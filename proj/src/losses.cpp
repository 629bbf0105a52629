#include "constyle/losses.hpp"

#include <algorithm>
#include <cmath>

#include "constyle/nn.hpp"

namespace constyle {

namespace {

void require_unit(const std::vector<double>& v, const char* what) {
  double sq = 0.0;
  for (double x : v) sq += x * x;
  if (std::fabs(std::sqrt(sq) - 1.0) > 1e-3)
    throw ValueError(std::string("info_nce: ") + what + " must be unit-norm");
}

}  // namespace

InfoNceResult info_nce(const std::vector<double>& q, const std::vector<double>& k_pos,
                       const NegativeQueue& queue, double tau) {
  if (tau <= 0.0) throw ValueError("info_nce: temperature must be positive");
  if (queue.empty()) throw ValueError("info_nce: empty queue");
  if (q.size() != k_pos.size() || static_cast<int>(q.size()) != queue.dim())
    throw ValueError("info_nce: dimension mismatch");
  require_unit(q, "query");
  require_unit(k_pos, "positive key");

  Tensor qt({1, static_cast<int>(q.size())});
  Tensor kt({1, static_cast<int>(q.size())});
  std::copy(q.begin(), q.end(), qt.data.begin());
  std::copy(k_pos.begin(), k_pos.end(), kt.data.begin());
  const InfoNceBatchResult r = info_nce_batch(qt, kt, queue.snapshot(), tau);
  return {r.loss, r.grad_q.data};
}

InfoNceBatchResult info_nce_batch(const Tensor& q, const Tensor& k_pos, const Tensor& negatives,
                                  double tau) {
  if (q.shape.size() != 2 || !q.same_shape(k_pos) || negatives.shape.size() != 2 ||
      negatives.shape[1] != q.shape[1])
    throw ValueError("info_nce: shape mismatch");
  const int B = q.shape[0], D = q.shape[1], N = negatives.shape[0];

  InfoNceBatchResult out;
  out.grad_q = Tensor::zeros_like(q);
  std::vector<double> logits(N + 1), p(N + 1);

  for (int i = 0; i < B; ++i) {
    double pos = 0.0;
    for (int d = 0; d < D; ++d) pos += q.at2(i, d) * k_pos.at2(i, d);
    logits[0] = pos / tau;
    for (int j = 0; j < N; ++j) {
      double dot = 0.0;
      for (int d = 0; d < D; ++d) dot += q.at2(i, d) * negatives.at2(j, d);
      logits[j + 1] = dot / tau;
      out.mean_neg_sim += dot;
    }
    out.mean_pos_sim += pos;

    const double mx = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (int j = 0; j <= N; ++j) {
      p[j] = std::exp(logits[j] - mx);
      sum += p[j];
    }
    for (int j = 0; j <= N; ++j) p[j] /= sum;
    out.loss += -(logits[0] - mx) + std::log(sum);

    // d loss_i / d q = [ (p0 - 1) k+ + sum_j p_j n_j ] / tau, averaged over B.
    const double c = 1.0 / (B * tau);
    for (int d = 0; d < D; ++d) out.grad_q.at2(i, d) += (p[0] - 1.0) * k_pos.at2(i, d) * c;
    for (int j = 0; j < N; ++j) {
      const double pc = p[j + 1] * c;
      if (pc == 0.0) continue;
      for (int d = 0; d < D; ++d) out.grad_q.at2(i, d) += pc * negatives.at2(j, d);
    }
  }
  out.loss /= B;
  out.mean_pos_sim /= B;
  out.mean_neg_sim /= static_cast<double>(B) * N;
  return out;
}

LossGrad content_l1(const Tensor& x, const Tensor& target) {
  if (!x.same_shape(target)) throw ValueError("content_l1: shape mismatch");
  LossGrad out;
  out.grad = Tensor::zeros_like(x);
  const double inv = 1.0 / static_cast<double>(x.numel());
  for (std::size_t i = 0; i < x.data.size(); ++i) {
    const double d = x.data[i] - target.data[i];
    out.loss += std::fabs(d) * inv;
    out.grad.data[i] = (d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0)) * inv;
  }
  return out;
}

LossGrad style_stats(const Tensor& x, const Tensor& target) {
  if (x.shape.size() != 4 || !x.same_shape(target)) throw ValueError("style_stats: shape mismatch");
  const int N = x.shape[0], C = x.shape[1], H = x.shape[2], W = x.shape[3];
  const double m = static_cast<double>(H) * W;
  constexpr double kEps = 1e-8;  // keeps sqrt differentiable at near-constant maps

  LossGrad out;
  out.grad = Tensor::zeros_like(x);
  for (int n = 0; n < N; ++n) {
    for (int c = 0; c < C; ++c) {
      double sx = 0.0, sxx = 0.0, st = 0.0, stt = 0.0;
      for (int y = 0; y < H; ++y)
        for (int xx = 0; xx < W; ++xx) {
          const double a = x.at4(n, c, y, xx), b = target.at4(n, c, y, xx);
          sx += a;
          sxx += a * a;
          st += b;
          stt += b * b;
        }
      const double mu_x = sx / m, mu_t = st / m;
      const double var_x = std::max(0.0, sxx / m - mu_x * mu_x);
      const double var_t = std::max(0.0, stt / m - mu_t * mu_t);
      const double sd_x = std::sqrt(var_x + kEps), sd_t = std::sqrt(var_t + kEps);

      const double dmu = mu_x - mu_t;
      const double dsd = sd_x - sd_t;
      out.loss += (dmu * dmu + dsd * dsd) / N;

      // d/da of mu: 1/m; of sd: (a - mu)/(m * sd).
      const double gmu = 2.0 * dmu / (N * m);
      const double gsd = 2.0 * dsd / (N * m * sd_x);
      for (int y = 0; y < H; ++y)
        for (int xx = 0; xx < W; ++xx)
          out.grad.at4(n, c, y, xx) = gmu + gsd * (x.at4(n, c, y, xx) - mu_x);
    }
  }
  return out;
}

LossGrad cross_entropy(const Tensor& logits, const std::vector<int>& labels) {
  if (logits.shape.size() != 2) throw ValueError("cross_entropy: rank-2 logits required");
  const int N = logits.shape[0], K = logits.shape[1];
  if (static_cast<int>(labels.size()) != N) throw ValueError("cross_entropy: label count mismatch");
  for (int lbl : labels)
    if (lbl < 0 || lbl >= K) throw ValueError("cross_entropy: label out of range");

  const Tensor p = nn::softmax_rows(logits);
  LossGrad out;
  out.grad = Tensor::zeros_like(logits);
  for (int n = 0; n < N; ++n) {
    out.loss += -std::log(std::max(p.at2(n, labels[n]), 1e-300)) / N;
    for (int k = 0; k < K; ++k)
      out.grad.at2(n, k) = (p.at2(n, k) - (k == labels[n] ? 1.0 : 0.0)) / N;
  }
  return out;
}

LossGrad kl_distill(const Tensor& teacher_logits, const Tensor& student_logits) {
  if (!teacher_logits.same_shape(student_logits) || teacher_logits.shape.size() != 2)
    throw ValueError("kl_distill: shape mismatch");
  const int N = teacher_logits.shape[0], K = teacher_logits.shape[1];
  const Tensor pt = nn::softmax_rows(teacher_logits);
  const Tensor ps = nn::softmax_rows(student_logits);

  LossGrad out;
  out.grad = Tensor::zeros_like(student_logits);
  for (int n = 0; n < N; ++n) {
    for (int k = 0; k < K; ++k) {
      const double t = pt.at2(n, k);
      if (t > 0.0) out.loss += t * (std::log(t) - std::log(std::max(ps.at2(n, k), 1e-300))) / N;
      // dKL/ds = softmax(student) - softmax(teacher)
      out.grad.at2(n, k) = (ps.at2(n, k) - t) / N;
    }
  }
  out.loss = std::max(out.loss, 0.0);  // guards -0.0 from rounding on equal inputs
  return out;
}

}  // namespace constyle
