#pragma once

#include <vector>

#include "constyle/queue.hpp"
#include "constyle/tensor.hpp"

namespace constyle {

// Standalone loss kernels. Each returns the value plus the gradient with
// respect to the trainable side; the other side is treated as detached.

struct InfoNceResult {
  double loss = 0.0;
  std::vector<double> grad_q;
};

// -log( exp(q.k+/tau) / (exp(q.k+/tau) + sum_i exp(q.k_i/tau)) ).
// q and k_pos must be unit-norm within 1e-3; keys are detached.
InfoNceResult info_nce(const std::vector<double>& q, const std::vector<double>& k_pos,
                       const NegativeQueue& queue, double tau);

// Batched form used in training: q {B,d} (rows unit-norm), k_pos {B,d},
// negatives {N,d}. Loss is the mean over the batch; grad_q has q's shape.
struct InfoNceBatchResult {
  double loss = 0.0;
  Tensor grad_q;
  double mean_pos_sim = 0.0;  // mean q.k+ (cosine)
  double mean_neg_sim = 0.0;  // mean over all q x negative pairs
};
InfoNceBatchResult info_nce_batch(const Tensor& q, const Tensor& k_pos, const Tensor& negatives,
                                  double tau);

// Mean absolute difference; the target side is detached.
struct LossGrad {
  double loss = 0.0;
  Tensor grad;
};
LossGrad content_l1(const Tensor& x, const Tensor& target);

// Sum over channels of squared differences of per-(sample,channel) spatial
// mean and standard deviation, averaged over the batch. {N,C,H,W} inputs.
LossGrad style_stats(const Tensor& x, const Tensor& target);

// Mean -log softmax(logits)[label] over the batch. logits {N,K}.
LossGrad cross_entropy(const Tensor& logits, const std::vector<int>& labels);

// Mean KL(softmax(teacher) || softmax(student)); teacher detached, gradient
// w.r.t. student logits.
LossGrad kl_distill(const Tensor& teacher_logits, const Tensor& student_logits);

}  // namespace constyle
