#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "constyle/losses.hpp"
#include "constyle/nn.hpp"
#include "constyle/tensor.hpp"

namespace constyle {

// Minimal reverse-mode tape over dense tensors. Nodes are created in forward
// order; backward() walks the tape in reverse, with each node's hand-written
// rule accumulating into its parents' gradients.
class Graph {
 public:
  int leaf(Tensor value);                // tracked
  int constant(Tensor value);            // untracked
  const Tensor& val(int id) const { return nodes_[id].value; }
  const Tensor& grad(int id) const { return nodes_[id].grad; }
  bool tracked(int id) const { return nodes_[id].requires_grad; }

  // Zeroes all gradients, seeds d(root)/d(root) = 1 and runs the tape.
  void backward(int root);

  int conv2d(int x, int w, int b, int stride, int pad);

  struct BnTrainResult {
    int y;
    nn::BnStats stats;  // batch statistics, for the running-average update
  };
  BnTrainResult batchnorm_train(int x, int gamma, int beta, double eps);
  int batchnorm_eval(int x, int gamma, int beta, Tensor running_mean, Tensor running_var,
                     double eps);

  int relu(int x);
  int linear(int x, int w, int b);
  int global_avg_pool(int x);
  int l2_normalize_rows(int x);

  // Scalar losses (values are {1} tensors).
  int info_nce(int q, Tensor k_pos, Tensor negatives, double tau, double* pos_sim = nullptr,
               double* neg_sim = nullptr);
  int content_l1(int x, Tensor target);
  int style_stats(int x, Tensor target);
  int cross_entropy(int logits, std::vector<int> labels);
  int kl_distill(Tensor teacher_logits, int student_logits);

  // Weighted sum of scalar nodes.
  int weighted_sum(const std::vector<std::pair<double, int>>& terms);

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    std::function<void(Graph&)> back;  // null for leaves/constants
  };

  int add_node(Tensor value, bool requires_grad, std::function<void(Graph&)> back = nullptr);
  void accumulate(int id, const Tensor& g);

  std::vector<Node> nodes_;
};

}  // namespace constyle
