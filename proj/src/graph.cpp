#include "constyle/graph.hpp"

namespace constyle {

int Graph::add_node(Tensor value, bool requires_grad, std::function<void(Graph&)> back) {
  nodes_.push_back(Node{std::move(value), Tensor{}, requires_grad, std::move(back)});
  return static_cast<int>(nodes_.size()) - 1;
}

int Graph::leaf(Tensor value) { return add_node(std::move(value), true); }

int Graph::constant(Tensor value) { return add_node(std::move(value), false); }

void Graph::accumulate(int id, const Tensor& g) {
  Node& n = nodes_[id];
  if (!n.requires_grad) return;
  if (n.grad.numel() == 0) n.grad = Tensor::zeros_like(n.value);
  for (std::size_t i = 0; i < g.data.size(); ++i) n.grad.data[i] += g.data[i];
}

void Graph::backward(int root) {
  if (nodes_[root].value.numel() != 1) throw ValueError("Graph::backward: root must be scalar");
  for (Node& n : nodes_) n.grad = Tensor{};
  nodes_[root].grad = Tensor({1}, 1.0);
  for (int i = root; i >= 0; --i) {
    Node& n = nodes_[i];
    if (n.back && n.requires_grad && n.grad.numel() != 0) n.back(*this);
  }
}

int Graph::conv2d(int x, int w, int b, int stride, int pad) {
  Tensor y = nn::conv2d_forward(val(x), val(w), val(b), stride, pad);
  const bool track = tracked(x) || tracked(w) || tracked(b);
  const int self = add_node(std::move(y), track);
  if (track) {
    nodes_[self].back = [self, x, w, b, stride, pad](Graph& g) {
      Tensor dx, dw, db;
      nn::conv2d_backward(g.val(x), g.val(w), g.grad(self), stride, pad, dx, dw, db);
      g.accumulate(x, dx);
      g.accumulate(w, dw);
      g.accumulate(b, db);
    };
  }
  return self;
}

Graph::BnTrainResult Graph::batchnorm_train(int x, int gamma, int beta, double eps) {
  nn::BnStats stats = nn::bn_batch_stats(val(x));
  Tensor y = nn::bn_normalize(val(x), val(gamma), val(beta), stats.mean, stats.var, eps);
  const bool track = tracked(x) || tracked(gamma) || tracked(beta);
  const int self = add_node(std::move(y), track);
  if (track) {
    nodes_[self].back = [self, x, gamma, beta, eps, stats](Graph& g) {
      Tensor dx, dgamma, dbeta;
      nn::bn_backward_train(g.val(x), g.val(gamma), stats, eps, g.grad(self), dx, dgamma, dbeta);
      g.accumulate(x, dx);
      g.accumulate(gamma, dgamma);
      g.accumulate(beta, dbeta);
    };
  }
  return {self, std::move(stats)};
}

int Graph::batchnorm_eval(int x, int gamma, int beta, Tensor running_mean, Tensor running_var,
                          double eps) {
  Tensor y = nn::bn_normalize(val(x), val(gamma), val(beta), running_mean, running_var, eps);
  const bool track = tracked(x) || tracked(gamma) || tracked(beta);
  const int self = add_node(std::move(y), track);
  if (track) {
    nodes_[self].back = [self, x, gamma, beta, eps, mean = std::move(running_mean),
                         var = std::move(running_var)](Graph& g) {
      Tensor dx, dgamma, dbeta;
      nn::bn_backward_eval(g.val(x), g.val(gamma), mean, var, eps, g.grad(self), dx, dgamma,
                           dbeta);
      g.accumulate(x, dx);
      g.accumulate(gamma, dgamma);
      g.accumulate(beta, dbeta);
    };
  }
  return self;
}

int Graph::relu(int x) {
  Tensor y = nn::relu_forward(val(x));
  const bool track = tracked(x);
  const int self = add_node(std::move(y), track);
  if (track) {
    nodes_[self].back = [self, x](Graph& g) {
      Tensor dx;
      nn::relu_backward(g.val(x), g.grad(self), dx);
      g.accumulate(x, dx);
    };
  }
  return self;
}

int Graph::linear(int x, int w, int b) {
  Tensor y = nn::linear_forward(val(x), val(w), val(b));
  const bool track = tracked(x) || tracked(w) || tracked(b);
  const int self = add_node(std::move(y), track);
  if (track) {
    nodes_[self].back = [self, x, w, b](Graph& g) {
      Tensor dx, dw, db;
      nn::linear_backward(g.val(x), g.val(w), g.grad(self), dx, dw, db);
      g.accumulate(x, dx);
      g.accumulate(w, dw);
      g.accumulate(b, db);
    };
  }
  return self;
}

int Graph::global_avg_pool(int x) {
  Tensor y = nn::gap_forward(val(x));
  const bool track = tracked(x);
  const int self = add_node(std::move(y), track);
  if (track) {
    nodes_[self].back = [self, x](Graph& g) {
      Tensor dx;
      nn::gap_backward(g.val(x), g.grad(self), dx);
      g.accumulate(x, dx);
    };
  }
  return self;
}

int Graph::l2_normalize_rows(int x) {
  Tensor y = nn::l2norm_rows_forward(val(x));
  const bool track = tracked(x);
  const int self = add_node(std::move(y), track);
  if (track) {
    nodes_[self].back = [self, x](Graph& g) {
      Tensor dx;
      nn::l2norm_rows_backward(g.val(x), g.nodes_[self].value, g.grad(self), dx);
      g.accumulate(x, dx);
    };
  }
  return self;
}

int Graph::info_nce(int q, Tensor k_pos, Tensor negatives, double tau, double* pos_sim,
                    double* neg_sim) {
  const InfoNceBatchResult r = info_nce_batch(val(q), k_pos, negatives, tau);
  if (pos_sim) *pos_sim = r.mean_pos_sim;
  if (neg_sim) *neg_sim = r.mean_neg_sim;
  const bool track = tracked(q);
  const int self = add_node(Tensor({1}, r.loss), track);
  if (track) {
    nodes_[self].back = [self, q, grad_q = r.grad_q](Graph& g) {
      Tensor dx = grad_q;
      const double s = g.grad(self).data[0];
      for (double& v : dx.data) v *= s;
      g.accumulate(q, dx);
    };
  }
  return self;
}

int Graph::content_l1(int x, Tensor target) {
  LossGrad r = constyle::content_l1(val(x), target);
  const bool track = tracked(x);
  const int self = add_node(Tensor({1}, r.loss), track);
  if (track) {
    nodes_[self].back = [self, x, grad = std::move(r.grad)](Graph& g) {
      Tensor dx = grad;
      const double s = g.grad(self).data[0];
      for (double& v : dx.data) v *= s;
      g.accumulate(x, dx);
    };
  }
  return self;
}

int Graph::style_stats(int x, Tensor target) {
  LossGrad r = constyle::style_stats(val(x), target);
  const bool track = tracked(x);
  const int self = add_node(Tensor({1}, r.loss), track);
  if (track) {
    nodes_[self].back = [self, x, grad = std::move(r.grad)](Graph& g) {
      Tensor dx = grad;
      const double s = g.grad(self).data[0];
      for (double& v : dx.data) v *= s;
      g.accumulate(x, dx);
    };
  }
  return self;
}

int Graph::cross_entropy(int logits, std::vector<int> labels) {
  LossGrad r = constyle::cross_entropy(val(logits), labels);
  const bool track = tracked(logits);
  const int self = add_node(Tensor({1}, r.loss), track);
  if (track) {
    nodes_[self].back = [self, logits, grad = std::move(r.grad)](Graph& g) {
      Tensor dx = grad;
      const double s = g.grad(self).data[0];
      for (double& v : dx.data) v *= s;
      g.accumulate(logits, dx);
    };
  }
  return self;
}

int Graph::kl_distill(Tensor teacher_logits, int student_logits) {
  LossGrad r = constyle::kl_distill(teacher_logits, val(student_logits));
  const bool track = tracked(student_logits);
  const int self = add_node(Tensor({1}, r.loss), track);
  if (track) {
    nodes_[self].back = [self, student_logits, grad = std::move(r.grad)](Graph& g) {
      Tensor dx = grad;
      const double s = g.grad(self).data[0];
      for (double& v : dx.data) v *= s;
      g.accumulate(student_logits, dx);
    };
  }
  return self;
}

int Graph::weighted_sum(const std::vector<std::pair<double, int>>& terms) {
  double total = 0.0;
  bool track = false;
  for (const auto& [w, id] : terms) {
    if (nodes_[id].value.numel() != 1) throw ValueError("weighted_sum: scalar terms required");
    total += w * val(id).data[0];
    track = track || tracked(id);
  }
  const int self = add_node(Tensor({1}, total), track);
  if (track) {
    nodes_[self].back = [self, terms](Graph& g) {
      const double s = g.grad(self).data[0];
      for (const auto& [w, id] : terms) g.accumulate(id, Tensor({1}, w * s));
    };
  }
  return self;
}

}  // namespace constyle
