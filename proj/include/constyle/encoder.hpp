#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "constyle/image.hpp"
#include "constyle/rng.hpp"
#include "constyle/tensor.hpp"

namespace constyle {

// Small conv/linear/BN encoder: stages of 3x3 conv + BN + ReLU, global average
// pool, a linear projector producing the latent code and a linear classifier
// head used only during pre-training.
struct EncoderConfig {
  int input_size = 32;
  int in_channels = 3;
  std::vector<std::pair<int, int>> stages{{16, 2}, {32, 2}, {64, 2}, {128, 2}};  // (channels, stride)
  int latent_dim = 128;
  int num_classes = 10;
  bool use_batchnorm = true;
  double bn_eps = 1e-5;
  double bn_momentum = 0.1;  // running = (1-m)*running + m*batch

  void validate() const;
  nlohmann::json to_json() const;
  static EncoderConfig from_json(const nlohmann::json& j);
};

// Named parameter tensors. Keys:
//   stage{i}.conv.weight/.bias, stage{i}.bn.gamma/.beta/.running_mean/.running_var,
//   proj.weight/.bias, cls.weight/.bias
struct EncoderState {
  EncoderConfig config;
  std::map<std::string, Tensor> params;

  bool has(const std::string& name) const { return params.count(name) != 0; }
  const Tensor& get(const std::string& name) const;
};

EncoderState init_encoder(const EncoderConfig& cfg, Rng& rng);

struct PromptBundle {
  std::vector<double> latent_code;    // L2-normalized
  std::vector<Tensor> feature_maps;   // per-stage activations, {1,C,H,W}
  std::vector<double> class_logits;   // empty when the classifier head is absent
};

// Deterministic eval-mode forward on a single image (BN uses running stats).
PromptBundle encoder_forward(const EncoderState& state, const ImageTensor& img);

// Batched eval-mode forward; x is {N,C,H,W}.
struct EvalForward {
  std::vector<Tensor> feature_maps;  // {N,C,H,W} per stage
  Tensor pooled;                     // {N,C_last}
  Tensor latent;                     // {N,d}, L2-normalized rows
  Tensor logits;                     // {N,K}; empty tensor when no classifier
};
EvalForward eval_forward_batch(const EncoderState& state, const Tensor& x);

// theta_t <- m*theta_t + (1-m)*theta_s elementwise over all shared tensors.
void momentum_update(EncoderState& teacher, const EncoderState& student, double m);

// HWC [0,1] images to a {N,C,H,W} tensor.
Tensor images_to_tensor(const std::vector<ImageTensor>& images);

}  // namespace constyle
