#include "constyle/encoder.hpp"

#include <cmath>

#include "constyle/nn.hpp"

namespace constyle {

using nlohmann::json;

void EncoderConfig::validate() const {
  if (input_size < 1 || (in_channels != 1 && in_channels != 3))
    throw ValueError("EncoderConfig: bad input size/channels");
  if (stages.empty()) throw ValueError("EncoderConfig: at least one stage required");
  for (const auto& [ch, stride] : stages)
    if (ch < 1 || stride < 1) throw ValueError("EncoderConfig: bad stage spec");
  if (latent_dim < 2) throw ValueError("EncoderConfig: latent_dim must be >= 2");
  if (num_classes < 2) throw ValueError("EncoderConfig: num_classes must be >= 2");
  if (bn_eps <= 0.0) throw ValueError("EncoderConfig: bn_eps must be positive");
}

json EncoderConfig::to_json() const {
  json stages_j = json::array();
  for (const auto& [ch, stride] : stages) stages_j.push_back({ch, stride});
  return json{{"input_size", input_size},   {"in_channels", in_channels},
              {"stages", stages_j},         {"latent_dim", latent_dim},
              {"num_classes", num_classes}, {"use_batchnorm", use_batchnorm},
              {"bn_eps", bn_eps},           {"bn_momentum", bn_momentum}};
}

EncoderConfig EncoderConfig::from_json(const json& j) {
  EncoderConfig c;
  c.input_size = j.value("input_size", c.input_size);
  c.in_channels = j.value("in_channels", c.in_channels);
  if (j.contains("stages")) {
    c.stages.clear();
    for (const auto& s : j.at("stages")) c.stages.emplace_back(s.at(0).get<int>(), s.at(1).get<int>());
  }
  c.latent_dim = j.value("latent_dim", c.latent_dim);
  c.num_classes = j.value("num_classes", c.num_classes);
  c.use_batchnorm = j.value("use_batchnorm", c.use_batchnorm);
  c.bn_eps = j.value("bn_eps", c.bn_eps);
  c.bn_momentum = j.value("bn_momentum", c.bn_momentum);
  c.validate();
  return c;
}

const Tensor& EncoderState::get(const std::string& name) const {
  auto it = params.find(name);
  if (it == params.end()) throw ValueError("EncoderState: missing parameter " + name);
  return it->second;
}

EncoderState init_encoder(const EncoderConfig& cfg, Rng& rng) {
  cfg.validate();
  EncoderState s;
  s.config = cfg;

  int cin = cfg.in_channels;
  for (std::size_t i = 0; i < cfg.stages.size(); ++i) {
    const auto [cout, stride] = cfg.stages[i];
    (void)stride;
    const std::string prefix = "stage" + std::to_string(i) + ".";
    const double he = std::sqrt(2.0 / (static_cast<double>(cin) * 9));
    s.params.emplace(prefix + "conv.weight", Tensor::randn({cout, cin, 3, 3}, rng, he));
    s.params.emplace(prefix + "conv.bias", Tensor({cout}));
    if (cfg.use_batchnorm) {
      s.params.emplace(prefix + "bn.gamma", Tensor({cout}, 1.0));
      s.params.emplace(prefix + "bn.beta", Tensor({cout}));
      s.params.emplace(prefix + "bn.running_mean", Tensor({cout}));
      s.params.emplace(prefix + "bn.running_var", Tensor({cout}, 1.0));
    }
    cin = cout;
  }
  const double fan = std::sqrt(1.0 / cin);
  s.params.emplace("proj.weight", Tensor::randn({cfg.latent_dim, cin}, rng, fan));
  s.params.emplace("proj.bias", Tensor({cfg.latent_dim}));
  s.params.emplace("cls.weight", Tensor::randn({cfg.num_classes, cin}, rng, fan));
  s.params.emplace("cls.bias", Tensor({cfg.num_classes}));
  return s;
}

EvalForward eval_forward_batch(const EncoderState& state, const Tensor& x) {
  const EncoderConfig& cfg = state.config;
  if (x.shape.size() != 4 || x.shape[1] != cfg.in_channels || x.shape[2] != cfg.input_size ||
      x.shape[3] != cfg.input_size)
    throw ValueError("eval_forward_batch: input shape mismatch");

  EvalForward out;
  Tensor cur = x;
  for (std::size_t i = 0; i < cfg.stages.size(); ++i) {
    const std::string prefix = "stage" + std::to_string(i) + ".";
    cur = nn::conv2d_forward(cur, state.get(prefix + "conv.weight"),
                             state.get(prefix + "conv.bias"), cfg.stages[i].second, 1);
    if (cfg.use_batchnorm) {
      cur = nn::bn_normalize(cur, state.get(prefix + "bn.gamma"), state.get(prefix + "bn.beta"),
                             state.get(prefix + "bn.running_mean"),
                             state.get(prefix + "bn.running_var"), cfg.bn_eps);
    }
    cur = nn::relu_forward(cur);
    out.feature_maps.push_back(cur);
  }
  out.pooled = nn::gap_forward(cur);
  out.latent =
      nn::l2norm_rows_forward(nn::linear_forward(out.pooled, state.get("proj.weight"), state.get("proj.bias")));
  if (state.has("cls.weight"))
    out.logits = nn::linear_forward(out.pooled, state.get("cls.weight"), state.get("cls.bias"));
  return out;
}

PromptBundle encoder_forward(const EncoderState& state, const ImageTensor& img) {
  const EvalForward fwd = eval_forward_batch(state, images_to_tensor({img}));
  PromptBundle bundle;
  bundle.latent_code = fwd.latent.data;
  bundle.feature_maps = fwd.feature_maps;
  if (fwd.logits.numel() > 0) bundle.class_logits = fwd.logits.data;
  return bundle;
}

void momentum_update(EncoderState& teacher, const EncoderState& student, double m) {
  if (m < 0.0 || m > 1.0) throw ValueError("momentum_update: m must lie in [0,1]");
  if (teacher.params.size() != student.params.size())
    throw ValueError("momentum_update: parameter sets differ");
  for (auto& [name, t] : teacher.params) {
    auto it = student.params.find(name);
    if (it == student.params.end() || !t.same_shape(it->second))
      throw ValueError("momentum_update: shape mismatch for " + name);
    const Tensor& s = it->second;
    for (std::size_t i = 0; i < t.data.size(); ++i)
      t.data[i] = m * t.data[i] + (1.0 - m) * s.data[i];
  }
}

Tensor images_to_tensor(const std::vector<ImageTensor>& images) {
  if (images.empty()) throw ValueError("images_to_tensor: empty batch");
  const int N = static_cast<int>(images.size());
  const int C = images[0].channels, H = images[0].height, W = images[0].width;
  Tensor t({N, C, H, W});
  for (int n = 0; n < N; ++n) {
    const ImageTensor& img = images[n];
    if (img.channels != C || img.height != H || img.width != W)
      throw ValueError("images_to_tensor: inconsistent shapes in batch");
    for (int c = 0; c < C; ++c)
      for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) t.at4(n, c, y, x) = img.at(y, x, c);
  }
  return t;
}

}  // namespace constyle
