#pragma once

#include <map>
#include <string>

#include <json.hpp>

#include "constyle/tensor.hpp"

namespace constyle {

// Flat binary weight container: 8-byte magic, little-endian u64 header size,
// JSON header (name -> {shape, dtype, offset}), then raw tensor data.
// dtype is "f32" (default export precision) or "f64" (checkpoints).

struct LoadedWeights {
  std::map<std::string, Tensor> tensors;
  nlohmann::json meta;
};

void save_weights(const std::string& path, const std::map<std::string, Tensor>& tensors,
                  const nlohmann::json& meta, const std::string& dtype = "f32");

LoadedWeights load_weights(const std::string& path);

// Header-only read for `inspect`.
nlohmann::json read_weight_header(const std::string& path);

}  // namespace constyle
