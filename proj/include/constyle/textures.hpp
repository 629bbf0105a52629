#pragma once

#include <vector>

#include "constyle/image.hpp"
#include "constyle/rng.hpp"

namespace constyle {

struct LabeledImage {
  ImageTensor image;
  int label = 0;
};

// Procedural 10-class texture generator used as the desk-scale pre-training
// corpus. Classes differ in structure (stripe orientation, checkers, dots,
// rings, gradients, plaid, mosaics); per-sample parameters vary freely.
class ToyTextureDataset {
 public:
  explicit ToyTextureDataset(int image_size = 32);

  int num_classes() const { return 10; }
  int image_size() const { return size_; }

  LabeledImage sample(Rng& rng) const;
  ImageTensor render(int label, Rng& rng) const;

  std::vector<LabeledImage> sample_many(std::size_t count, std::uint64_t seed) const;

 private:
  int size_;
};

}  // namespace constyle
