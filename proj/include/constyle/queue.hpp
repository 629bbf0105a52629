#pragma once

#include <vector>

#include "constyle/tensor.hpp"

namespace constyle {

// FIFO ring of unit-norm key vectors (the contrastive negatives).
class NegativeQueue {
 public:
  NegativeQueue(int capacity, int dim);

  void enqueue(const std::vector<double>& key);

  std::size_t size() const { return count_; }
  int capacity() const { return capacity_; }
  int dim() const { return dim_; }
  bool empty() const { return count_ == 0; }

  // Stored keys as a {size, dim} tensor, oldest first.
  Tensor snapshot() const;

 private:
  int capacity_;
  int dim_;
  std::vector<double> keys_;  // ring storage
  std::size_t head_ = 0;      // next write slot
  std::size_t count_ = 0;
};

}  // namespace constyle
