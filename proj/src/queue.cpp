#include "constyle/queue.hpp"

#include <cmath>

namespace constyle {

NegativeQueue::NegativeQueue(int capacity, int dim) : capacity_(capacity), dim_(dim) {
  if (capacity < 1 || dim < 1) throw ValueError("NegativeQueue: capacity and dim must be >= 1");
  keys_.assign(static_cast<std::size_t>(capacity) * dim, 0.0);
}

void NegativeQueue::enqueue(const std::vector<double>& key) {
  if (static_cast<int>(key.size()) != dim_) throw ValueError("NegativeQueue: key dim mismatch");
  double sq = 0.0;
  for (double v : key) sq += v * v;
  if (std::fabs(std::sqrt(sq) - 1.0) > 1e-5)
    throw ValueError("NegativeQueue: key must be unit-norm");
  std::copy(key.begin(), key.end(), keys_.begin() + head_ * dim_);
  head_ = (head_ + 1) % capacity_;
  if (count_ < static_cast<std::size_t>(capacity_)) ++count_;
}

Tensor NegativeQueue::snapshot() const {
  if (count_ == 0) throw ValueError("NegativeQueue: snapshot of empty queue");
  Tensor t({static_cast<int>(count_), dim_});
  // Oldest entry sits at head_ once the ring has wrapped, else at 0.
  const std::size_t start = count_ == static_cast<std::size_t>(capacity_) ? head_ : 0;
  for (std::size_t i = 0; i < count_; ++i) {
    const std::size_t slot = (start + i) % capacity_;
    std::copy(keys_.begin() + slot * dim_, keys_.begin() + (slot + 1) * dim_,
              t.data.begin() + i * dim_);
  }
  return t;
}

}  // namespace constyle
