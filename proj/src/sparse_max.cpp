#include "rig/sparse_max.hpp"

#include <algorithm>
#include <cassert>

namespace rig {

void SparseTableMax::build(const std::vector<double>& values, std::int64_t first_index) {
  first_ = first_index;
  size_ = static_cast<std::int64_t>(values.size());
  levels_.clear();
  log2_.assign(static_cast<std::size_t>(size_) + 1, 0);
  for (std::size_t n = 2; n < log2_.size(); ++n) log2_[n] = log2_[n / 2] + 1;
  if (size_ == 0) return;

  levels_.push_back(values);
  for (int k = 1; (std::int64_t{1} << k) <= size_; ++k) {
    const std::int64_t half = std::int64_t{1} << (k - 1);
    const std::int64_t n = size_ - (std::int64_t{1} << k) + 1;
    std::vector<double> level(static_cast<std::size_t>(n));
    const auto& prev = levels_.back();
    for (std::int64_t i = 0; i < n; ++i)
      level[static_cast<std::size_t>(i)] =
          std::max(prev[static_cast<std::size_t>(i)], prev[static_cast<std::size_t>(i + half)]);
    levels_.push_back(std::move(level));
  }
}

double SparseTableMax::max_in(std::int64_t lo, std::int64_t hi) const {
  assert(lo >= first_ && hi <= last_index() && lo <= hi);
  const std::int64_t l = lo - first_;
  const std::int64_t r = hi - first_;
  const int k = log2_[static_cast<std::size_t>(r - l + 1)];
  const auto& level = levels_[static_cast<std::size_t>(k)];
  return std::max(level[static_cast<std::size_t>(l)],
                  level[static_cast<std::size_t>(r - (std::int64_t{1} << k) + 1)]);
}

}  // namespace rig
