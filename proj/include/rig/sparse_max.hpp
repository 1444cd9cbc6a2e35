#pragma once

#include <cstdint>
#include <vector>

namespace rig {

/// Static range-maximum structure over a contiguous block of values indexed
/// from some first index.  Build is O(n log n); max_in is O(1).
class SparseTableMax {
 public:
  SparseTableMax() = default;

  void build(const std::vector<double>& values, std::int64_t first_index);

  bool built() const { return !levels_.empty(); }
  std::int64_t first_index() const { return first_; }
  std::int64_t last_index() const { return first_ + size_ - 1; }

  /// Maximum of values over [lo, hi]; requires first_index() <= lo <= hi <= last_index().
  double max_in(std::int64_t lo, std::int64_t hi) const;

 private:
  std::int64_t first_ = 0;
  std::int64_t size_ = 0;
  std::vector<std::vector<double>> levels_;
  std::vector<int> log2_;
};

}  // namespace rig
