#pragma once

#include <vector>

namespace rig {

/// Probability mass function on {0, 1, ..., r_max} with the mass beyond r_max
/// carried explicitly in tail.  Invariant: head_mass() + tail == 1 up to
/// numerical tolerance.
struct Pmf {
  std::vector<double> p;
  double tail = 0.0;

  int r_max() const { return static_cast<int>(p.size()) - 1; }
  double at(int r) const {
    return (r >= 0 && r < static_cast<int>(p.size())) ? p[static_cast<std::size_t>(r)] : 0.0;
  }
  double head_mass() const;
  double total() const { return head_mass() + tail; }
  /// Mean over the head only (tail excluded).
  double mean_head() const;

  static Pmf point_mass(int r, int r_max);
};

Pmf poisson_pmf(double lambda, int r_max);

/// Total variation distance; the two tails are compared as one merged bucket.
double tv_distance(const Pmf& a, const Pmf& b);

}  // namespace rig
