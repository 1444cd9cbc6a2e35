#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rig/rng.hpp"

namespace rig {

/// Thrown when a requested moment diverges.  An infinite moment is never
/// returned as a number.
class InfiniteMomentError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

enum class WeightKind { Constant, Pareto, Lognormal, DiscreteTable };

/// Nonnegative weight law for actor/item weights.  Supported families:
///   constant(c)                      point mass at c >= 0
///   pareto(alpha, xmin)              density alpha*xmin^alpha / v^(alpha+1), v >= xmin
///   lognormal(mu, sigma)             exp(mu + sigma*Z), Z standard normal
///   discrete((v1,p1),(v2,p2),...)    finite table, probabilities summing to 1
class WeightDistribution {
 public:
  static WeightDistribution constant(double c);
  static WeightDistribution pareto(double alpha, double xmin);
  static WeightDistribution lognormal(double mu, double sigma);
  static WeightDistribution discrete_table(std::vector<std::pair<double, double>> table);

  /// Parses a textual spec such as "pareto(alpha=3, xmin=1)" or "constant(1)".
  /// Positional arguments are accepted in the order shown above.
  static WeightDistribution parse(std::string_view spec);

  WeightKind kind() const { return kind_; }

  /// True when every sample is the same value (constant family).
  bool is_deterministic() const { return kind_ == WeightKind::Constant; }
  double constant_value() const;

  bool moment_finite(int k) const;

  /// k-th raw moment E V^k, k >= 1.  Throws InfiniteMomentError when it diverges.
  double moment(int k) const;

  double sample(RandomStream& rs) const;

  /// Weights for indices first..last (inclusive), drawn in ascending index
  /// order.  Identical stream state gives an identical vector.
  std::vector<double> sample_range(std::int64_t first, std::int64_t last, RandomStream& rs) const;

  const std::vector<std::pair<double, double>>& table() const { return table_; }
  double pareto_alpha() const { return p1_; }
  double pareto_xmin() const { return p2_; }
  double lognormal_mu() const { return p1_; }
  double lognormal_sigma() const { return p2_; }

  /// Canonical spec string (parses back to an equivalent distribution).
  std::string describe() const;

 private:
  WeightDistribution() = default;
  WeightKind kind_ = WeightKind::Constant;
  double p1_ = 1.0, p2_ = 0.0;
  std::vector<std::pair<double, double>> table_;
};

}  // namespace rig
