#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rig/model.hpp"
#include "rig/pmf.hpp"
#include "rig/theory.hpp"

namespace rig {

inline constexpr std::uint64_t kDefaultSeed = 1729;

struct WilsonInterval {
  double lo = 0.0;
  double hi = 1.0;
};

/// Wilson score interval for a binomial proportion at the given confidence
/// level (e.g. 0.95).
WilsonInterval wilson_ci(std::int64_t successes, std::int64_t trials, double level);

struct GofResult {
  double tv = 0.0;
  double chi_square = 0.0;
  double p_value = 1.0;
  std::int64_t dof = 0;
  bool chi_square_valid = false;
};

/// Total variation between two pmfs (tails merged); when n_obs > 0, also a
/// chi-square statistic of the empirical counts p*n_obs against q over cells
/// with expected count >= 5 (smaller cells pooled with the tail).
GofResult gof_metrics(const Pmf& p, const Pmf& q, std::int64_t n_obs = 0);

/// Chi-square of observed histogram counts (index = value, overflow beyond the
/// histogram pooled by the caller into the last entry if desired) against q.
GofResult gof_counts(const std::vector<std::int64_t>& counts, std::int64_t n_obs, const Pmf& q);

/// Upper tail of the chi-square distribution with dof degrees of freedom.
double chi_square_tail(double statistic, std::int64_t dof);

// ---------------------------------------------------------------------------
// Experiment reports

struct CsvRow {
  std::string quantity;
  std::string r_or_pair;
  double estimate = 0.0;
  std::optional<double> ci_lo, ci_hi;
  std::optional<double> theory;
  std::int64_t n_rep = 0;
  std::uint64_t seed = 0;
};

struct ExperimentReport {
  std::string kind;
  nlohmann::json config;  // resolved configuration echo
  std::uint64_t seed = kDefaultSeed;
  std::int64_t n_rep = 0;
  std::int64_t n_completed = 0;
  int threads = 1;
  bool truncated = false;
  double duration_seconds = 0.0;  // serialized separately, never into report.json
  std::vector<std::string> warnings;
  nlohmann::json estimates = nlohmann::json::object();
  nlohmann::json theory = nlohmann::json::object();
  nlohmann::json distances = nlohmann::json::object();
  std::vector<CsvRow> rows;
};

/// Deterministic report body (duration excluded; identical runs give
/// identical bytes).
std::string report_to_json(const ExperimentReport& report);
/// Runtime metadata sidecar (duration, threads actually used).
std::string runtime_to_json(const ExperimentReport& report);
/// Flat table: config echo as leading # lines, then
/// quantity,r_or_pair,estimate,ci_lo,ci_hi,theory,n_rep,seed.
std::string report_to_csv(const ExperimentReport& report);

// ---------------------------------------------------------------------------
// Monte Carlo experiments

/// Weight inputs: distributions (fresh draw per replicate) or fixed realized
/// vectors.  Fixed vectors take precedence when both are given.
struct WeightSetup {
  std::optional<WeightDistribution> x_dist, y_dist;
  std::optional<WeightVector> x_fixed, y_fixed;

  bool deterministic() const;
  /// Realized x over [lo, hi]: the fixed vector, a constant fill, or a fresh draw.
  WeightVector realize_x(std::int64_t lo, std::int64_t hi, RandomStream& rs) const;
  WeightVector realize_y(std::int64_t lo, std::int64_t hi, RandomStream& rs) const;
  /// Moment E X^k / E Y^k when available (fixed vectors have no law).
  std::optional<double> x_moment(int k, std::string* warn) const;
  std::optional<double> y_moment(int k, std::string* warn) const;
};

struct McOptions {
  std::int64_t n_rep = 0;
  std::uint64_t seed = kDefaultSeed;
  int threads = 0;  // 0 = all available
  double budget_seconds = 0.0;
  int r_max = 48;
};

/// Empirical law of d(v_t) over fresh local realizations; compares against
/// the exact path-count law (deterministic weights) and the limit law.
ExperimentReport mc_degree_distribution(const ModelParams& params, const WeightSetup& weights,
                                        std::int64_t t, const McOptions& opt);

/// Triangle closure rates for s < t < u.  Deterministic weights: single exact
/// computation.  Random weights: averages the exact conditional probabilities
/// over weight draws (the link indicators are never sampled).
ExperimentReport mc_clustering(const ModelParams& params, const WeightSetup& weights,
                               std::int64_t s, std::int64_t t, std::int64_t u,
                               const McOptions& opt);

/// Degree correlation of the adjacent pair (s, t) by staged conditional
/// sampling: a cheap shared-witness stage accepts a replicate, whose partial
/// realization is then extended to the two-hop neighborhood.
ExperimentReport mc_assortativity(const ModelParams& params, const WeightSetup& weights,
                                  std::int64_t s, std::int64_t t, const McOptions& opt);

}  // namespace rig
