#pragma once

#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rig/rng.hpp"
#include "rig/sparse_max.hpp"
#include "rig/tau.hpp"
#include "rig/weights.hpp"

namespace rig {

/// Closed integer interval; empty when lo > hi.
struct IndexInterval {
  std::int64_t lo = 1;
  std::int64_t hi = 0;
  bool empty() const { return lo > hi; }
  std::int64_t size() const { return empty() ? 0 : hi - lo + 1; }
  bool contains(std::int64_t i) const { return i >= lo && i <= hi; }
};

IndexInterval intersect(const IndexInterval& p, const IndexInterval& q);

/// Model parameters: window factors 0 < a < b and the schedule tau.
struct ModelParams {
  double a = 1.0;
  double b = 4.0;
  TauFunction tau = TauFunction::linear();

  void validate() const;
};

/// Smallest integer >= v, treating values within 1e-9 relative slack of an
/// integer as that integer (boundary ties are inclusive).
std::int64_t ceil_index(double v);
/// Largest integer <= v with the same inclusive tie handling.
std::int64_t floor_index(double v);

/// Item lifetime window of actor j: integer i with a*tau(j) <= i <= b*tau(j),
/// clamped to item indices >= 1.
IndexInterval item_window(const ModelParams& params, std::int64_t actor);

/// Actors whose item window contains item i, capped at actor_horizon.
/// Dual of item_window: j is in actor_window(i) iff i is in item_window(j).
IndexInterval actor_window(const ModelParams& params, std::int64_t item,
                           std::int64_t actor_horizon = std::int64_t{1} << 62);

/// Earliest actor whose window intersects actor t's window.
std::int64_t oldest_overlapping_actor(const ModelParams& params, std::int64_t t);
/// Latest actor whose window intersects actor t's window.
std::int64_t youngest_overlapping_actor(const ModelParams& params, std::int64_t t);

/// min(1, x_i * y_j / sqrt(i*j)); the window indicator is NOT applied.
inline double edge_probability_in_window(double x_i, double y_j, std::int64_t i, std::int64_t j) {
  const double lam = x_i * y_j / std::sqrt(static_cast<double>(i) * static_cast<double>(j));
  return lam < 1.0 ? lam : 1.0;
}

/// Full link probability of item i and actor j, including the lifetime
/// indicator: 0 whenever i lies outside actor j's item window.
double edge_probability(const ModelParams& params, double x_i, double y_j,
                        std::int64_t i, std::int64_t j);

// ---------------------------------------------------------------------------
// Weight access

/// Realized weights for a contiguous index range.
struct WeightVector {
  std::int64_t first = 1;
  std::vector<double> values;

  std::int64_t last() const { return first + static_cast<std::int64_t>(values.size()) - 1; }
  bool covers(std::int64_t lo, std::int64_t hi) const { return lo >= first && hi <= last(); }
  double at(std::int64_t i) const { return values[static_cast<std::size_t>(i - first)]; }

  static WeightVector constant(double value, std::int64_t lo, std::int64_t hi);
  static WeightVector draw(const WeightDistribution& dist, std::int64_t lo, std::int64_t hi,
                           RandomStream& rs);
};

/// Weight lookup used by the samplers: either a constant (O(1), no storage)
/// or a realized vector with a range-max table for envelope bounds.
class WeightField {
 public:
  static WeightField constant(double value);
  static WeightField realized(WeightVector vec);

  bool is_constant() const { return constant_; }
  double constant_value() const { return value_; }

  double at(std::int64_t i) const { return constant_ ? value_ : vec_.at(i); }

  double range_max(std::int64_t lo, std::int64_t hi) const {
    return constant_ ? value_ : table_.max_in(lo, hi);
  }

  const WeightVector& vector() const { return vec_; }

 private:
  bool constant_ = true;
  double value_ = 0.0;
  WeightVector vec_;
  SparseTableMax table_;
};

// ---------------------------------------------------------------------------
// Edge sampling kernels
//
// Both kernels realize independent Bernoulli(prob(i)) indicators over an index
// interval and invoke sink(i) for every success.  scan_sample_interval is the
// plain reference: one uniform per index.  skip_sample_interval partitions the
// interval into doubling blocks [s, min(hi, 2s-1)], bounds prob on each block
// by envelope(block_lo, field max over block), jumps between candidate indices
// with geometric skips under that bound, and thins candidates by
// prob(i)/bound.  The two kernels sample the same joint law; only the stream
// consumption differs.
//
// Requirement: prob(i) <= envelope(block_lo, w.range_max(block)) for every i
// in the block (block_lo <= i, block spans less than a factor 2 in index).

template <class ProbFn, class Sink>
void scan_sample_interval(std::int64_t lo, std::int64_t hi, ProbFn&& prob, RandomStream& rs,
                          Sink&& sink) {
  for (std::int64_t i = lo; i <= hi; ++i) {
    if (rs.uniform() < prob(i)) sink(i);
  }
}

template <class EnvelopeFn, class ProbFn, class Sink>
void skip_sample_interval(const WeightField& w, std::int64_t lo, std::int64_t hi,
                          EnvelopeFn&& envelope, ProbFn&& prob, RandomStream& rs, Sink&& sink) {
  std::int64_t s = lo;
  while (s <= hi) {
    const std::int64_t e = std::min(hi, 2 * s - 1);
    const double bound = envelope(s, w.range_max(s, e));
    if (bound > 0.0) {
      std::int64_t pos = s;
      while (pos <= e) {
        const std::int64_t k = rs.geometric_skips(bound);
        if (k > e - pos) break;
        pos += k;
        // uniform()*bound < prob is the thinning accept; exact when prob == bound.
        if (rs.uniform() * bound < prob(pos)) sink(pos);
        ++pos;
      }
    }
    s = e + 1;
  }
}

/// Envelope for probabilities of the form min(1, coef * w_i / sqrt(i)).
struct ScaledEnvelope {
  double coef;
  double operator()(std::int64_t block_lo, double wmax) const {
    const double q = coef * wmax / std::sqrt(static_cast<double>(block_lo));
    return q < 1.0 ? q : 1.0;
  }
};

// ---------------------------------------------------------------------------
// Bipartite realization

enum class GenBackend { Naive, EnvelopeSkip };

GenBackend parse_backend(std::string_view name);
std::string backend_name(GenBackend backend);

/// Realized actor/item bipartite graph up to an actor horizon.  Adjacency is
/// stored from both sides; lists are sorted ascending.
struct BipartiteGraph {
  std::int64_t actor_horizon = 0;
  std::int64_t item_horizon = 0;
  std::vector<std::vector<std::int64_t>> items_of_actor;  // index 1..actor_horizon
  std::vector<std::vector<std::int64_t>> actors_of_item;  // index 1..item_horizon
  std::int64_t edge_count = 0;
};

/// Samples every potential link (i, j) for actors j = 1..t_max and items i in
/// actor j's window.  x must cover items 1..floor(b*tau(t_max)), y must cover
/// actors 1..t_max.
BipartiteGraph generate_bipartite(const ModelParams& params, const WeightVector& x,
                                  const WeightVector& y, std::int64_t t_max, GenBackend backend,
                                  RandomStream& rs);

/// Number of distinct actors sharing at least one item with actor t.
std::int64_t intersection_degree(const BipartiteGraph& g, std::int64_t t);

/// True when actors s and t share at least one item.
bool are_adjacent(const BipartiteGraph& g, std::int64_t s, std::int64_t t);

/// Writes "# key = value" header lines (model parameters, weight specs, seed,
/// horizon, backend) followed by one "i<TAB>j" line per edge, sorted by item
/// then actor.
void write_edge_list(std::ostream& os, const BipartiteGraph& g, const ModelParams& params,
                     const std::string& x_spec, const std::string& y_spec, std::uint64_t seed,
                     GenBackend backend);

// ---------------------------------------------------------------------------
// Local realization around focus actors

/// Partial realization holding, for every item in the union of the focus
/// actors' windows, the complete sampled actor list of that item.  Statistics
/// measurable with respect to this edge set have the same law as under full
/// generation.
struct LocalSubgraph {
  std::int64_t item_lo = 1;
  std::int64_t item_hi = 0;
  std::vector<std::int64_t> focus;
  std::vector<std::vector<std::int64_t>> actors_of_item;  // index i - item_lo

  bool covers_item(std::int64_t i) const { return i >= item_lo && i <= item_hi; }
  const std::vector<std::int64_t>& actors(std::int64_t i) const {
    return actors_of_item[static_cast<std::size_t>(i - item_lo)];
  }
};

/// Samples exactly the links incident to items in the union of the focus
/// actors' windows (for those items, all actors in their windows; the actor
/// side is unbounded).  x must cover the union item range; y must cover every
/// actor window of those items.
LocalSubgraph local_subgraph(const ModelParams& params, const WeightField& x,
                             const WeightField& y, const std::vector<std::int64_t>& focus,
                             RandomStream& rs);

/// Degree of a focus actor inside a local realization.
std::int64_t local_degree(const ModelParams& params, const LocalSubgraph& g, std::int64_t t);

/// True when two focus actors share an item of the local realization.
bool local_adjacent(const ModelParams& params, const LocalSubgraph& g, std::int64_t s,
                    std::int64_t t);

/// Draws d(v_t) with the law it has under local_subgraph/full generation,
/// materializing second-hop links only for items actually linked to t.
/// scratch is reused between calls to avoid churn.
std::int64_t sample_vertex_degree(const ModelParams& params, const WeightField& x,
                                  const WeightField& y, std::int64_t t, RandomStream& rs,
                                  std::vector<std::int64_t>& scratch);

}  // namespace rig
