#include "rig/model.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace rig {

namespace {

constexpr double kIndexTol = 1e-9;
// Window bounds past this are unusable as 64-bit indices; the bound
// comparisons below saturate instead of converting.
constexpr double kIndexCap = 4.0e18;
constexpr std::int64_t kActorCap = std::int64_t{1} << 61;

}  // namespace

IndexInterval intersect(const IndexInterval& p, const IndexInterval& q) {
  return {std::max(p.lo, q.lo), std::min(p.hi, q.hi)};
}

void ModelParams::validate() const {
  if (!(a > 0.0) || !(a < b) || !std::isfinite(b))
    throw std::invalid_argument("model parameters require 0 < a < b");
  if (tau.kind == TauKind::Power && !(tau.nu > 1.0))
    throw std::invalid_argument("power schedule requires nu > 1");
}

std::int64_t ceil_index(double v) {
  const double c = std::ceil(v - kIndexTol * std::max(1.0, std::abs(v)));
  if (!(std::abs(c) < kIndexCap)) throw std::overflow_error("index bound exceeds 64-bit range");
  return static_cast<std::int64_t>(c);
}

std::int64_t floor_index(double v) {
  const double f = std::floor(v + kIndexTol * std::max(1.0, std::abs(v)));
  if (!(std::abs(f) < kIndexCap)) throw std::overflow_error("index bound exceeds 64-bit range");
  return static_cast<std::int64_t>(f);
}

IndexInterval item_window(const ModelParams& params, std::int64_t actor) {
  if (actor < 1) throw std::invalid_argument("actor index must be >= 1");
  const double tv = params.tau(actor);
  const double lo_v = params.a * tv;
  const double hi_v = params.b * tv;
  if (!(hi_v < kIndexCap)) throw std::overflow_error("item window exceeds 64-bit range");
  IndexInterval w;
  w.lo = std::max<std::int64_t>(1, ceil_index(lo_v));
  w.hi = floor_index(hi_v);
  return w;
}

namespace {

// One-sided window-membership predicates, evaluated without materializing the
// (possibly astronomically large) window bounds.  They agree bit-for-bit with
// item_window where that is representable, which makes the window duality
//   j in actor_window(i)  <=>  i in item_window(j)
// hold by construction.
bool window_lo_leq(const ModelParams& params, std::int64_t j, std::int64_t i) {
  const double v = params.a * params.tau(j);
  if (!(v < kIndexCap)) return false;
  return std::max<std::int64_t>(1, ceil_index(v)) <= i;
}

bool window_hi_geq(const ModelParams& params, std::int64_t j, std::int64_t i) {
  const double v = params.b * params.tau(j);
  if (!(v < kIndexCap)) return true;
  return floor_index(v) >= i;
}

// Smallest j >= 1 with pred(j), for nondecreasing pred; kActorCap when none.
template <class Pred>
std::int64_t first_actor_with(Pred&& pred) {
  if (pred(std::int64_t{1})) return 1;
  std::int64_t lo = 1, hi = 2;
  while (!pred(hi)) {
    lo = hi;
    if (hi >= kActorCap) return kActorCap;
    hi *= 2;
  }
  while (hi - lo > 1) {
    const std::int64_t mid = lo + (hi - lo) / 2;
    (pred(mid) ? hi : lo) = mid;
  }
  return hi;
}

// Largest j >= 1 with pred(j), for nonincreasing pred; 0 when pred(1) fails.
template <class Pred>
std::int64_t last_actor_with(Pred&& pred) {
  if (!pred(std::int64_t{1})) return 0;
  std::int64_t lo = 1, hi = 2;
  while (pred(hi)) {
    lo = hi;
    if (hi >= kActorCap) return kActorCap;
    hi *= 2;
  }
  while (hi - lo > 1) {
    const std::int64_t mid = lo + (hi - lo) / 2;
    (pred(mid) ? lo : hi) = mid;
  }
  return lo;
}

}  // namespace

IndexInterval actor_window(const ModelParams& params, std::int64_t item,
                           std::int64_t actor_horizon) {
  if (item < 1) throw std::invalid_argument("item index must be >= 1");
  IndexInterval w;
  w.lo = first_actor_with([&](std::int64_t j) { return window_hi_geq(params, j, item); });
  w.hi = last_actor_with([&](std::int64_t j) { return window_lo_leq(params, j, item); });
  w.hi = std::min(w.hi, actor_horizon);
  if (w.lo > w.hi) return {1, 0};
  return w;
}

std::int64_t oldest_overlapping_actor(const ModelParams& params, std::int64_t t) {
  const IndexInterval wt = item_window(params, t);
  if (wt.empty()) throw std::invalid_argument("actor has an empty item window");
  std::int64_t j = first_actor_with([&](std::int64_t q) { return window_hi_geq(params, q, wt.lo); });
  while (j <= t && intersect(item_window(params, j), wt).empty()) ++j;
  return j;
}

std::int64_t youngest_overlapping_actor(const ModelParams& params, std::int64_t t) {
  const IndexInterval wt = item_window(params, t);
  if (wt.empty()) throw std::invalid_argument("actor has an empty item window");
  std::int64_t j = last_actor_with([&](std::int64_t q) { return window_lo_leq(params, q, wt.hi); });
  while (j >= t && intersect(item_window(params, j), wt).empty()) --j;
  return j;
}

double edge_probability(const ModelParams& params, double x_i, double y_j, std::int64_t i,
                        std::int64_t j) {
  if (i < 1 || j < 1) throw std::invalid_argument("indices must be >= 1");
  if (!(x_i >= 0.0) || !(y_j >= 0.0)) throw std::invalid_argument("weights must be >= 0");
  if (!item_window(params, j).contains(i)) return 0.0;
  return edge_probability_in_window(x_i, y_j, i, j);
}

// ---------------------------------------------------------------------------
// Weight containers

WeightVector WeightVector::constant(double value, std::int64_t lo, std::int64_t hi) {
  WeightVector v;
  v.first = lo;
  if (hi >= lo) v.values.assign(static_cast<std::size_t>(hi - lo + 1), value);
  return v;
}

WeightVector WeightVector::draw(const WeightDistribution& dist, std::int64_t lo, std::int64_t hi,
                                RandomStream& rs) {
  WeightVector v;
  v.first = lo;
  v.values = dist.sample_range(lo, hi, rs);
  return v;
}

WeightField WeightField::constant(double value) {
  WeightField f;
  f.constant_ = true;
  f.value_ = value;
  return f;
}

WeightField WeightField::realized(WeightVector vec) {
  WeightField f;
  f.constant_ = false;
  f.vec_ = std::move(vec);
  f.table_.build(f.vec_.values, f.vec_.first);
  return f;
}

// ---------------------------------------------------------------------------
// Full generation

GenBackend parse_backend(std::string_view name) {
  if (name == "naive") return GenBackend::Naive;
  if (name == "envelope-skip") return GenBackend::EnvelopeSkip;
  throw std::invalid_argument("unknown backend '" + std::string(name) +
                              "' (expected naive|envelope-skip)");
}

std::string backend_name(GenBackend backend) {
  return backend == GenBackend::Naive ? "naive" : "envelope-skip";
}

BipartiteGraph generate_bipartite(const ModelParams& params, const WeightVector& x,
                                  const WeightVector& y, std::int64_t t_max, GenBackend backend,
                                  RandomStream& rs) {
  params.validate();
  if (t_max < 1) throw std::invalid_argument("t_max must be >= 1");

  std::int64_t item_horizon = 0;
  for (std::int64_t j = 1; j <= t_max; ++j) {
    const IndexInterval w = item_window(params, j);
    if (!w.empty()) item_horizon = std::max(item_horizon, w.hi);
  }
  if (item_horizon > (std::int64_t{1} << 31))
    throw std::invalid_argument("item horizon too large for full generation; use local sampling");
  if (item_horizon > 0 && !x.covers(1, item_horizon))
    throw std::invalid_argument("x weights must cover items 1..item_horizon");
  if (!y.covers(1, t_max)) throw std::invalid_argument("y weights must cover actors 1..t_max");

  BipartiteGraph g;
  g.actor_horizon = t_max;
  g.item_horizon = item_horizon;
  g.items_of_actor.resize(static_cast<std::size_t>(t_max) + 1);
  g.actors_of_item.resize(static_cast<std::size_t>(item_horizon) + 1);

  WeightField xf;
  if (backend == GenBackend::EnvelopeSkip) xf = WeightField::realized(x);

  for (std::int64_t j = 1; j <= t_max; ++j) {
    const IndexInterval w = item_window(params, j);
    if (w.empty()) continue;
    const double yj = y.at(j);
    auto add = [&](std::int64_t i) {
      g.items_of_actor[static_cast<std::size_t>(j)].push_back(i);
      g.actors_of_item[static_cast<std::size_t>(i)].push_back(j);
      ++g.edge_count;
    };
    auto prob = [&](std::int64_t i) { return edge_probability_in_window(x.at(i), yj, i, j); };
    if (backend == GenBackend::Naive) {
      scan_sample_interval(w.lo, w.hi, prob, rs, add);
    } else {
      const double coef = yj / std::sqrt(static_cast<double>(j));
      skip_sample_interval(xf, w.lo, w.hi, ScaledEnvelope{coef}, prob, rs, add);
    }
  }
  return g;
}

std::int64_t intersection_degree(const BipartiteGraph& g, std::int64_t t) {
  if (t < 1 || t > g.actor_horizon) throw std::out_of_range("actor index out of range");
  std::vector<std::int64_t> buf;
  for (const std::int64_t i : g.items_of_actor[static_cast<std::size_t>(t)])
    for (const std::int64_t j : g.actors_of_item[static_cast<std::size_t>(i)])
      if (j != t) buf.push_back(j);
  std::sort(buf.begin(), buf.end());
  buf.erase(std::unique(buf.begin(), buf.end()), buf.end());
  return static_cast<std::int64_t>(buf.size());
}

bool are_adjacent(const BipartiteGraph& g, std::int64_t s, std::int64_t t) {
  if (s < 1 || s > g.actor_horizon || t < 1 || t > g.actor_horizon)
    throw std::out_of_range("actor index out of range");
  const auto& is = g.items_of_actor[static_cast<std::size_t>(s)];
  const auto& it = g.items_of_actor[static_cast<std::size_t>(t)];
  std::size_t p = 0, q = 0;
  while (p < is.size() && q < it.size()) {
    if (is[p] == it[q]) return true;
    if (is[p] < it[q])
      ++p;
    else
      ++q;
  }
  return false;
}

void write_edge_list(std::ostream& os, const BipartiteGraph& g, const ModelParams& params,
                     const std::string& x_spec, const std::string& y_spec, std::uint64_t seed,
                     GenBackend backend) {
  const auto prec = os.precision(17);
  os << "# a = " << params.a << "\n";
  os << "# b = " << params.b << "\n";
  os << "# tau = " << params.tau.name() << "\n";
  if (params.tau.kind == TauKind::Power) os << "# nu = " << params.tau.nu << "\n";
  os << "# x_dist = " << x_spec << "\n";
  os << "# y_dist = " << y_spec << "\n";
  os << "# seed = " << seed << "\n";
  os << "# t_max = " << g.actor_horizon << "\n";
  os << "# backend = " << backend_name(backend) << "\n";
  for (std::int64_t i = 1; i <= g.item_horizon; ++i)
    for (const std::int64_t j : g.actors_of_item[static_cast<std::size_t>(i)])
      os << i << '\t' << j << '\n';
  os.precision(prec);
}

// ---------------------------------------------------------------------------
// Local realization

LocalSubgraph local_subgraph(const ModelParams& params, const WeightField& x,
                             const WeightField& y, const std::vector<std::int64_t>& focus,
                             RandomStream& rs) {
  params.validate();
  if (focus.empty()) throw std::invalid_argument("focus set must not be empty");

  LocalSubgraph g;
  g.focus = focus;
  std::sort(g.focus.begin(), g.focus.end());
  g.focus.erase(std::unique(g.focus.begin(), g.focus.end()), g.focus.end());
  if (g.focus.front() < 1) throw std::invalid_argument("focus actors must be >= 1");

  // Merged union of the focus actors' item windows.
  std::vector<IndexInterval> spans;
  for (const std::int64_t t : g.focus) {
    const IndexInterval w = item_window(params, t);
    if (!w.empty()) spans.push_back(w);
  }
  if (spans.empty()) return g;
  std::sort(spans.begin(), spans.end(),
            [](const IndexInterval& p, const IndexInterval& q) { return p.lo < q.lo; });
  std::vector<IndexInterval> merged{spans.front()};
  for (std::size_t k = 1; k < spans.size(); ++k) {
    if (spans[k].lo <= merged.back().hi + 1)
      merged.back().hi = std::max(merged.back().hi, spans[k].hi);
    else
      merged.push_back(spans[k]);
  }

  g.item_lo = merged.front().lo;
  g.item_hi = merged.back().hi;
  g.actors_of_item.assign(static_cast<std::size_t>(g.item_hi - g.item_lo + 1), {});

  for (const IndexInterval& span : merged) {
    for (std::int64_t i = span.lo; i <= span.hi; ++i) {
      const IndexInterval aw = actor_window(params, i);
      if (aw.empty()) continue;
      const double xi = x.at(i);
      const double coef = xi / std::sqrt(static_cast<double>(i));
      auto& list = g.actors_of_item[static_cast<std::size_t>(i - g.item_lo)];
      skip_sample_interval(
          y, aw.lo, aw.hi, ScaledEnvelope{coef},
          [&](std::int64_t j) { return edge_probability_in_window(xi, y.at(j), i, j); }, rs,
          [&](std::int64_t j) { list.push_back(j); });
    }
  }
  return g;
}

std::int64_t local_degree(const ModelParams& params, const LocalSubgraph& g, std::int64_t t) {
  const IndexInterval w = item_window(params, t);
  if (w.empty() || g.actors_of_item.empty()) return 0;
  if (w.lo < g.item_lo || w.hi > g.item_hi)
    throw std::invalid_argument("actor window not covered by the local realization");
  std::vector<std::int64_t> buf;
  for (std::int64_t i = w.lo; i <= w.hi; ++i) {
    const auto& list = g.actors(i);
    if (!std::binary_search(list.begin(), list.end(), t)) continue;
    for (const std::int64_t j : list)
      if (j != t) buf.push_back(j);
  }
  std::sort(buf.begin(), buf.end());
  buf.erase(std::unique(buf.begin(), buf.end()), buf.end());
  return static_cast<std::int64_t>(buf.size());
}

bool local_adjacent(const ModelParams& params, const LocalSubgraph& g, std::int64_t s,
                    std::int64_t t) {
  const IndexInterval shared = intersect(item_window(params, s), item_window(params, t));
  if (shared.empty() || g.actors_of_item.empty()) return false;
  if (shared.lo < g.item_lo || shared.hi > g.item_hi)
    throw std::invalid_argument("shared window not covered by the local realization");
  for (std::int64_t i = shared.lo; i <= shared.hi; ++i) {
    const auto& list = g.actors(i);
    if (std::binary_search(list.begin(), list.end(), s) &&
        std::binary_search(list.begin(), list.end(), t))
      return true;
  }
  return false;
}

std::int64_t sample_vertex_degree(const ModelParams& params, const WeightField& x,
                                  const WeightField& y, std::int64_t t, RandomStream& rs,
                                  std::vector<std::int64_t>& scratch) {
  const IndexInterval w = item_window(params, t);
  if (w.empty()) return 0;
  const double yt = y.at(t);

  thread_local std::vector<std::int64_t> hits;
  hits.clear();
  scratch.clear();

  const double coef1 = yt / std::sqrt(static_cast<double>(t));
  skip_sample_interval(
      x, w.lo, w.hi, ScaledEnvelope{coef1},
      [&](std::int64_t i) { return edge_probability_in_window(x.at(i), yt, i, t); }, rs,
      [&](std::int64_t i) { hits.push_back(i); });

  for (const std::int64_t i : hits) {
    const IndexInterval aw = actor_window(params, i);
    if (aw.empty()) continue;
    const double xi = x.at(i);
    const double coef2 = xi / std::sqrt(static_cast<double>(i));
    skip_sample_interval(
        y, aw.lo, aw.hi, ScaledEnvelope{coef2},
        [&](std::int64_t j) { return edge_probability_in_window(xi, y.at(j), i, j); }, rs,
        [&](std::int64_t j) {
          if (j != t) scratch.push_back(j);
        });
  }
  std::sort(scratch.begin(), scratch.end());
  scratch.erase(std::unique(scratch.begin(), scratch.end()), scratch.end());
  return static_cast<std::int64_t>(scratch.size());
}

}  // namespace rig
