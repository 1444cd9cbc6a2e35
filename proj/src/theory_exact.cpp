#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "rig/theory.hpp"

namespace rig {

namespace {

// In-place multiply of a truncated coefficient vector by ((1-p) + p z).
// All coefficients are nonnegative, so truncation only moves mass past the
// head; the kept coefficients stay exact.
void mul_linear_factor(std::vector<double>& c, double p) {
  const double q = 1.0 - p;
  for (std::size_t k = c.size() - 1; k > 0; --k) c[k] = c[k] * q + c[k - 1] * p;
  c[0] *= q;
}

void check_actor_coverage(const WeightVector& y, std::int64_t lo, std::int64_t hi) {
  if (!y.covers(lo, hi))
    throw std::invalid_argument("y weights must cover the overlapping actor range");
}

}  // namespace

Pmf exact_path2_pmf(const ModelParams& params, const WeightVector& x, const WeightVector& y,
                    std::int64_t t, int r_max) {
  params.validate();
  if (t < 1) throw std::invalid_argument("actor index must be >= 1");
  if (r_max < 0) throw std::invalid_argument("r_max must be >= 0");

  const IndexInterval w = item_window(params, t);
  if (w.empty()) return Pmf::point_mass(0, r_max);
  if (!x.covers(w.lo, w.hi))
    throw std::invalid_argument("x weights must cover the item window");
  check_actor_coverage(y, oldest_overlapping_actor(params, t),
                       youngest_overlapping_actor(params, t));
  const double yt = y.at(t);

  // Per-item factor (1 - p_it) + p_it * prod_{j in T*_i \ {t}} ((1-p_ij) + p_ij z),
  // truncated to r_max + 1 coefficients.  Factors are independent, so they are
  // built in parallel and folded in index order (deterministic combine).
  const std::size_t n_items = static_cast<std::size_t>(w.hi - w.lo + 1);
  const std::size_t width = static_cast<std::size_t>(r_max) + 1;
  std::vector<std::vector<double>> factors(n_items);

#pragma omp parallel for schedule(dynamic, 16)
  for (std::int64_t idx = 0; idx < static_cast<std::int64_t>(n_items); ++idx) {
    const std::int64_t i = w.lo + idx;
    const double xi = x.at(i);
    const double p_it = edge_probability_in_window(xi, yt, i, t);
    std::vector<double> inner(width, 0.0);
    inner[0] = 1.0;
    const IndexInterval aw = actor_window(params, i);
    for (std::int64_t j = aw.lo; j <= aw.hi; ++j) {
      if (j == t) continue;
      const double p = edge_probability_in_window(xi, y.at(j), i, j);
      if (p > 0.0) mul_linear_factor(inner, p);
    }
    std::vector<double> f(width);
    for (std::size_t k = 0; k < width; ++k) f[k] = p_it * inner[k];
    f[0] += 1.0 - p_it;
    factors[static_cast<std::size_t>(idx)] = std::move(f);
  }

  std::vector<double> cur(width, 0.0), next(width, 0.0);
  cur[0] = 1.0;
  for (const auto& f : factors) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t k = 0; k < width; ++k) {
      if (cur[k] == 0.0) continue;
      for (std::size_t l = 0; l + k < width; ++l) next[k + l] += cur[k] * f[l];
    }
    cur.swap(next);
  }

  Pmf out;
  out.p = std::move(cur);
  out.tail = std::max(0.0, 1.0 - out.head_mass());
  return out;
}

double exact_path2_mean(const ModelParams& params, const WeightVector& x, const WeightVector& y,
                        std::int64_t t) {
  params.validate();
  const IndexInterval w = item_window(params, t);
  if (w.empty()) return 0.0;
  if (!x.covers(w.lo, w.hi))
    throw std::invalid_argument("x weights must cover the item window");
  check_actor_coverage(y, oldest_overlapping_actor(params, t),
                       youngest_overlapping_actor(params, t));
  const double yt = y.at(t);
  double mean = 0.0;
  for (std::int64_t i = w.lo; i <= w.hi; ++i) {
    const double xi = x.at(i);
    const double p_it = edge_probability_in_window(xi, yt, i, t);
    if (p_it == 0.0) continue;
    const IndexInterval aw = actor_window(params, i);
    double second = 0.0;
    for (std::int64_t j = aw.lo; j <= aw.hi; ++j) {
      if (j == t) continue;
      second += edge_probability_in_window(xi, y.at(j), i, j);
    }
    mean += p_it * second;
  }
  return mean;
}

double exact_pair_prob_xy(const ModelParams& params, const WeightVector& x, double y_s,
                          double y_t, std::int64_t s, std::int64_t t) {
  params.validate();
  if (s < 1 || t < 1 || s == t) throw std::invalid_argument("pair indices must be distinct and >= 1");
  const IndexInterval shared = intersect(item_window(params, s), item_window(params, t));
  if (shared.empty()) return 0.0;
  if (!x.covers(shared.lo, shared.hi))
    throw std::invalid_argument("x weights must cover the shared item window");
  double log_miss = 0.0;
  for (std::int64_t k = shared.lo; k <= shared.hi; ++k) {
    const double xk = x.at(k);
    const double both = edge_probability_in_window(xk, y_s, k, s) *
                        edge_probability_in_window(xk, y_t, k, t);
    log_miss += std::log1p(-both);
  }
  return -std::expm1(log_miss);
}

double exact_pair_prob(const ModelParams& params, const WeightVector& x, const WeightVector& y,
                       std::int64_t s, std::int64_t t) {
  if (!y.covers(std::min(s, t), std::min(s, t)) || !y.covers(std::max(s, t), std::max(s, t)))
    throw std::invalid_argument("y weights must cover both actors");
  return exact_pair_prob_xy(params, x, y.at(s), y.at(t), s, t);
}

TripleProbs exact_triple_probs_xy(const ModelParams& params, const WeightVector& x, double y_s,
                                  double y_t, double y_u, std::int64_t s, std::int64_t t,
                                  std::int64_t u) {
  params.validate();
  if (!(1 <= s && s < t && t < u)) throw std::invalid_argument("triple requires 1 <= s < t < u");

  const IndexInterval ws = item_window(params, s);
  const IndexInterval wt = item_window(params, t);
  const IndexInterval wu = item_window(params, u);
  // Items outside every pairwise window overlap contribute factor 1 to all
  // subset products, so scanning the hull of the overlaps is exact.
  IndexInterval hull{std::int64_t{1} << 62, 0};
  for (const IndexInterval& o :
       {intersect(ws, wt), intersect(ws, wu), intersect(wt, wu)}) {
    if (o.empty()) continue;
    hull.lo = std::min(hull.lo, o.lo);
    hull.hi = std::max(hull.hi, o.hi);
  }
  TripleProbs res;
  if (hull.lo > hull.hi) return res;
  if (!x.covers(hull.lo, hull.hi))
    throw std::invalid_argument("x weights must cover the shared item windows");

  // log N(S) for the eight subsets S of {st, su, tu}: probability that no
  // pair event of S is witnessed by any item.  Bit order: 1 = st, 2 = su, 4 = tu.
  double log_n[8] = {0, 0, 0, 0, 0, 0, 0, 0};
  for (std::int64_t k = hull.lo; k <= hull.hi; ++k) {
    const double xk = x.at(k);
    const double p1 = edge_probability(params, xk, y_s, k, s);
    const double p2 = edge_probability(params, xk, y_t, k, t);
    const double p3 = edge_probability(params, xk, y_u, k, u);
    const double pair_st = p1 * p2, pair_su = p1 * p3, pair_tu = p2 * p3;
    const double triple2 = p1 * p2 * p3;
    log_n[1] += std::log1p(-pair_st);
    log_n[2] += std::log1p(-pair_su);
    log_n[4] += std::log1p(-pair_tu);
    log_n[3] += std::log1p(-(p1 * (p2 + p3) - triple2));   // no st, no su
    log_n[5] += std::log1p(-(p2 * (p1 + p3) - triple2));   // no st, no tu
    log_n[6] += std::log1p(-(p3 * (p1 + p2) - triple2));   // no su, no tu
    log_n[7] += std::log1p(-(pair_st + pair_su + pair_tu - 2.0 * triple2));
  }
  double n[8];
  for (int m = 0; m < 8; ++m) n[m] = std::exp(log_n[m]);

  res.triangle = 1.0 - n[1] - n[2] - n[4] + n[3] + n[5] + n[6] - n[7];
  res.path_s = 1.0 - n[1] - n[2] + n[3];
  res.path_t = 1.0 - n[1] - n[4] + n[5];
  res.path_u = 1.0 - n[2] - n[4] + n[6];

  auto clamp01 = [](double v) { return std::min(1.0, std::max(0.0, v)); };
  res.path_s = clamp01(res.path_s);
  res.path_t = clamp01(res.path_t);
  res.path_u = clamp01(res.path_u);
  res.triangle =
      std::min({clamp01(res.triangle), res.path_s, res.path_t, res.path_u});
  return res;
}

TripleProbs exact_triple_probs(const ModelParams& params, const WeightVector& x,
                               const WeightVector& y, std::int64_t s, std::int64_t t,
                               std::int64_t u) {
  if (!y.covers(s, s) || !y.covers(t, t) || !y.covers(u, u))
    throw std::invalid_argument("y weights must cover all three actors");
  return exact_triple_probs_xy(params, x, y.at(s), y.at(t), y.at(u), s, t, u);
}

TriangleAsymptotics asymptotic_triangle(const ModelParams& params, const XyMoments& m,
                                        std::int64_t s, std::int64_t t, std::int64_t u) {
  params.validate();
  if (params.tau.kind != TauKind::Linear)
    throw std::invalid_argument("asymptotic triangle rates require the linear schedule");
  if (!(1 <= s && s < t && t < u)) throw std::invalid_argument("triple requires 1 <= s < t < u");
  const double a = params.a, b = params.b;
  if (!(std::ceil(a * static_cast<double>(u)) <= std::floor(b * static_cast<double>(s))))
    throw std::invalid_argument("triple lifetimes must overlap (a*u <= b*s)");

  const double sd = static_cast<double>(s), td = static_cast<double>(t),
               ud = static_cast<double>(u);
  TriangleAsymptotics out;
  out.p_delta = m.a3 * m.b1 * m.b1 * m.b1 / std::sqrt(sd * td * ud) *
                (2.0 / std::sqrt(a * ud) - 2.0 / std::sqrt(b * sd));

  const double l_ut = std::log(ud / td);
  const double l_ts = std::log(td / sd);
  const double l_bs_au = std::log((b * sd) / (a * ud));
  out.delta_t_su = l_ut * l_ts + l_ut * l_bs_au + l_ts * l_bs_au + l_bs_au * l_bs_au;
  out.delta_s_tu = l_ut * l_bs_au + l_bs_au * l_bs_au;
  out.delta_u_st = l_ts * l_bs_au + l_bs_au * l_bs_au;

  const double coef = m.a2 * m.a2 * m.b1 * m.b1 * m.b2;
  auto alpha = [&](double center, double left, double right, double delta) {
    const double two_path = coef / (center * std::sqrt(left * right)) * delta;
    return out.p_delta / (out.p_delta + two_path);
  };
  out.alpha_t_su = alpha(td, sd, ud, out.delta_t_su);
  out.alpha_s_tu = alpha(sd, td, ud, out.delta_s_tu);
  out.alpha_u_st = alpha(ud, sd, td, out.delta_u_st);
  return out;
}

double theta_pair(const ModelParams& params, std::int64_t s, std::int64_t t) {
  params.validate();
  if (params.tau.kind != TauKind::Linear)
    throw std::invalid_argument("shared-witness normalization requires the linear schedule");
  if (!(1 <= s && s < t)) throw std::invalid_argument("pair requires 1 <= s < t");
  const double num = params.b * static_cast<double>(s);
  const double den = params.a * static_cast<double>(t);
  if (!(num > den)) throw std::invalid_argument("pair lifetimes must overlap (a*t < b*s)");
  return std::log(num / den) / std::sqrt(static_cast<double>(s) * static_cast<double>(t));
}

AssortativityConstants assortativity_constants(double a2, double a3, double a4, double b1,
                                               double b2, double b3, double a, double b) {
  for (const double v : {a2, a3, a4, b1, b2, b3})
    if (!(v > 0.0) || !std::isfinite(v))
      throw std::invalid_argument("assortativity constants require positive finite moments");
  const double gt = gamma2_constant(a, b);
  const double rt = std::sqrt(b) - std::sqrt(a);

  AssortativityConstants c;
  c.gamma_tilde = gt;
  c.h[0] = a2 * b1 * b1;
  c.h[1] = a3 * b1 * b1 * b1 * gt;
  c.h[2] = a2 * a2 * b1 * b1 * b2 * gt * rt;
  c.h[3] = a4 * b1 * b1 * b1 * b1 * gt * gt;
  c.h[4] = a2 * a3 * b1 * b1 * b1 * b2 * gt * gt * rt;
  c.h[5] = a2 * a2 * a2 * b1 * b1 * b1 * b3 * gt * gt * rt * rt;
  c.h[6] = a2 * a2 * a2 * b1 * b1 * b2 * b2 * gt * gt * rt * rt;

  const double inv_h1 = 1.0 / c.h[0];
  c.cap_delta = inv_h1 * (2.0 * c.h[2] + 2.0 * c.h[4] + 4.0 * (c.h[5] - c.h[6]));
  c.delta1 = 1.0 + inv_h1 * (c.h[1] + 2.0 * c.h[2]);
  c.delta2 = 1.0 + inv_h1 * (3.0 * c.h[1] + 6.0 * c.h[2] + c.h[3] + 6.0 * c.h[4] + 4.0 * c.h[5]);

  const double var = c.delta2 - c.delta1 * c.delta1;
  if (var > 0.0 && std::isfinite(var)) c.r_st = 1.0 - c.cap_delta / var;
  return c;
}

double le_cam_bound(std::span<const double> probs) {
  double s = 0.0;
  for (const double p : probs) {
    if (!(p >= 0.0) || !(p <= 1.0))
      throw std::invalid_argument("success probabilities must lie in [0, 1]");
    s += p * p;
  }
  return s;
}

}  // namespace rig
