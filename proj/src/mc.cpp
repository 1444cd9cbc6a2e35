#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "rig/parallel.hpp"
#include "rig/stats.hpp"
#include "rig/theory.hpp"

namespace rig {

namespace {

// Envelope for per-item witness probabilities min(1, x_k y_s/sqrt(ks)) *
// min(1, x_k y_t/sqrt(kt)) <= coef * x_k^2 / k with coef = y_s y_t / sqrt(st).
struct ProductEnvelope {
  double coef;
  double operator()(std::int64_t block_lo, double wmax) const {
    const double q = coef * wmax * wmax / static_cast<double>(block_lo);
    return q < 1.0 ? q : 1.0;
  }
};

// One side's weight access: prebuilt field (fixed vector or constant law) or
// a fresh draw per replicate.
struct FieldSpec {
  bool per_replicate = false;
  WeightDistribution dist = WeightDistribution::constant(1.0);
  WeightField fixed = WeightField::constant(1.0);
  std::int64_t lo = 1, hi = 0;
};

FieldSpec make_field_spec(const std::optional<WeightVector>& fixed,
                          const std::optional<WeightDistribution>& dist, std::int64_t lo,
                          std::int64_t hi, const char* side) {
  FieldSpec f;
  if (hi < lo) return f;  // empty range: the field is never evaluated
  if (fixed) {
    if (hi >= lo && !fixed->covers(lo, hi))
      throw std::invalid_argument(std::string("fixed ") + side +
                                  " weights do not cover the required index range");
    f.fixed = WeightField::realized(*fixed);
    return f;
  }
  if (!dist || dist->is_deterministic()) {
    f.fixed = WeightField::constant(dist ? dist->constant_value() : 1.0);
    return f;
  }
  f.per_replicate = true;
  f.dist = *dist;
  f.lo = lo;
  f.hi = hi;
  return f;
}

const WeightField& field_for_rep(const FieldSpec& spec, RandomStream& rs, WeightField& storage) {
  if (!spec.per_replicate) return spec.fixed;
  storage = WeightField::realized(WeightVector::draw(spec.dist, spec.lo, spec.hi, rs));
  return storage;
}

// Deterministic weight vector for the exact oracles (constant fill or a slice
// of the fixed vector); empty when the side is genuinely random.
std::optional<WeightVector> deterministic_vector(const std::optional<WeightVector>& fixed,
                                                 const std::optional<WeightDistribution>& dist,
                                                 std::int64_t lo, std::int64_t hi) {
  if (hi < lo) return WeightVector{lo, {}};
  if (fixed) {
    if (!fixed->covers(lo, hi)) return std::nullopt;
    WeightVector v;
    v.first = lo;
    v.values.assign(fixed->values.begin() + (lo - fixed->first),
                    fixed->values.begin() + (hi - fixed->first + 1));
    return v;
  }
  if (!dist) return WeightVector::constant(1.0, lo, hi);
  if (dist->is_deterministic()) return WeightVector::constant(dist->constant_value(), lo, hi);
  return std::nullopt;
}

nlohmann::json pmf_json(const Pmf& pmf, const char* source) {
  nlohmann::json j;
  j["pmf"] = pmf.p;
  j["tail"] = pmf.tail;
  j["source"] = source;
  return j;
}

nlohmann::json value_json(double v, const char* source) {
  nlohmann::json j;
  j["value"] = v;
  j["source"] = source;
  return j;
}

void add_pmf_rows(ExperimentReport& rep, const std::vector<std::int64_t>& hist,
                  std::int64_t n_obs, const Pmf* theory) {
  for (std::size_t r = 0; r < hist.size(); ++r) {
    CsvRow row;
    row.quantity = "degree_pmf";
    row.r_or_pair = std::to_string(r);
    row.estimate = static_cast<double>(hist[r]) / static_cast<double>(n_obs);
    const WilsonInterval ci = wilson_ci(hist[r], n_obs, 0.95);
    row.ci_lo = ci.lo;
    row.ci_hi = ci.hi;
    if (theory) row.theory = theory->at(static_cast<int>(r));
    row.n_rep = n_obs;
    row.seed = rep.seed;
    rep.rows.push_back(std::move(row));
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Degree distribution

ExperimentReport mc_degree_distribution(const ModelParams& params, const WeightSetup& weights,
                                        std::int64_t t, const McOptions& opt) {
  params.validate();
  if (t < 1) throw std::invalid_argument("actor index must be >= 1");
  if (opt.n_rep < 1) throw std::invalid_argument("n_rep must be >= 1");
  if (opt.r_max < 0) throw std::invalid_argument("r_max must be >= 0");

  ExperimentReport rep;
  rep.kind = "degree";
  rep.seed = opt.seed;
  rep.n_rep = opt.n_rep;
  rep.threads = resolve_threads(opt.threads);

  const IndexInterval w = item_window(params, t);
  std::int64_t y_lo = t, y_hi = t;
  if (!w.empty()) {
    // Every item of T_t has t in its actor window, so the envelope of all
    // second-hop ranges is [lo(T*_{w.lo}), hi(T*_{w.hi})], both nonempty.
    y_lo = actor_window(params, w.lo).lo;
    y_hi = actor_window(params, w.hi).hi;
  }

  const FieldSpec xs = make_field_spec(weights.x_fixed, weights.x_dist, w.lo, w.hi, "x");
  const FieldSpec ys = make_field_spec(weights.y_fixed, weights.y_dist, y_lo, y_hi, "y");

  const std::size_t width = static_cast<std::size_t>(opt.r_max) + 1;
  struct Acc {
    std::vector<std::int64_t> hist;
    std::int64_t overflow = 0;
    std::int64_t sum = 0;
  };
  std::vector<std::int64_t> hist(width, 0);
  std::int64_t overflow = 0, degree_sum = 0;

  const ReplicateRunInfo info = run_replicates<Acc>(
      opt.n_rep, opt.seed, opt.threads, opt.budget_seconds,
      [&](std::int64_t, RandomStream& rs, Acc& acc) {
        if (acc.hist.empty()) acc.hist.assign(width, 0);
        thread_local WeightField x_storage, y_storage;
        thread_local std::vector<std::int64_t> scratch;
        const WeightField& xf = field_for_rep(xs, rs, x_storage);
        const WeightField& yf = field_for_rep(ys, rs, y_storage);
        const std::int64_t d = sample_vertex_degree(params, xf, yf, t, rs, scratch);
        if (d <= opt.r_max)
          ++acc.hist[static_cast<std::size_t>(d)];
        else
          ++acc.overflow;
        acc.sum += d;
      },
      [&](const Acc& acc, std::int64_t count) {
        if (count == 0 || acc.hist.empty()) return;
        for (std::size_t r = 0; r < width; ++r) hist[r] += acc.hist[r];
        overflow += acc.overflow;
        degree_sum += acc.sum;
      });
  rep.n_completed = info.n_done;
  rep.truncated = info.truncated;
  if (info.n_done == 0) {
    rep.warnings.push_back("no replicates completed within the budget");
    return rep;
  }
  const double n = static_cast<double>(info.n_done);

  Pmf empirical;
  empirical.p.resize(width);
  for (std::size_t r = 0; r < width; ++r) empirical.p[r] = static_cast<double>(hist[r]) / n;
  empirical.tail = static_cast<double>(overflow) / n;

  rep.estimates["mean_degree"] = static_cast<double>(degree_sum) / n;
  rep.estimates["pmf"] = empirical.p;
  rep.estimates["overflow_mass"] = empirical.tail;

  // Limit law (needs distributions with the regime's moments).
  const Pmf* row_theory = nullptr;
  Pmf limit_pmf;
  if (!weights.x_dist || !weights.y_dist || weights.x_fixed || weights.y_fixed) {
    rep.warnings.push_back("limit-law comparison skipped: weights are fixed vectors");
  } else {
    try {
      const DegreeLimitLaw lim =
          degree_limit_pmf(params, *weights.x_dist, *weights.y_dist, opt.r_max);
      limit_pmf = lim.pmf;
      row_theory = &limit_pmf;
      nlohmann::json th =
          pmf_json(lim.pmf, lim.regime == DegreeRegime::Linear ? "thm1_eq3" : "thm2_eq5");
      th["regime"] = lim.regime == DegreeRegime::Linear ? "linear" : "power";
      th["rate"] = lim.rate;
      th["gamma_used"] = lim.gamma_used;
      th["tail_target_met"] = lim.tail_target_met;
      rep.theory["degree_limit"] = th;
      if (lim.regime == DegreeRegime::Linear) rep.theory["kappa"] = pmf_json(lim.kappa, "thm1_eq4");

      rep.distances["tv_vs_limit"] = tv_distance(empirical, lim.pmf);
      const GofResult gof = gof_counts(hist, info.n_done, lim.pmf);
      rep.distances["chi_square_vs_limit"] = gof.chi_square;
      rep.distances["chi_square_p_value"] = gof.p_value;
      rep.distances["chi_square_dof"] = gof.dof;
      rep.distances["chi_square_valid"] = gof.chi_square_valid;
    } catch (const InfiniteMomentError& e) {
      rep.warnings.push_back(std::string("limit-law comparison skipped: ") + e.what());
    } catch (const std::invalid_argument& e) {
      // e.g. degenerate weights with E Y = 0: the limit law is undefined but
      // the sampled estimates still stand on their own.
      rep.warnings.push_back(std::string("limit-law comparison skipped: ") + e.what());
    }
  }

  // Exact finite-t path-count oracle (deterministic weights, tractable window).
  const std::optional<WeightVector> x_det =
      deterministic_vector(weights.x_fixed, weights.x_dist, w.lo, w.hi);
  const std::optional<WeightVector> y_det =
      deterministic_vector(weights.y_fixed, weights.y_dist, y_lo, y_hi);
  if (x_det && y_det && !w.empty()) {
    const double cost = static_cast<double>(w.hi - w.lo + 1) *
                        static_cast<double>(actor_window(params, w.hi).size());
    if (cost <= 2e8) {
      const Pmf exact = exact_path2_pmf(params, *x_det, *y_det, t, opt.r_max);
      rep.theory["exact_path2"] = pmf_json(exact, "sec3_Lt");
      rep.distances["tv_vs_exact"] = tv_distance(empirical, exact);
      if (row_theory) rep.distances["tv_exact_vs_limit"] = tv_distance(exact, limit_pmf);
    } else {
      rep.warnings.push_back("exact path-count oracle skipped: item window too large");
    }
  }

  add_pmf_rows(rep, hist, info.n_done, row_theory);
  CsvRow mean_row;
  mean_row.quantity = "mean_degree";
  mean_row.r_or_pair = std::to_string(t);
  mean_row.estimate = static_cast<double>(degree_sum) / n;
  mean_row.n_rep = info.n_done;
  mean_row.seed = rep.seed;
  rep.rows.push_back(std::move(mean_row));
  return rep;
}

// ---------------------------------------------------------------------------
// Clustering

namespace {

struct TripleAcc {
  double tri = 0, hs = 0, ht = 0, hu = 0;
  double tri2 = 0, hs2 = 0, ht2 = 0, hu2 = 0;
  double tri_hs = 0, tri_ht = 0, tri_hu = 0;
};

struct RatioEstimate {
  double value = 0.0;
  double ci_lo = 0.0, ci_hi = 0.0;
  bool defined = false;
};

// Delta-method CI for a ratio of means R = m_num / m_den from per-replicate
// sums of num, den, num^2, den^2 and num*den.
RatioEstimate ratio_of_means(double s_num, double s_den, double s_num2, double s_den2,
                             double s_cross, double n) {
  RatioEstimate est;
  if (!(s_den > 0.0)) return est;
  const double m_num = s_num / n, m_den = s_den / n;
  const double r = m_num / m_den;
  const double var_num = std::max(0.0, s_num2 / n - m_num * m_num);
  const double var_den = std::max(0.0, s_den2 / n - m_den * m_den);
  const double cov = s_cross / n - m_num * m_den;
  const double var_r = (var_num - 2.0 * r * cov + r * r * var_den) / (n * m_den * m_den);
  const double half = 1.959963984540054 * std::sqrt(std::max(0.0, var_r));
  est.value = r;
  est.ci_lo = std::max(0.0, r - half);
  est.ci_hi = std::min(1.0, r + half);
  est.defined = true;
  return est;
}

void add_estimate_row(ExperimentReport& rep, const std::string& quantity,
                      const std::string& label, double estimate, std::optional<double> ci_lo,
                      std::optional<double> ci_hi, std::optional<double> theory,
                      std::int64_t n_rep) {
  CsvRow row;
  row.quantity = quantity;
  row.r_or_pair = label;
  row.estimate = estimate;
  row.ci_lo = ci_lo;
  row.ci_hi = ci_hi;
  row.theory = theory;
  row.n_rep = n_rep;
  row.seed = rep.seed;
  rep.rows.push_back(std::move(row));
}

}  // namespace

ExperimentReport mc_clustering(const ModelParams& params, const WeightSetup& weights,
                               std::int64_t s, std::int64_t t, std::int64_t u,
                               const McOptions& opt) {
  params.validate();
  if (!(1 <= s && s < t && t < u))
    throw std::invalid_argument("clustering requires 1 <= s < t < u");

  ExperimentReport rep;
  rep.kind = "clustering";
  rep.seed = opt.seed;
  rep.n_rep = opt.n_rep;
  rep.threads = resolve_threads(opt.threads);
  const std::string pair_label =
      std::to_string(s) + ":" + std::to_string(t) + ":" + std::to_string(u);

  // Hull of the pairwise window overlaps; the x draw must cover it.
  const IndexInterval ws = item_window(params, s);
  const IndexInterval wt = item_window(params, t);
  const IndexInterval wu = item_window(params, u);
  IndexInterval hull{std::int64_t{1} << 62, 0};
  bool any_disjoint = false;
  for (const IndexInterval& o : {intersect(ws, wt), intersect(ws, wu), intersect(wt, wu)}) {
    if (o.empty()) {
      any_disjoint = true;  // a triangle needs all three pairs to share items
      continue;
    }
    hull.lo = std::min(hull.lo, o.lo);
    hull.hi = std::max(hull.hi, o.hi);
  }
  if (hull.lo > hull.hi) hull = {1, 0};
  if (any_disjoint)
    rep.warnings.push_back("pairwise lifetimes are disjoint: p_delta is identically 0");

  // Asymptotic comparison needs distributional moments.
  std::optional<TriangleAsymptotics> asym;
  {
    std::string warn_a2, warn_a3, warn_b1, warn_b2;
    const auto a2 = weights.x_moment(2, &warn_a2);
    const auto a3 = weights.x_moment(3, &warn_a3);
    const auto b1 = weights.y_moment(1, &warn_b1);
    const auto b2 = weights.y_moment(2, &warn_b2);
    if (a2 && a3 && b1 && b2) {
      try {
        asym = asymptotic_triangle(params, {*a2, *a3, *b1, *b2}, s, t, u);
        nlohmann::json th;
        th["p_delta"] = value_json(asym->p_delta, "thm3_eq6");
        th["alpha_t_su"] = value_json(asym->alpha_t_su, "thm3_eq7");
        th["alpha_s_tu"] = value_json(asym->alpha_s_tu, "thm3_eq8");
        th["alpha_u_st"] = value_json(asym->alpha_u_st, "thm3_eq9");
        th["delta_t_su"] = asym->delta_t_su;
        th["delta_s_tu"] = asym->delta_s_tu;
        th["delta_u_st"] = asym->delta_u_st;
        rep.theory["triangle"] = th;
      } catch (const std::invalid_argument& e) {
        rep.warnings.push_back(std::string("asymptotic comparison skipped: ") + e.what());
      }
    } else {
      for (const std::string& w : {warn_a2, warn_a3, warn_b1, warn_b2})
        if (!w.empty()) {
          rep.warnings.push_back("asymptotic comparison skipped: " + w);
          break;
        }
    }
  }

  double m_tri = 0, m_hs = 0, m_ht = 0, m_hu = 0;
  RatioEstimate a_t, a_s, a_u;
  const bool deterministic = weights.deterministic();

  if (deterministic) {
    const auto x_det = deterministic_vector(weights.x_fixed, weights.x_dist, hull.lo, hull.hi);
    if (!x_det)
      throw std::invalid_argument("fixed x weights do not cover the shared item windows");
    auto y_at = [&](std::int64_t j) {
      if (weights.y_fixed) {
        if (!weights.y_fixed->covers(j, j))
          throw std::invalid_argument("fixed y weights do not cover the actors");
        return weights.y_fixed->at(j);
      }
      return weights.y_dist ? weights.y_dist->constant_value() : 1.0;
    };
    const TripleProbs tp =
        exact_triple_probs_xy(params, *x_det, y_at(s), y_at(t), y_at(u), s, t, u);
    m_tri = tp.triangle;
    m_hs = tp.path_s;
    m_ht = tp.path_t;
    m_hu = tp.path_u;
    rep.n_completed = 0;
    rep.estimates["deterministic"] = true;
  } else {
    if (opt.n_rep < 1) throw std::invalid_argument("n_rep must be >= 1 for random weights");
    TripleAcc total;
    const ReplicateRunInfo info = run_replicates<TripleAcc>(
        opt.n_rep, opt.seed, opt.threads, opt.budget_seconds,
        [&](std::int64_t, RandomStream& rs, TripleAcc& acc) {
          WeightVector xv = weights.realize_x(hull.lo, hull.hi, rs);
          double y_s = 1.0, y_t = 1.0, y_u = 1.0;
          if (weights.y_fixed) {
            y_s = weights.y_fixed->at(s);
            y_t = weights.y_fixed->at(t);
            y_u = weights.y_fixed->at(u);
          } else if (weights.y_dist) {
            y_s = weights.y_dist->sample(rs);
            y_t = weights.y_dist->sample(rs);
            y_u = weights.y_dist->sample(rs);
          }
          const TripleProbs tp = exact_triple_probs_xy(params, xv, y_s, y_t, y_u, s, t, u);
          acc.tri += tp.triangle;
          acc.hs += tp.path_s;
          acc.ht += tp.path_t;
          acc.hu += tp.path_u;
          acc.tri2 += tp.triangle * tp.triangle;
          acc.hs2 += tp.path_s * tp.path_s;
          acc.ht2 += tp.path_t * tp.path_t;
          acc.hu2 += tp.path_u * tp.path_u;
          acc.tri_hs += tp.triangle * tp.path_s;
          acc.tri_ht += tp.triangle * tp.path_t;
          acc.tri_hu += tp.triangle * tp.path_u;
        },
        [&](const TripleAcc& acc, std::int64_t count) {
          if (count == 0) return;
          total.tri += acc.tri;
          total.hs += acc.hs;
          total.ht += acc.ht;
          total.hu += acc.hu;
          total.tri2 += acc.tri2;
          total.hs2 += acc.hs2;
          total.ht2 += acc.ht2;
          total.hu2 += acc.hu2;
          total.tri_hs += acc.tri_hs;
          total.tri_ht += acc.tri_ht;
          total.tri_hu += acc.tri_hu;
        });
    rep.n_completed = info.n_done;
    rep.truncated = info.truncated;
    if (info.n_done == 0) {
      rep.warnings.push_back("no replicates completed within the budget");
      return rep;
    }
    const double n = static_cast<double>(info.n_done);
    m_tri = total.tri / n;
    m_hs = total.hs / n;
    m_ht = total.ht / n;
    m_hu = total.hu / n;
    a_s = ratio_of_means(total.tri, total.hs, total.tri2, total.hs2, total.tri_hs, n);
    a_t = ratio_of_means(total.tri, total.ht, total.tri2, total.ht2, total.tri_ht, n);
    a_u = ratio_of_means(total.tri, total.hu, total.tri2, total.hu2, total.tri_hu, n);
  }

  rep.estimates["p_delta"] = m_tri;
  rep.estimates["p_h_s"] = m_hs;
  rep.estimates["p_h_t"] = m_ht;
  rep.estimates["p_h_u"] = m_hu;
  const bool null_condition = !(m_tri > 0.0);
  rep.estimates["p_delta_zero"] = null_condition;
  if (deterministic) {
    a_s = {m_hs > 0 ? m_tri / m_hs : 0.0, 0, 0, m_hs > 0};
    a_t = {m_ht > 0 ? m_tri / m_ht : 0.0, 0, 0, m_ht > 0};
    a_u = {m_hu > 0 ? m_tri / m_hu : 0.0, 0, 0, m_hu > 0};
  }
  if (null_condition) {
    rep.warnings.push_back("p_delta = 0: conditional clustering coefficients withheld");
    a_s.defined = a_t.defined = a_u.defined = false;
  }
  auto emit_alpha = [&](const char* name, const RatioEstimate& est, double theory_v) {
    if (!est.defined) return;
    rep.estimates[name] = est.value;
    add_estimate_row(rep, name, pair_label, est.value,
                     deterministic ? std::nullopt : std::optional<double>(est.ci_lo),
                     deterministic ? std::nullopt : std::optional<double>(est.ci_hi),
                     asym ? std::optional<double>(theory_v) : std::nullopt, rep.n_completed);
  };
  add_estimate_row(rep, "p_delta", pair_label, m_tri, std::nullopt, std::nullopt,
                   asym ? std::optional<double>(asym->p_delta) : std::nullopt, rep.n_completed);
  emit_alpha("alpha_t_su", a_t, asym ? asym->alpha_t_su : 0.0);
  emit_alpha("alpha_s_tu", a_s, asym ? asym->alpha_s_tu : 0.0);
  emit_alpha("alpha_u_st", a_u, asym ? asym->alpha_u_st : 0.0);

  if (asym && asym->p_delta > 0.0 && !null_condition) {
    rep.distances["rel_err_p_delta"] = std::abs(m_tri - asym->p_delta) / asym->p_delta;
    if (a_t.defined && asym->alpha_t_su > 0.0)
      rep.distances["rel_err_alpha_t_su"] =
          std::abs(a_t.value - asym->alpha_t_su) / asym->alpha_t_su;
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Assortativity

ExperimentReport mc_assortativity(const ModelParams& params, const WeightSetup& weights,
                                  std::int64_t s, std::int64_t t, const McOptions& opt) {
  params.validate();
  if (!(1 <= s && s < t)) throw std::invalid_argument("assortativity requires 1 <= s < t");
  if (opt.n_rep < 1) throw std::invalid_argument("n_rep must be >= 1");

  ExperimentReport rep;
  rep.kind = "assort";
  rep.seed = opt.seed;
  rep.n_rep = opt.n_rep;
  rep.threads = resolve_threads(opt.threads);
  const std::string pair_label = std::to_string(s) + ":" + std::to_string(t);

  const IndexInterval ws = item_window(params, s);
  const IndexInterval wt = item_window(params, t);
  const IndexInterval shared = intersect(ws, wt);
  if (shared.empty())
    throw std::invalid_argument(
        "assortativity requires overlapping lifetimes: ceil(a*tau(t)) <= floor(b*tau(s))");

  // Window bounds are monotone in the actor index, so the union of the two
  // windows is the contiguous interval [ws.lo, wt.hi].
  const std::int64_t item_lo = ws.lo, item_hi = wt.hi;
  const std::int64_t y_lo = std::min(s, actor_window(params, item_lo).lo);
  const std::int64_t y_hi = std::max(t, actor_window(params, item_hi).hi);

  const FieldSpec xs = make_field_spec(weights.x_fixed, weights.x_dist, item_lo, item_hi, "x");
  const FieldSpec ysp = make_field_spec(weights.y_fixed, weights.y_dist, y_lo, y_hi, "y");

  const double sqrt_s = std::sqrt(static_cast<double>(s));
  const double sqrt_t = std::sqrt(static_cast<double>(t));

  struct Acc {
    std::int64_t accepted = 0;
    std::int64_t sds = 0, sdt = 0, sds2 = 0, sdt2 = 0, sdsdt = 0;
  };
  Acc total;

  const ReplicateRunInfo info = run_replicates<Acc>(
      opt.n_rep, opt.seed, opt.threads, opt.budget_seconds,
      [&](std::int64_t, RandomStream& rs, Acc& acc) {
        thread_local WeightField x_storage, y_storage;
        const WeightField& xf = field_for_rep(xs, rs, x_storage);
        const WeightField& yf = field_for_rep(ysp, rs, y_storage);
        const double y_s = yf.at(s), y_t = yf.at(t);

        auto p_s = [&](std::int64_t k) {
          return edge_probability_in_window(xf.at(k), y_s, k, s);
        };
        auto p_t = [&](std::int64_t k) {
          return edge_probability_in_window(xf.at(k), y_t, k, t);
        };

        // Stage 1: witness items linking both s and t, sampled directly with
        // per-item probability p_s(k) p_t(k).
        thread_local std::vector<std::int64_t> wit, a_hits, b_hits, items_s, items_t, nb_s, nb_t;
        wit.clear();
        skip_sample_interval(
            xf, shared.lo, shared.hi, ProductEnvelope{y_s * y_t / (sqrt_s * sqrt_t)},
            [&](std::int64_t k) { return p_s(k) * p_t(k); }, rs,
            [&](std::int64_t k) { wit.push_back(k); });
        if (wit.empty()) return;
        ++acc.accepted;

        // Stage 2: extend the accepted partial realization.  Conditional on
        // "no witness at k", the pair (e_ks, e_kt) has
        //   P(e_ks = 1) = p_s (1 - p_t) / (1 - p_s p_t), e_kt then forced 0;
        //   given e_ks = 0, e_kt ~ Bernoulli(p_t) unchanged.
        a_hits.clear();
        skip_sample_interval(
            xf, shared.lo, shared.hi, ScaledEnvelope{y_s / sqrt_s},
            [&](std::int64_t k) {
              if (std::binary_search(wit.begin(), wit.end(), k)) return 0.0;
              const double p1 = p_s(k), p2 = p_t(k);
              const double denom = 1.0 - p1 * p2;
              return denom > 0.0 ? p1 * (1.0 - p2) / denom : 0.0;
            },
            rs, [&](std::int64_t k) { a_hits.push_back(k); });
        b_hits.clear();
        skip_sample_interval(
            xf, shared.lo, shared.hi, ScaledEnvelope{y_t / sqrt_t},
            [&](std::int64_t k) {
              if (std::binary_search(wit.begin(), wit.end(), k) ||
                  std::binary_search(a_hits.begin(), a_hits.end(), k))
                return 0.0;
              return p_t(k);
            },
            rs, [&](std::int64_t k) { b_hits.push_back(k); });

        // First hops outside the shared window (unconditional).
        items_s.assign(wit.begin(), wit.end());
        items_s.insert(items_s.end(), a_hits.begin(), a_hits.end());
        items_t.assign(wit.begin(), wit.end());
        items_t.insert(items_t.end(), b_hits.begin(), b_hits.end());
        auto sample_first = [&](std::int64_t lo, std::int64_t hi, auto&& prob, double coef,
                                std::vector<std::int64_t>& sink) {
          if (lo > hi) return;
          skip_sample_interval(xf, lo, hi, ScaledEnvelope{coef}, prob, rs,
                               [&](std::int64_t k) { sink.push_back(k); });
        };
        sample_first(ws.lo, std::min(ws.hi, shared.lo - 1), p_s, y_s / sqrt_s, items_s);
        sample_first(std::max(ws.lo, shared.hi + 1), ws.hi, p_s, y_s / sqrt_s, items_s);
        sample_first(wt.lo, std::min(wt.hi, shared.lo - 1), p_t, y_t / sqrt_t, items_t);
        sample_first(std::max(wt.lo, shared.hi + 1), wt.hi, p_t, y_t / sqrt_t, items_t);
        std::sort(items_s.begin(), items_s.end());
        std::sort(items_t.begin(), items_t.end());

        // Second hops, realized once per linked item and shared by both
        // endpoints (witness items correlate the two degrees).
        nb_s.clear();
        nb_t.clear();
        std::size_t is = 0, it = 0;
        while (is < items_s.size() || it < items_t.size()) {
          std::int64_t k;
          bool in_s = false, in_t = false;
          if (it >= items_t.size() || (is < items_s.size() && items_s[is] < items_t[it])) {
            k = items_s[is++];
            in_s = true;
          } else if (is >= items_s.size() || items_t[it] < items_s[is]) {
            k = items_t[it++];
            in_t = true;
          } else {
            k = items_s[is++];
            ++it;
            in_s = in_t = true;
          }
          const IndexInterval aw = actor_window(params, k);
          if (aw.empty()) continue;
          const double xk = xf.at(k);
          skip_sample_interval(
              yf, aw.lo, aw.hi, ScaledEnvelope{xk / std::sqrt(static_cast<double>(k))},
              [&](std::int64_t j) { return edge_probability_in_window(xk, yf.at(j), k, j); },
              rs,
              [&](std::int64_t j) {
                if (j == s || j == t) return;
                if (in_s) nb_s.push_back(j);
                if (in_t) nb_t.push_back(j);
              });
        }
        nb_s.push_back(t);
        nb_t.push_back(s);
        std::sort(nb_s.begin(), nb_s.end());
        std::sort(nb_t.begin(), nb_t.end());
        const std::int64_t ds =
            std::unique(nb_s.begin(), nb_s.end()) - nb_s.begin();
        const std::int64_t dt =
            std::unique(nb_t.begin(), nb_t.end()) - nb_t.begin();
        acc.sds += ds;
        acc.sdt += dt;
        acc.sds2 += ds * ds;
        acc.sdt2 += dt * dt;
        acc.sdsdt += ds * dt;
      },
      [&](const Acc& acc, std::int64_t count) {
        if (count == 0) return;
        total.accepted += acc.accepted;
        total.sds += acc.sds;
        total.sdt += acc.sdt;
        total.sds2 += acc.sds2;
        total.sdt2 += acc.sdt2;
        total.sdsdt += acc.sdsdt;
      });
  rep.n_completed = info.n_done;
  rep.truncated = info.truncated;

  // Theory side: pair probability (deterministic weights) and the limit
  // moment chain (distributional moments).
  std::optional<double> pair_theory;
  {
    const auto x_det = deterministic_vector(weights.x_fixed, weights.x_dist, shared.lo, shared.hi);
    const auto y_det_s = deterministic_vector(weights.y_fixed, weights.y_dist, s, s);
    const auto y_det_t = deterministic_vector(weights.y_fixed, weights.y_dist, t, t);
    if (x_det && y_det_s && y_det_t) {
      pair_theory =
          exact_pair_prob_xy(params, *x_det, y_det_s->at(s), y_det_t->at(t), s, t);
      rep.theory["pair_prob"] = value_json(*pair_theory, "sec34_est");
    }
  }
  std::optional<AssortativityConstants> consts;
  {
    std::string warn;
    const auto a2 = weights.x_moment(2, &warn);
    const auto a3 = weights.x_moment(3, &warn);
    const auto a4 = weights.x_moment(4, &warn);
    const auto b1 = weights.y_moment(1, &warn);
    const auto b2 = weights.y_moment(2, &warn);
    const auto b3 = weights.y_moment(3, &warn);
    if (a2 && a3 && a4 && b1 && b2 && b3) {
      consts = assortativity_constants(*a2, *a3, *a4, *b1, *b2, *b3, params.a, params.b);
      nlohmann::json th;
      th["h"] = consts->h;
      th["source_h"] = "sec2_estLs";
      th["delta1"] = value_json(consts->delta1, "sec2_s_momentai");
      th["delta2"] = value_json(consts->delta2, "sec2_s_momentai");
      th["cap_delta"] = value_json(consts->cap_delta, "sec2_s_momentai");
      th["gamma_tilde"] = consts->gamma_tilde;
      th["theta"] = value_json(theta_pair(params, s, t), "sec34_theta");
      if (consts->r_st) th["r_st"] = value_json(*consts->r_st, "sec2_r_st");
      rep.theory["assortativity"] = th;
      if (!consts->r_st)
        rep.warnings.push_back("limit correlation withheld: delta2 - delta1^2 <= 0");
    } else if (!warn.empty()) {
      rep.warnings.push_back("limit comparison skipped: " + warn);
    }
  }

  if (info.n_done == 0) {
    rep.warnings.push_back("no replicates completed within the budget");
    return rep;
  }
  rep.estimates["n_raw"] = info.n_done;
  rep.estimates["n_accepted"] = total.accepted;
  const double rate = static_cast<double>(total.accepted) / static_cast<double>(info.n_done);
  rep.estimates["acceptance_rate"] = rate;
  const WilsonInterval rate_ci = wilson_ci(total.accepted, info.n_done, 0.95);
  add_estimate_row(rep, "acceptance_rate", pair_label, rate, rate_ci.lo, rate_ci.hi, pair_theory,
                   info.n_done);

  if (total.accepted == 0) {
    rep.warnings.push_back(
        "no accepted replicates: the pair adjacency probability is too small for this budget");
    return rep;
  }

  const double n = static_cast<double>(total.accepted);
  const double m_ds = static_cast<double>(total.sds) / n;
  const double m_dt = static_cast<double>(total.sdt) / n;
  const double m_ds2 = static_cast<double>(total.sds2) / n;
  const double m_dt2 = static_cast<double>(total.sdt2) / n;
  const double m_dsdt = static_cast<double>(total.sdsdt) / n;
  rep.estimates["mean_d_s"] = m_ds;
  rep.estimates["mean_d_t"] = m_dt;
  rep.estimates["mean_d_s_sq"] = m_ds2;
  rep.estimates["mean_d_t_sq"] = m_dt2;
  rep.estimates["mean_d_s_d_t"] = m_dsdt;

  const double var_s = m_ds2 - m_ds * m_ds;
  const double var_t = m_dt2 - m_dt * m_dt;
  const double cov = m_dsdt - m_ds * m_dt;
  std::optional<double> r_theory = consts && consts->r_st ? consts->r_st : std::nullopt;
  add_estimate_row(rep, "mean_d_s", pair_label, m_ds, std::nullopt, std::nullopt,
                   consts ? std::optional<double>(consts->delta1) : std::nullopt,
                   total.accepted);
  add_estimate_row(rep, "mean_d_t", pair_label, m_dt, std::nullopt, std::nullopt,
                   consts ? std::optional<double>(consts->delta1) : std::nullopt,
                   total.accepted);
  add_estimate_row(rep, "mean_d_s_sq", pair_label, m_ds2, std::nullopt, std::nullopt,
                   consts ? std::optional<double>(consts->delta2) : std::nullopt,
                   total.accepted);

  if (var_s > 0.0 && var_t > 0.0 && total.accepted >= 8) {
    const double r_hat = cov / std::sqrt(var_s * var_t);
    rep.estimates["pearson_r"] = r_hat;
    double ci_lo = -1.0, ci_hi = 1.0;
    if (total.accepted > 3 && std::abs(r_hat) < 1.0) {
      const double z = std::atanh(r_hat);
      const double se = 1.0 / std::sqrt(static_cast<double>(total.accepted - 3));
      ci_lo = std::tanh(z - 1.959963984540054 * se);
      ci_hi = std::tanh(z + 1.959963984540054 * se);
    }
    add_estimate_row(rep, "pearson_r", pair_label, r_hat, ci_lo, ci_hi, r_theory,
                     total.accepted);
    if (r_theory) rep.distances["abs_err_pearson_r"] = std::abs(r_hat - *r_theory);
  } else {
    rep.warnings.push_back("degree variance degenerate: correlation withheld");
  }
  if (pair_theory && *pair_theory > 0.0)
    rep.distances["rel_err_acceptance"] = std::abs(rate - *pair_theory) / *pair_theory;
  return rep;
}

}  // namespace rig
