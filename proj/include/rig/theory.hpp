#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>

#include "rig/model.hpp"
#include "rig/pmf.hpp"

namespace rig {

// ---------------------------------------------------------------------------
// Window-sum constants

/// 2*(sqrt(b) - sqrt(a)): limit of t^(-1/2) * sum over the item window of
/// actor t of i^(-1/2), under the linear schedule.
double gamma1_constant(double a, double b);

/// 2*(a^(-1/2) - b^(-1/2)): limit of sqrt(i) * sum over the actor window of
/// item i of j^(-1/2), under the linear schedule.  Also the window constant
/// of the assortativity moment chain.
double gamma2_constant(double a, double b);

/// 4*nu*(b^(1/(2nu)) - a^(1/(2nu))) * (a^(-1/(2nu)) - b^(-1/(2nu))):
/// the degree rate constant of the power schedule; equals
/// gamma1_constant*gamma2_constant at nu = 1.
double gamma_power(double a, double b, double nu);

/// Numeric evaluation of the normalized two-hop window sum
///   S(t) = t^(-1/2) * sum_{i in T_t} i^(-1) * sum_{j: i in T_j} j^(-1/2)
/// at horizons t0, 2*t0, 4*t0, extrapolated to the limit through a quadratic
/// in a schedule-matched rate variable (t^(-1/2), 1/log(t), or 1/t).
struct GammaStarEstimate {
  double value = 0.0;
  double error_estimate = 0.0;      // gap to the linear extrapolant
  std::array<double, 3> partial{};  // S(t0), S(2 t0), S(4 t0)
  std::int64_t t0 = 0;
};

/// t0 = 0 picks a kind-appropriate default horizon.
GammaStarEstimate gamma_star_estimate(const ModelParams& params, std::int64_t t0 = 0);

/// max over a geometric grid of v of floor_inverse_tau(2v)/floor_inverse_tau(v);
/// diagnostic for schedules whose inverse must grow at most geometrically.
double inverse_growth_sup(const TauFunction& tau);

struct LimitConstants {
  double gamma1 = 0.0;
  double gamma2 = 0.0;
  double gamma_tilde = 0.0;  // equals gamma2
  double gamma = 0.0;        // power-schedule rate; gamma1*gamma2 form at nu=1
  std::optional<GammaStarEstimate> gamma_star;
};

/// gamma_star is computed on request (always useful for the t-log-t /
/// exp-log-squared / exp schedules, optional elsewhere).
LimitConstants limit_constants(const ModelParams& params, bool with_gamma_star = false,
                               std::int64_t gamma_star_t0 = 0);

// ---------------------------------------------------------------------------
// Degree laws

/// Law of a scaled mixing variable: lambda = scale * V, V ~ dist.
struct MixingLaw {
  WeightDistribution dist;
  double scale = 1.0;
};

struct MixResult {
  Pmf pmf;
  double achieved_rel_error = 0.0;
  bool converged = true;
};

/// P(R = r) = E exp(-lambda) lambda^r / r! with lambda = scale * V.
/// Constant and discrete-table mixing are summed exactly; continuous mixing
/// uses adaptive Gauss-Legendre quadrature on the inverse-CDF transform.
MixResult mixed_poisson_pmf(const MixingLaw& law, int r_max, double rel_tol = 1e-9);

/// Size-biased offspring law of the second hop:
///   P(kappa = r) = (r+1) P(L2 = r+1) / E L2,
/// where L2 is mixed Poisson with rate gamma2*b1*X and E L2 = gamma2*b1*a1.
/// b1 = E Y; requires E X > 0.
MixResult kappa_pmf(const ModelParams& params, const WeightDistribution& x_dist, double b1,
                    int r_max);

/// Compound Poisson mass function by Panjer recursion:
///   g_0 = exp(-lambda (1 - f_0)),  g_s = (lambda/s) sum_{j=1..s} j f_j g_{s-j}.
/// Head coefficients are exact given exact severity coefficients; any outcome
/// using a truncated severity lands in the tail.
Pmf compound_poisson_pmf(double lambda, const Pmf& severity, int r_max);

enum class DegreeRegime { Linear, Power };

struct DegreeLimitLaw {
  DegreeRegime regime = DegreeRegime::Linear;
  Pmf pmf;
  Pmf kappa;          // linear regime only
  double rate = 0.0;  // gamma1*a1 (linear, per unit Y) or gamma*a2*b1 (power)
  double gamma_used = 0.0;
  double achieved_rel_error = 0.0;
  bool tail_target_met = true;  // tail <= max(1e-12, 100x achieved_rel_error)
};

/// Limiting law of d(v_t).  Linear schedule: compound Poisson with mixed
/// count rate gamma1*a1*Y and size-biased summands kappa.  Power schedule:
/// mixed Poisson with rate gamma(nu)*a2*b1*Y.  For the slowly varying
/// schedules (t-log-t etc.) the numeric gamma_star replaces gamma.
DegreeLimitLaw degree_limit_pmf(const ModelParams& params, const WeightDistribution& x_dist,
                                const WeightDistribution& y_dist, int r_max);

/// Closed-form generating function E_Y exp(lambda1(Y) (G_kappa(z) - 1)) of the
/// linear-regime limit; cross-checks the Panjer head at |z| <= 1.
double degree_limit_pgf(const ModelParams& params, const WeightDistribution& y_dist, double a1,
                        const Pmf& kappa, double z);

/// Evaluates sum_s g_s z^s of a pmf head.
double pmf_pgf_head(const Pmf& pmf, double z);

// ---------------------------------------------------------------------------
// Exact finite-t oracles (independence-based, no asymptotics)

/// Law of the number of two-hop paths from actor t, i.e. of
///   L_t = sum_{i in T_t} I_i * u_i,
/// I_i the first-hop link indicator and u_i the number of linked actors
/// j != t of item i.  Computed as the truncated coefficient expansion of
///   prod_{i in T_t} [(1 - p_it) + p_it * prod_{j in T*_i \ {t}} ((1 - p_ij) + p_ij z)].
/// Head coefficients are exact; mass beyond r_max is in tail.
Pmf exact_path2_pmf(const ModelParams& params, const WeightVector& x, const WeightVector& y,
                    std::int64_t t, int r_max);

/// Analytic mean of L_t (double sum of link probability products).
double exact_path2_mean(const ModelParams& params, const WeightVector& x, const WeightVector& y,
                        std::int64_t t);

/// P(v_s ~ v_t) = 1 - prod_{k in T_s cap T_t} (1 - p_ks p_kt), given weights.
double exact_pair_prob(const ModelParams& params, const WeightVector& x, const WeightVector& y,
                       std::int64_t s, std::int64_t t);

/// Same computation with only the three relevant actor weights supplied.
double exact_pair_prob_xy(const ModelParams& params, const WeightVector& x, double y_s,
                          double y_t, std::int64_t s, std::int64_t t);

struct TripleProbs {
  double triangle = 0.0;  // all three pairs adjacent
  double path_s = 0.0;    // both pairs at s: {s~t and s~u}
  double path_t = 0.0;    // both pairs at t: {s~t and t~u}
  double path_u = 0.0;    // both pairs at u: {s~u and t~u}
};

/// Exact triangle and two-path probabilities for actors s < t < u by
/// inclusion-exclusion over per-item incidence patterns: for each subset S of
/// the three pairwise-adjacency events, P(no event of S) factors over items.
TripleProbs exact_triple_probs(const ModelParams& params, const WeightVector& x,
                               const WeightVector& y, std::int64_t s, std::int64_t t,
                               std::int64_t u);
TripleProbs exact_triple_probs_xy(const ModelParams& params, const WeightVector& x, double y_s,
                                  double y_t, double y_u, std::int64_t s, std::int64_t t,
                                  std::int64_t u);

// ---------------------------------------------------------------------------
// Asymptotics at large indices

struct XyMoments {
  double a2 = 1.0, a3 = 1.0;  // E X^2, E X^3
  double b1 = 1.0, b2 = 1.0;  // E Y, E Y^2
};

struct TriangleAsymptotics {
  double p_delta = 0.0;
  double delta_t_su = 0.0, delta_s_tu = 0.0, delta_u_st = 0.0;
  double alpha_t_su = 0.0, alpha_s_tu = 0.0, alpha_u_st = 0.0;
};

/// Leading-order triangle probability and conditional triangle closure rates
/// for s < t < u with overlapping lifetimes (requires ceil(a*u') <= floor(b*s')
/// on the schedule scale).  Only meaningful for the linear schedule.
TriangleAsymptotics asymptotic_triangle(const ModelParams& params, const XyMoments& m,
                                        std::int64_t s, std::int64_t t, std::int64_t u);

/// (st)^(-1/2) * ln(b s / (a t)): the normalization of the shared-witness
/// count of an actor pair s < t.
double theta_pair(const ModelParams& params, std::int64_t s, std::int64_t t);

struct AssortativityConstants {
  std::array<double, 7> h{};  // h1..h7
  double gamma_tilde = 0.0;
  double delta1 = 0.0;     // limit of E_st d(v_s)
  double delta2 = 0.0;     // limit of E_st d(v_s)^2
  double cap_delta = 0.0;  // limit covariance correction
  std::optional<double> r_st;  // withheld when delta2 - delta1^2 <= 0
};

/// Limit degree--degree correlation of an adjacent actor pair from the weight
/// moments a_k = E X^k (k = 2..4) and b_k = E Y^k (k = 1..3).
AssortativityConstants assortativity_constants(double a2, double a3, double a4, double b1,
                                               double b2, double b3, double a, double b);

// ---------------------------------------------------------------------------
// Poisson approximation error

/// Upper bound sum p_i^2 on the total variation distance between a sum of
/// independent Bernoulli(p_i) indicators and the Poisson law with the same mean.
double le_cam_bound(std::span<const double> probs);

}  // namespace rig
