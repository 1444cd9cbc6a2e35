#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "rig/theory.hpp"

namespace rig {

double gamma1_constant(double a, double b) {
  if (!(a > 0.0) || !(a < b)) throw std::invalid_argument("window constants require 0 < a < b");
  return 2.0 * (std::sqrt(b) - std::sqrt(a));
}

double gamma2_constant(double a, double b) {
  if (!(a > 0.0) || !(a < b)) throw std::invalid_argument("window constants require 0 < a < b");
  return 2.0 * (1.0 / std::sqrt(a) - 1.0 / std::sqrt(b));
}

double gamma_power(double a, double b, double nu) {
  if (!(a > 0.0) || !(a < b)) throw std::invalid_argument("window constants require 0 < a < b");
  if (!(nu > 1.0)) throw std::invalid_argument("power schedule requires nu > 1");
  const double e = 1.0 / (2.0 * nu);
  return 4.0 * nu * (std::pow(b, e) - std::pow(a, e)) * (std::pow(a, -e) - std::pow(b, -e));
}

namespace {

// Window bounds in double space (the schedules can push item indices far
// beyond 64-bit range; the harmonic closed form below absorbs that).
constexpr double kTol = 1e-9;

double window_lo(const ModelParams& p, std::int64_t j) {
  const double v = p.a * p.tau(j);
  if (!std::isfinite(v)) return v;  // overflow: the window starts past any finite horizon
  return std::max(1.0, std::ceil(v - kTol * std::max(1.0, v)));
}

double window_hi(const ModelParams& p, std::int64_t j) {
  const double v = p.b * p.tau(j);
  if (!std::isfinite(v)) return v;
  return std::floor(v + kTol * std::max(1.0, v));
}

// H(n) = sum_{k<=n} 1/k.  Exact table for small n, asymptotic expansion
// (error O(n^-6)) beyond it; n is an integral-valued double.
double harmonic(double n) {
  if (n < 1.0) return 0.0;
  static const std::vector<double> table = [] {
    std::vector<double> h(1 << 16);
    h[0] = 0.0;
    for (std::size_t k = 1; k < h.size(); ++k) h[k] = h[k - 1] + 1.0 / static_cast<double>(k);
    return h;
  }();
  if (n < static_cast<double>(table.size()))
    return table[static_cast<std::size_t>(n)];
  constexpr double kEulerMascheroni = 0.57721566490153286;
  const double inv = 1.0 / n;
  const double inv2 = inv * inv;
  return std::log(n) + kEulerMascheroni + 0.5 * inv - inv2 / 12.0 + inv2 * inv2 / 120.0;
}

// Normalized two-hop window sum
//   S(t) = t^(-1/2) sum_{i in T_t} i^(-1) sum_{j: i in T_j} j^(-1/2),
// evaluated with the sums flipped: each overlapping actor j contributes
// j^(-1/2) * (H(hi) - H(lo-1)) over the window intersection [lo, hi].
double two_hop_sum(const ModelParams& p, std::int64_t t) {
  const double t_lo = window_lo(p, t);
  const double t_hi = window_hi(p, t);
  if (!(t_hi >= t_lo)) return 0.0;
  if (!std::isfinite(t_hi)) throw std::invalid_argument("horizon too large for the schedule");

  // Overlap range of j: window_hi(j) >= t_lo and window_lo(j) <= t_hi.
  auto first_with = [&](auto&& pred) {
    std::int64_t lo = 0, hi = 1;
    while (!pred(hi)) {
      lo = hi;
      hi *= 2;
      if (hi > (std::int64_t{1} << 50)) throw std::invalid_argument("overlap range too large");
    }
    while (hi - lo > 1) {
      const std::int64_t mid = lo + (hi - lo) / 2;
      (mid >= 1 && pred(mid) ? hi : lo) = mid;
    }
    return hi;
  };
  const std::int64_t j_lo = first_with([&](std::int64_t j) { return window_hi(p, j) >= t_lo; });
  std::int64_t j_hi = j_lo;
  {
    std::int64_t lo = j_lo, hi = j_lo;
    while (window_lo(p, hi) <= t_hi) {
      lo = hi;
      hi *= 2;
      if (hi > (std::int64_t{1} << 50)) throw std::invalid_argument("overlap range too large");
    }
    while (hi - lo > 1) {
      const std::int64_t mid = lo + (hi - lo) / 2;
      (window_lo(p, mid) <= t_hi ? lo : hi) = mid;
    }
    j_hi = lo;
  }

  double s = 0.0;
  for (std::int64_t j = j_lo; j <= j_hi; ++j) {
    const double lo = std::max(window_lo(p, j), t_lo);
    const double hi = std::min(window_hi(p, j), t_hi);
    if (hi < lo) continue;
    const double inner = harmonic(hi) - harmonic(lo - 1.0);
    if (inner > 0.0) s += inner / std::sqrt(static_cast<double>(j));
  }
  return s / std::sqrt(static_cast<double>(t));
}

std::int64_t default_t0(const TauFunction& tau) {
  // The exp schedule overflows double past t ~ 700; everything else affords a
  // large horizon cheaply.
  return tau.kind == TauKind::Exp ? 170 : 262144;
}

}  // namespace

GammaStarEstimate gamma_star_estimate(const ModelParams& params, std::int64_t t0) {
  params.validate();
  if (t0 == 0) t0 = default_t0(params.tau);
  if (t0 < 4) throw std::invalid_argument("gamma* horizon must be >= 4");
  if (!std::isfinite(params.tau(4 * t0)) || !std::isfinite(params.b * params.tau(4 * t0)))
    throw std::invalid_argument("horizon too large for the schedule");

  GammaStarEstimate est;
  est.t0 = t0;
  est.partial = {two_hop_sum(params, t0), two_hop_sum(params, 2 * t0),
                 two_hop_sum(params, 4 * t0)};

  // The residual S(t) - limit decays at a schedule-dependent rate: like
  // t^(-1/2) when the window spans polynomially many actors, like 1/log(t)
  // for the barely-superlinear schedules (t log t, exp(log^2 t)) whose
  // overlap counts grow only logarithmically, and like 1/t for the exp
  // schedule whose windows hold O(1) actors.  Fitting the quadratic in the
  // matching variable x(t) through the three horizon points and reading it
  // off at x = 0 removes the two leading correction terms.
  const auto accel_x = [&](std::int64_t t) {
    switch (params.tau.kind) {
      case TauKind::Exp: return 1.0 / static_cast<double>(t);
      case TauKind::TLogT:
      case TauKind::ExpLogSquared: return 1.0 / std::log(static_cast<double>(t));
      default: return 1.0 / std::sqrt(static_cast<double>(t));
    }
  };
  const double x1 = accel_x(t0), x2 = accel_x(2 * t0), x3 = accel_x(4 * t0);
  const double s1 = est.partial[0], s2 = est.partial[1], s3 = est.partial[2];
  est.value = s1 * (x2 * x3) / ((x1 - x2) * (x1 - x3)) -
              s2 * (x1 * x3) / ((x1 - x2) * (x2 - x3)) +
              s3 * (x1 * x2) / ((x1 - x3) * (x2 - x3));
  // Distance to the straight-line extrapolation through the last two points
  // bounds what the curvature term is still contributing.
  const double linear = s3 + x3 * (s3 - s2) / (x2 - x3);
  est.error_estimate = std::abs(est.value - linear);
  return est;
}

double inverse_growth_sup(const TauFunction& tau) {
  double sup = 0.0;
  double v = std::max(tau(2), 1e-6);
  for (int k = 0; k < 48; ++k) {
    const std::int64_t n1 = tau_floor_inverse(tau, v);
    const std::int64_t n2 = tau_floor_inverse(tau, 2.0 * v);
    if (n1 >= 1) sup = std::max(sup, static_cast<double>(n2) / static_cast<double>(n1));
    if (n2 > (std::int64_t{1} << 40)) break;
    v *= 2.0;
    if (!(v < 1e300) || !std::isfinite(tau(2) + v)) break;
  }
  return sup;
}

LimitConstants limit_constants(const ModelParams& params, bool with_gamma_star,
                               std::int64_t gamma_star_t0) {
  params.validate();
  LimitConstants c;
  c.gamma1 = gamma1_constant(params.a, params.b);
  c.gamma2 = gamma2_constant(params.a, params.b);
  c.gamma_tilde = c.gamma2;
  c.gamma = params.tau.kind == TauKind::Power ? gamma_power(params.a, params.b, params.tau.nu)
                                              : c.gamma1 * c.gamma2;
  if (with_gamma_star) c.gamma_star = gamma_star_estimate(params, gamma_star_t0);
  return c;
}

}  // namespace rig
