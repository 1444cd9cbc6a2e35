#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "rig/theory.hpp"

namespace rig {

namespace {

// 15-point Gauss-Legendre rule on [-1, 1] (node 0 listed once).
constexpr std::array<double, 8> kGlNode = {0.0,
                                           0.2011940939974345,
                                           0.3941513470775634,
                                           0.5709721726085388,
                                           0.7244177313601701,
                                           0.8482065834104272,
                                           0.9372733924007060,
                                           0.9879925180204854};
constexpr std::array<double, 8> kGlWeight = {0.2025782419255613, 0.1984314853271116,
                                             0.1861610000155622, 0.1662692058169939,
                                             0.1395706779261543, 0.1071592204671719,
                                             0.0703660474881081, 0.0307532419961173};

// Half-width of the standard-normal integration range for lognormal mixing;
// the omitted mass is Phi(-12) ~ 1.8e-33.
constexpr double kZSpan = 12.0;
constexpr double kInvSqrt2Pi = 0.3989422804014327;

struct MixAccum {
  std::vector<double> value;
  double achieved = 0.0;
  bool converged = true;
};

// E_{V~dist} f(V) for a vector-valued f, accumulated via eval(v, weight, acc).
// Point laws are summed exactly; continuous laws integrate with adaptive
// panel-splitting Gauss-Legendre over a unit parameter whose point weights
// are probability masses, so truncation error is bounded by untouched mass.
// Pareto uses the quantile transform u -> xmin (1-u)^(-1/alpha) (the Poisson
// heads vanish once the rate is huge, which tames the endpoint); lognormal
// integrates in the underlying normal variable, where the integrand is
// smooth -- its quantile has a singular derivative at both ends.
template <class Eval>
MixAccum mix_over(const WeightDistribution& dist, std::size_t size, double rel_tol, Eval&& eval) {
  MixAccum out;
  out.value.assign(size, 0.0);
  if (dist.kind() == WeightKind::Constant) {
    eval(dist.constant_value(), 1.0, out.value);
    return out;
  }
  if (dist.kind() == WeightKind::DiscreteTable) {
    for (const auto& [v, p] : dist.table()) eval(v, p, out.value);
    return out;
  }

  std::function<void(double, double, std::vector<double>&)> point;
  if (dist.kind() == WeightKind::Pareto) {
    const double alpha = dist.pareto_alpha(), xmin = dist.pareto_xmin();
    point = [&eval, alpha, xmin](double u, double qw, std::vector<double>& acc) {
      eval(xmin * std::pow(1.0 - u, -1.0 / alpha), qw, acc);
    };
  } else if (dist.kind() == WeightKind::Lognormal) {
    const double mu = dist.lognormal_mu(), sigma = dist.lognormal_sigma();
    point = [&eval, mu, sigma](double u, double qw, std::vector<double>& acc) {
      const double z = kZSpan * (2.0 * u - 1.0);
      const double mass = 2.0 * kZSpan * kInvSqrt2Pi * std::exp(-0.5 * z * z);
      eval(std::exp(mu + sigma * z), qw * mass, acc);
    };
  } else {
    throw std::logic_error("mixing integral is only defined for continuous laws");
  }

  auto panel = [&](double lo, double hi, std::vector<double>& acc) {
    const double mid = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    point(mid, kGlWeight[0] * half, acc);
    for (std::size_t k = 1; k < kGlNode.size(); ++k) {
      const double d = half * kGlNode[k];
      point(mid - d, kGlWeight[k] * half, acc);
      point(mid + d, kGlWeight[k] * half, acc);
    }
  };

  struct Seg {
    double lo, hi;
    int depth;
  };
  std::vector<Seg> stack{{0.0, 1.0, 0}};
  std::vector<double> whole, halves;
  int panels = 0;
  while (!stack.empty()) {
    const Seg seg = stack.back();
    stack.pop_back();
    ++panels;
    whole.assign(size, 0.0);
    halves.assign(size, 0.0);
    const double mid = 0.5 * (seg.lo + seg.hi);
    panel(seg.lo, seg.hi, whole);
    panel(seg.lo, mid, halves);
    panel(mid, seg.hi, halves);
    double err = 0.0;
    for (std::size_t i = 0; i < size; ++i) err = std::max(err, std::abs(whole[i] - halves[i]));
    const bool forced = seg.depth >= 48 || panels > 20000;
    if (err <= rel_tol * (seg.hi - seg.lo) || forced) {
      if (forced && err > rel_tol * (seg.hi - seg.lo)) out.converged = false;
      for (std::size_t i = 0; i < size; ++i) out.value[i] += halves[i];
      out.achieved += err;
    } else {
      stack.push_back({seg.lo, mid, seg.depth + 1});
      stack.push_back({mid, seg.hi, seg.depth + 1});
    }
  }
  return out;
}

// acc[r] += w * P(Poisson(lambda) = r), via forward recurrence when exp(-lambda)
// is representable, log space otherwise; heads past lambda ~ 1490 underflow to 0.
void add_poisson(std::vector<double>& acc, double lambda, double w) {
  if (!(lambda >= 0.0)) throw std::invalid_argument("poisson rate must be >= 0");
  if (lambda == 0.0) {
    acc[0] += w;
    return;
  }
  if (lambda > 1490.0) return;
  const std::size_t n = acc.size();
  if (lambda < 700.0) {
    double p = std::exp(-lambda);
    for (std::size_t r = 0; r < n; ++r) {
      acc[r] += w * p;
      p *= lambda / static_cast<double>(r + 1);
    }
  } else {
    const double log_lam = std::log(lambda);
    double log_fact = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      if (r > 0) log_fact += std::log(static_cast<double>(r));
      acc[r] += w * std::exp(-lambda + static_cast<double>(r) * log_lam - log_fact);
    }
  }
}

void finalize_tail(Pmf& pmf) { pmf.tail = std::max(0.0, 1.0 - pmf.head_mass()); }

}  // namespace

MixResult mixed_poisson_pmf(const MixingLaw& law, int r_max, double rel_tol) {
  if (r_max < 0) throw std::invalid_argument("r_max must be >= 0");
  if (!(law.scale >= 0.0) || !std::isfinite(law.scale))
    throw std::invalid_argument("mixing scale must be finite and >= 0");
  MixAccum acc = mix_over(
      law.dist, static_cast<std::size_t>(r_max) + 1, rel_tol,
      [&](double v, double w, std::vector<double>& out) { add_poisson(out, law.scale * v, w); });
  MixResult res;
  res.pmf.p = std::move(acc.value);
  finalize_tail(res.pmf);
  res.achieved_rel_error = acc.achieved;
  res.converged = acc.converged;
  return res;
}

MixResult kappa_pmf(const ModelParams& params, const WeightDistribution& x_dist, double b1,
                    int r_max) {
  params.validate();
  if (r_max < 0) throw std::invalid_argument("r_max must be >= 0");
  if (!(b1 > 0.0) || !std::isfinite(b1)) throw std::invalid_argument("kappa law requires E Y > 0");
  const double a1 = x_dist.moment(1);
  if (!(a1 > 0.0)) throw std::invalid_argument("kappa law requires E X > 0");
  const double g2 = gamma2_constant(params.a, params.b);

  const MixResult lam2 = mixed_poisson_pmf({x_dist, g2 * b1}, r_max + 1);
  const double mean = g2 * b1 * a1;

  MixResult res;
  res.pmf.p.resize(static_cast<std::size_t>(r_max) + 1);
  for (int r = 0; r <= r_max; ++r)
    res.pmf.p[static_cast<std::size_t>(r)] = (r + 1) * lam2.pmf.at(r + 1) / mean;
  finalize_tail(res.pmf);
  res.achieved_rel_error = lam2.achieved_rel_error;
  res.converged = lam2.converged;
  return res;
}

Pmf compound_poisson_pmf(double lambda, const Pmf& severity, int r_max) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw std::invalid_argument("compound rate must be finite and >= 0");
  if (r_max < 0) throw std::invalid_argument("r_max must be >= 0");
  if (std::abs(severity.total() - 1.0) > 1e-6)
    throw std::invalid_argument("severity must be a normalized pmf");
  if (severity.r_max() < r_max)
    throw std::invalid_argument("severity head must extend to r_max");

  Pmf g;
  g.p.assign(static_cast<std::size_t>(r_max) + 1, 0.0);
  g.p[0] = std::exp(-lambda * (1.0 - severity.at(0)));
  for (int s = 1; s <= r_max; ++s) {
    double sum = 0.0;
    for (int j = 1; j <= s; ++j) sum += j * severity.at(j) * g.p[static_cast<std::size_t>(s - j)];
    g.p[static_cast<std::size_t>(s)] = lambda * sum / s;
  }
  finalize_tail(g);
  return g;
}

DegreeLimitLaw degree_limit_pmf(const ModelParams& params, const WeightDistribution& x_dist,
                                const WeightDistribution& y_dist, int r_max) {
  params.validate();
  if (r_max < 0) throw std::invalid_argument("r_max must be >= 0");

  DegreeLimitLaw law;
  if (params.tau.kind == TauKind::Linear) {
    law.regime = DegreeRegime::Linear;
    const double a1 = x_dist.moment(1);
    const double b1 = y_dist.moment(1);
    law.gamma_used = gamma1_constant(params.a, params.b);
    law.rate = law.gamma_used * a1;

    MixResult kap = kappa_pmf(params, x_dist, b1, r_max);
    law.kappa = std::move(kap.pmf);

    MixAccum mixed =
        mix_over(y_dist, static_cast<std::size_t>(r_max) + 1, 1e-9,
                 [&](double y, double w, std::vector<double>& acc) {
                   const Pmf comp = compound_poisson_pmf(law.rate * y, law.kappa, r_max);
                   for (std::size_t r = 0; r < acc.size(); ++r) acc[r] += w * comp.p[r];
                 });
    law.pmf.p = std::move(mixed.value);
    finalize_tail(law.pmf);
    law.achieved_rel_error = kap.achieved_rel_error + mixed.achieved;
  } else {
    law.regime = DegreeRegime::Power;
    law.gamma_used = params.tau.kind == TauKind::Power
                         ? gamma_power(params.a, params.b, params.tau.nu)
                         : gamma_star_estimate(params).value;
    const double a2 = x_dist.moment(2);
    const double b1 = y_dist.moment(1);
    law.rate = law.gamma_used * a2 * b1;
    MixResult m = mixed_poisson_pmf({y_dist, law.rate}, r_max);
    law.pmf = std::move(m.pmf);
    law.achieved_rel_error = m.achieved_rel_error;
  }
  law.tail_target_met = law.pmf.tail <= std::max(1e-12, 100.0 * law.achieved_rel_error);
  return law;
}

double degree_limit_pgf(const ModelParams& params, const WeightDistribution& y_dist, double a1,
                        const Pmf& kappa, double z) {
  params.validate();
  if (!(std::abs(z) <= 1.0)) throw std::invalid_argument("pgf argument must satisfy |z| <= 1");
  const double g1 = gamma1_constant(params.a, params.b);
  const double gk = pmf_pgf_head(kappa, z);
  MixAccum acc = mix_over(y_dist, 1, 1e-11, [&](double y, double w, std::vector<double>& out) {
    out[0] += w * std::exp(g1 * a1 * y * (gk - 1.0));
  });
  return acc.value[0];
}

double pmf_pgf_head(const Pmf& pmf, double z) {
  double res = 0.0;
  for (int r = pmf.r_max(); r >= 0; --r) res = res * z + pmf.at(r);
  return res;
}

}  // namespace rig
