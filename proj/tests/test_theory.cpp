#include <cmath>
#include <functional>
#include <stdexcept>

#include <doctest.h>

#include "rig/theory.hpp"

using namespace rig;

namespace {

double simpson(const std::function<double(double)>& f, double lo, double hi, int n) {
  if (n % 2 != 0) ++n;
  const double h = (hi - lo) / n;
  double s = f(lo) + f(hi);
  for (int k = 1; k < n; ++k) s += f(lo + k * h) * (k % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

double poisson_at(double lambda, int r) {
  double lp = -lambda + r * std::log(lambda);
  for (int k = 2; k <= r; ++k) lp -= std::log(static_cast<double>(k));
  return std::exp(lp);
}

}  // namespace

TEST_CASE("window rate constants") {
  CHECK(gamma1_constant(1.0, 4.0) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(gamma2_constant(1.0, 4.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(gamma1_constant(0.25, 2.25) == doctest::Approx(2.0 * (1.5 - 0.5)).epsilon(1e-15));
  // 4*nu*(b^(1/2nu) - a^(1/2nu))*(a^(-1/2nu) - b^(-1/2nu)) at nu=2, (1,4).
  const double r = std::sqrt(std::sqrt(2.0) * std::sqrt(2.0));  // 4^(1/4) = sqrt(2)
  CHECK(gamma_power(1.0, 4.0, 2.0) ==
        doctest::Approx(8.0 * (r - 1.0) * (1.0 - 1.0 / r)).epsilon(1e-14));
  // Continuity towards the linear rate as nu -> 1.
  CHECK(std::abs(gamma_power(1.0, 4.0, 1.0 + 1e-7) -
                 gamma1_constant(1.0, 4.0) * gamma2_constant(1.0, 4.0)) < 1e-4);

  CHECK_THROWS_AS((void)gamma1_constant(0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS((void)gamma2_constant(2.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS((void)gamma_power(1.0, 4.0, 1.0), std::invalid_argument);
}

TEST_CASE("two-hop limit recovers closed forms") {
  // For the schedules with closed-form rates the numeric limit must agree.
  const auto lin = gamma_star_estimate({1.0, 4.0, TauFunction::linear()});
  CHECK(std::abs(lin.value - 2.0) < 1e-5);
  const auto pw = gamma_star_estimate({1.0, 4.0, TauFunction::power(2.0)});
  CHECK(std::abs(pw.value - gamma_power(1.0, 4.0, 2.0)) < 1e-6);
}

TEST_CASE("two-hop limit for slowly sparsifying schedules") {
  const auto tlt = gamma_star_estimate({1.0, 4.0, TauFunction::t_log_t()});
  CHECK(std::abs(tlt.value - 2.0) <= 0.05);
  CHECK(tlt.partial[0] < tlt.partial[1]);
  CHECK(tlt.partial[1] < tlt.partial[2]);

  const auto els = gamma_star_estimate({1.0, 4.0, TauFunction::exp_log_squared()});
  CHECK(std::abs(els.value) < 1e-3);

  const auto ex = gamma_star_estimate({1.0, 4.0, TauFunction::exp_t()});
  CHECK(std::abs(ex.value) <= 0.01);
  CHECK(ex.t0 == 170);
}

TEST_CASE("two-hop horizon validation") {
  ModelParams p{1.0, 4.0, TauFunction::exp_t()};
  CHECK_THROWS_AS((void)gamma_star_estimate(p, 2), std::invalid_argument);
  CHECK_THROWS_AS((void)gamma_star_estimate(p, 300), std::invalid_argument);  // exp(1200) overflows
}

TEST_CASE("inverse growth diagnostics") {
  CHECK(inverse_growth_sup(TauFunction::linear()) == doctest::Approx(2.0));
  const double pw = inverse_growth_sup(TauFunction::power(2.0));
  CHECK(pw >= 1.0);
  CHECK(pw <= 2.0);
  const double ex = inverse_growth_sup(TauFunction::exp_t());
  CHECK(ex >= 1.0);
  CHECK(ex <= 2.0);
}

TEST_CASE("limit constant bundle") {
  const auto c = limit_constants({1.0, 4.0, TauFunction::linear()});
  CHECK(c.gamma1 == doctest::Approx(2.0));
  CHECK(c.gamma2 == doctest::Approx(1.0));
  CHECK(c.gamma_tilde == doctest::Approx(1.0));
  CHECK(c.gamma == doctest::Approx(2.0));  // gamma1*gamma2 off the power schedule
  CHECK_FALSE(c.gamma_star.has_value());
  const auto cp = limit_constants({1.0, 4.0, TauFunction::power(2.0)}, true);
  CHECK(cp.gamma == doctest::Approx(gamma_power(1.0, 4.0, 2.0)));
  CHECK(cp.gamma_star.has_value());
}

TEST_CASE("poisson pmf") {
  const auto p = poisson_pmf(2.0, 16);
  CHECK(p.at(3) == doctest::Approx(poisson_at(2.0, 3)).epsilon(1e-12));
  CHECK(p.total() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(p.tail > 0.0);
}

TEST_CASE("mixed poisson with constant mixing is poisson") {
  const auto mix = mixed_poisson_pmf({WeightDistribution::constant(1.3), 2.0}, 24);
  const auto pois = poisson_pmf(2.6, 24);
  for (int r = 0; r <= 24; ++r) CHECK(mix.pmf.at(r) == doctest::Approx(pois.at(r)).epsilon(1e-12));
}

TEST_CASE("mixed poisson with table mixing is a poisson mixture") {
  const auto mix = mixed_poisson_pmf(
      {WeightDistribution::discrete_table({{0.5, 0.4}, {2.0, 0.6}}), 1.5}, 24);
  for (int r = 0; r <= 24; ++r) {
    const double want = 0.4 * poisson_at(0.75, r) + 0.6 * poisson_at(3.0, r);
    CHECK(mix.pmf.at(r) == doctest::Approx(want).epsilon(1e-12));
  }
}

TEST_CASE("mixed poisson with lognormal mixing against quadrature") {
  const double mu = 0.1, sigma = 0.4, scale = 1.2;
  const auto mix = mixed_poisson_pmf({WeightDistribution::lognormal(mu, sigma), scale}, 20);
  CHECK(mix.converged);
  for (int r : {0, 1, 3, 7}) {
    const double oracle = simpson(
        [&](double z) {
          const double phi = std::exp(-0.5 * z * z) / std::sqrt(2.0 * 3.14159265358979323846);
          return poisson_at(scale * std::exp(mu + sigma * z), r) * phi;
        },
        -10.0, 10.0, 8000);
    CHECK(mix.pmf.at(r) == doctest::Approx(oracle).epsilon(1e-7));
  }
  CHECK(mix.pmf.total() == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("mixed poisson with pareto mixing against quadrature") {
  const double alpha = 3.0, xmin = 1.0, scale = 0.8;
  const auto mix = mixed_poisson_pmf({WeightDistribution::pareto(alpha, xmin), scale}, 20);
  for (int r : {0, 2, 5}) {
    // Quantile transform: V = xmin * u^(-1/alpha), u uniform on (0,1).
    const double oracle = simpson(
        [&](double u) {
          if (u <= 0.0) return 0.0;
          return poisson_at(scale * xmin * std::pow(u, -1.0 / alpha), r);
        },
        0.0, 1.0, 400000);
    CHECK(mix.pmf.at(r) == doctest::Approx(oracle).epsilon(1e-5));
  }
}

TEST_CASE("size-biased second-hop law") {
  ModelParams p{1.0, 4.0, TauFunction::linear()};
  // Constant X: the size-biased law of Poisson is the same Poisson.
  const auto k1 = kappa_pmf(p, WeightDistribution::constant(1.0), 1.0, 32);
  const auto pois = poisson_pmf(gamma2_constant(1.0, 4.0), 32);
  for (int r = 0; r <= 32; ++r) CHECK(k1.pmf.at(r) == doctest::Approx(pois.at(r)).epsilon(1e-12));

  // Two-point X: brute-force the size-bias identity.
  const auto dist = WeightDistribution::discrete_table({{0.5, 0.3}, {1.5, 0.7}});
  const double b1 = 1.0, g2 = gamma2_constant(1.0, 4.0);
  const auto k2 = kappa_pmf(p, dist, b1, 32);
  const double mean_rate = g2 * b1 * dist.moment(1);
  for (int r = 0; r <= 30; ++r) {
    const double lam_mass = 0.3 * poisson_at(g2 * b1 * 0.5, r + 1) + 0.7 * poisson_at(g2 * b1 * 1.5, r + 1);
    CHECK(k2.pmf.at(r) == doctest::Approx((r + 1) * lam_mass / mean_rate).epsilon(1e-10));
  }
}

TEST_CASE("compound law by recursion") {
  // Degenerate summands collapse to the counting law itself.  The severity
  // head must reach the requested r_max so the recursion never reads
  // truncated-away mass as zero.
  const auto sev1 = Pmf::point_mass(1, 24);
  const auto comp = compound_poisson_pmf(1.7, sev1, 24);
  const auto pois = poisson_pmf(1.7, 24);
  for (int r = 0; r <= 24; ++r) CHECK(comp.at(r) == doctest::Approx(pois.at(r)).epsilon(1e-12));
  CHECK_THROWS_AS((void)compound_poisson_pmf(1.7, Pmf::point_mass(1, 8), 24),
                  std::invalid_argument);

  // Poisson summands: mass at zero has the closed form exp(-l1*(1 - e^(-l2))).
  const auto sev2 = poisson_pmf(1.0, 64);
  const auto comp2 = compound_poisson_pmf(2.0, sev2, 64);
  CHECK(std::abs(comp2.at(0) - std::exp(-2.0 * (1.0 - std::exp(-1.0)))) < 1e-10);
  CHECK(comp2.total() == doctest::Approx(1.0).epsilon(1e-9));
  // Mean identity E S = lambda E N over the (effectively complete) head.
  CHECK(comp2.mean_head() == doctest::Approx(2.0 * 1.0).epsilon(1e-6));
}

TEST_CASE("limit degree law in the linear regime") {
  ModelParams p{1.0, 4.0, TauFunction::linear()};
  const auto law = degree_limit_pmf(p, WeightDistribution::constant(1.0),
                                    WeightDistribution::constant(1.0), 64);
  CHECK(law.regime == DegreeRegime::Linear);
  CHECK(law.rate == doctest::Approx(2.0));
  CHECK(law.tail_target_met);
  CHECK(law.pmf.at(0) == doctest::Approx(std::exp(-2.0 * (1.0 - std::exp(-1.0)))).epsilon(1e-10));
  CHECK(law.pmf.total() == doctest::Approx(1.0).epsilon(1e-9));

  // Generating-function cross-check at a few interior points.
  for (double z : {0.0, -0.5, 0.5}) {
    const double direct = pmf_pgf_head(law.pmf, z);
    const double closed = degree_limit_pgf(p, WeightDistribution::constant(1.0), 1.0, law.kappa, z);
    CHECK(std::abs(direct - closed) < 1e-8);
  }
}

TEST_CASE("limit degree law in the power regime") {
  ModelParams p{1.0, 4.0, TauFunction::power(2.0)};
  const auto law = degree_limit_pmf(p, WeightDistribution::constant(1.0),
                                    WeightDistribution::constant(1.0), 48);
  CHECK(law.regime == DegreeRegime::Power);
  const auto pois = poisson_pmf(gamma_power(1.0, 4.0, 2.0), 48);
  for (int r = 0; r <= 48; ++r) CHECK(law.pmf.at(r) == doctest::Approx(pois.at(r)).epsilon(1e-12));
}

TEST_CASE("limit degree law with random weights stays normalized") {
  ModelParams p{1.0, 4.0, TauFunction::linear()};
  // Light-tailed weights: the head captures everything at modest r_max.
  // (Lognormal mixing still stretches the tail: at r_max = 48 the true tail
  // is ~6e-10, so the head needs to reach a bit further.)
  const auto light = degree_limit_pmf(p, WeightDistribution::lognormal(0.0, 0.3),
                                      WeightDistribution::lognormal(0.0, 0.4), 80);
  CHECK(light.pmf.total() == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(light.tail_target_met);
  CHECK(light.kappa.total() == doctest::Approx(1.0).epsilon(1e-7));

  // Heavy-tailed actor weights: size-biasing pareto(2.5) leaves a power tail
  // (index 3/2) on the second-hop law, so real mass sits past the head and
  // the truncation flag must say so.
  const auto heavy = degree_limit_pmf(p, WeightDistribution::pareto(2.5, 1.0),
                                      WeightDistribution::lognormal(0.0, 0.4), 48);
  CHECK(heavy.pmf.total() == doctest::Approx(1.0).epsilon(1e-7));
  CHECK_FALSE(heavy.tail_target_met);
  CHECK(heavy.pmf.tail > 1e-6);
}

TEST_CASE("pair witness normalization") {
  ModelParams p{1.0, 4.0, TauFunction::linear()};
  const double want = std::log(4.0 * 500.0 / 600.0) / std::sqrt(500.0 * 600.0);
  CHECK(theta_pair(p, 500, 600) == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("poisson approximation error bound") {
  const double probs[] = {0.1, 0.2};
  CHECK(le_cam_bound(probs) == doctest::Approx(0.05).epsilon(1e-15));
  CHECK(le_cam_bound({}) == doctest::Approx(0.0));

  // Brute-force check on a small Bernoulli sum.
  const int n = 4;
  const double q = 0.25;
  Pmf brute;
  brute.p.assign(n + 1, 0.0);
  for (int mask = 0; mask < (1 << n); ++mask) {
    int ones = 0;
    double pr = 1.0;
    for (int i = 0; i < n; ++i) {
      if (mask >> i & 1) {
        ++ones;
        pr *= q;
      } else {
        pr *= 1.0 - q;
      }
    }
    brute.p[ones] += pr;
  }
  const auto pois = poisson_pmf(n * q, n);
  const double probs4[] = {q, q, q, q};
  CHECK(tv_distance(brute, pois) <= le_cam_bound(probs4));
}
