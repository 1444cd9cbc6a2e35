#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include <doctest.h>

#include "rig/model.hpp"
#include "rig/rng.hpp"
#include "rig/weights.hpp"

using namespace rig;

namespace {

// Composite Simpson on [lo, hi].
double simpson(const std::function<double(double)>& f, double lo, double hi, int n) {
  if (n % 2 != 0) ++n;
  const double h = (hi - lo) / n;
  double s = f(lo) + f(hi);
  for (int k = 1; k < n; ++k) s += f(lo + k * h) * (k % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

}  // namespace

TEST_CASE("constant weights") {
  const auto d = WeightDistribution::constant(1.5);
  CHECK(d.is_deterministic());
  CHECK(d.constant_value() == doctest::Approx(1.5));
  CHECK(d.moment(3) == doctest::Approx(1.5 * 1.5 * 1.5));
  RandomStream rs(1);
  CHECK(d.sample(rs) == doctest::Approx(1.5));
}

TEST_CASE("pareto moments against quadrature") {
  const double alpha = 3.0, xmin = 2.0;
  const auto d = WeightDistribution::pareto(alpha, xmin);
  // E X^k = integral of x^k * alpha xmin^alpha x^(-alpha-1); substitute
  // x = xmin/u so the domain becomes (0, 1].
  for (int k = 1; k <= 2; ++k) {
    const double oracle = simpson(
        [&](double u) {
          // pow(0, 0) == 1 gives the right endpoint limit when k == alpha - 1.
          return alpha * std::pow(xmin, static_cast<double>(k)) *
                 std::pow(u, alpha - k - 1.0);
        },
        0.0, 1.0, 200000);
    CHECK(d.moment(k) == doctest::Approx(oracle).epsilon(1e-6));
  }
  CHECK(d.moment_finite(2));
  CHECK_FALSE(d.moment_finite(3));
  CHECK_THROWS_AS((void)d.moment(3), InfiniteMomentError);
}

TEST_CASE("lognormal moments against quadrature") {
  const double mu = 0.25, sigma = 0.5;
  const auto d = WeightDistribution::lognormal(mu, sigma);
  for (int k = 1; k <= 3; ++k) {
    const double oracle = simpson(
        [&](double z) {
          const double phi = std::exp(-0.5 * z * z) / std::sqrt(2.0 * 3.14159265358979323846);
          return std::exp(k * (mu + sigma * z)) * phi;
        },
        -12.0, 12.0, 20000);
    CHECK(d.moment(k) == doctest::Approx(oracle).epsilon(1e-9));
  }
  CHECK(d.moment_finite(40));  // every moment exists
}

TEST_CASE("discrete table moments and sampling frequencies") {
  const auto d = WeightDistribution::discrete_table({{1.0, 0.3}, {2.0, 0.45}, {4.0, 0.25}});
  CHECK(d.moment(1) == doctest::Approx(0.3 + 0.9 + 1.0).epsilon(1e-12));
  CHECK(d.moment(2) == doctest::Approx(0.3 + 4.0 * 0.45 + 16.0 * 0.25).epsilon(1e-12));

  RandomStream rs(7);
  const int n = 100000;
  int counts[3] = {0, 0, 0};
  for (int i = 0; i < n; ++i) {
    const double v = d.sample(rs);
    if (v == 1.0) ++counts[0];
    else if (v == 2.0) ++counts[1];
    else if (v == 4.0) ++counts[2];
    else FAIL("unexpected atom");
  }
  const double expect[3] = {0.3 * n, 0.45 * n, 0.25 * n};
  double chi = 0.0;
  for (int c = 0; c < 3; ++c) chi += (counts[c] - expect[c]) * (counts[c] - expect[c]) / expect[c];
  CHECK(chi < 13.8);  // dof 2, far tail
}

TEST_CASE("law of large numbers for samples") {
  const auto d = WeightDistribution::lognormal(0.0, 0.75);
  RandomStream rs(11);
  const int n = 200000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += d.sample(rs);
  const double mean = sum / n;
  const double sd = std::sqrt(d.moment(2) - d.moment(1) * d.moment(1));
  CHECK(std::abs(mean - d.moment(1)) < 4.5 * sd / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("weight spec parsing") {
  CHECK(WeightDistribution::parse("constant(2.5)").constant_value() == doctest::Approx(2.5));
  const auto p = WeightDistribution::parse("pareto(3, 2)");
  CHECK(p.pareto_alpha() == doctest::Approx(3.0));
  CHECK(p.pareto_xmin() == doctest::Approx(2.0));
  const auto l = WeightDistribution::parse("lognormal(0.25, 0.5)");
  CHECK(l.lognormal_mu() == doctest::Approx(0.25));
  CHECK(l.lognormal_sigma() == doctest::Approx(0.5));
  const auto t = WeightDistribution::parse("discrete((1,0.5),(3,0.5))");
  CHECK(t.kind() == WeightKind::DiscreteTable);
  CHECK(t.moment(1) == doctest::Approx(2.0));

  CHECK_THROWS_AS((void)WeightDistribution::parse("cauchy(1)"), std::invalid_argument);
  CHECK_THROWS_AS((void)WeightDistribution::parse("pareto"), std::invalid_argument);
  CHECK_THROWS_AS((void)WeightDistribution::parse("pareto(-1, 2)"), std::invalid_argument);
  CHECK_THROWS_AS((void)WeightDistribution::parse("constant(-3)"), std::invalid_argument);
  CHECK_THROWS_AS((void)WeightDistribution::parse("discrete()"), std::invalid_argument);
}

TEST_CASE("parse and describe round-trip") {
  for (const char* spec : {"constant(1.5)", "pareto(2.5,1)", "lognormal(0,0.25)",
                           "discrete((1,0.25),(2,0.75))"}) {
    const auto d = WeightDistribution::parse(spec);
    const auto d2 = WeightDistribution::parse(d.describe());
    CHECK(d2.kind() == d.kind());
    CHECK(d2.moment(1) == doctest::Approx(d.moment(1)).epsilon(1e-12));
  }
}

TEST_CASE("sample_range matches sequential sampling") {
  const auto d = WeightDistribution::pareto(2.5, 1.0);
  RandomStream a(42), b(42);
  const auto vec = d.sample_range(10, 29, a);
  REQUIRE(vec.size() == 20);
  for (double v : vec) CHECK(v == doctest::Approx(d.sample(b)).epsilon(1e-15));
}

TEST_CASE("weight vectors index by absolute position") {
  WeightVector w;
  w.first = 5;
  w.values = {1.0, 2.0, 3.0};
  CHECK(w.last() == 7);
  CHECK(w.covers(5, 7));
  CHECK_FALSE(w.covers(4, 7));
  CHECK(w.at(6) == doctest::Approx(2.0));

  const auto c = WeightVector::constant(0.5, 3, 10);
  CHECK(c.first == 3);
  CHECK(c.last() == 10);
  CHECK(c.at(9) == doctest::Approx(0.5));
}

TEST_CASE("weight field range maxima match brute force") {
  RandomStream rs(3);
  const auto d = WeightDistribution::lognormal(0.0, 1.0);
  WeightVector w;
  w.first = 7;
  w.values = d.sample_range(7, 206, rs);
  const WeightField f = WeightField::realized(w);
  for (std::int64_t lo = 7; lo <= 206; lo += 13) {
    for (std::int64_t hi = lo; hi <= 206; hi += 17) {
      double m = 0.0;
      for (std::int64_t i = lo; i <= hi; ++i) m = std::max(m, w.at(i));
      CHECK(f.range_max(lo, hi) == doctest::Approx(m).epsilon(1e-15));
    }
  }
  const WeightField c = WeightField::constant(2.0);
  CHECK(c.range_max(1, 1000000) == doctest::Approx(2.0));
  CHECK(c.at(123456) == doctest::Approx(2.0));
}
