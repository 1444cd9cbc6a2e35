#include <cmath>
#include <cstdio>
#include <string>

#include <doctest.h>

#include "rig/rng.hpp"
#include "rig/stats.hpp"

using namespace rig;

TEST_CASE("wilson interval fixtures") {
  const auto empty = wilson_ci(0, 0, 0.95);
  CHECK(empty.lo == doctest::Approx(0.0));
  CHECK(empty.hi == doctest::Approx(1.0));

  // Hand evaluation of the score interval at z = 1.959963984540054.
  const double z = 1.959963984540054;
  const double n = 10.0, ph = 0.5;
  const double denom = 1.0 + z * z / n;
  const double center = (ph + z * z / (2.0 * n)) / denom;
  const double half = z * std::sqrt(ph * (1.0 - ph) / n + z * z / (4.0 * n * n)) / denom;
  const auto ci = wilson_ci(5, 10, 0.95);
  CHECK(ci.lo == doctest::Approx(center - half).epsilon(1e-12));
  CHECK(ci.hi == doctest::Approx(center + half).epsilon(1e-12));

  const auto all = wilson_ci(20, 20, 0.95);
  CHECK(all.hi == doctest::Approx(1.0));
  CHECK(all.lo > 0.8);
  CHECK(wilson_ci(3, 10, 0.95).lo < wilson_ci(6, 10, 0.95).lo);
  // Wider confidence, wider interval.
  CHECK(wilson_ci(5, 10, 0.999).lo < wilson_ci(5, 10, 0.95).lo);
}

TEST_CASE("wilson interval coverage") {
  const double p = 0.3;
  const int experiments = 400, n = 200;
  int covered = 0;
  RandomStream rs(99);
  for (int e = 0; e < experiments; ++e) {
    std::int64_t succ = 0;
    for (int i = 0; i < n; ++i) succ += rs.bernoulli(p) ? 1 : 0;
    const auto ci = wilson_ci(succ, n, 0.95);
    if (ci.lo <= p && p <= ci.hi) ++covered;
  }
  CHECK(covered >= 0.90 * experiments);
}

TEST_CASE("chi-square tail fixtures") {
  CHECK(chi_square_tail(3.841458820694124, 1) == doctest::Approx(0.05).epsilon(1e-6));
  CHECK(chi_square_tail(5.991464547107979, 2) == doctest::Approx(0.05).epsilon(1e-6));
  // Q(5, 5) = e^-5 * (1 + 5 + 12.5 + 125/6 + 625/24).
  const double want = std::exp(-5.0) * (1.0 + 5.0 + 12.5 + 125.0 / 6.0 + 625.0 / 24.0);
  CHECK(chi_square_tail(10.0, 10) == doctest::Approx(want).epsilon(1e-10));
  CHECK(chi_square_tail(0.0, 4) == doctest::Approx(1.0));
}

TEST_CASE("total variation distance") {
  Pmf a{{1.0, 0.0}, 0.0};
  Pmf b{{0.0, 1.0}, 0.0};
  CHECK(tv_distance(a, b) == doctest::Approx(1.0));
  CHECK(tv_distance(a, a) == doctest::Approx(0.0));

  // Different head lengths: the long head is folded into the short tail.
  Pmf c{{0.5}, 0.5};
  Pmf d{{0.5, 0.25, 0.25}, 0.0};
  CHECK(tv_distance(c, d) == doctest::Approx(0.0));
  Pmf e{{0.25}, 0.75};
  CHECK(tv_distance(c, e) == doctest::Approx(0.25));
}

TEST_CASE("goodness of fit fixtures") {
  Pmf q{{0.25, 0.75}, 0.0};
  Pmf p{{0.5, 0.5}, 0.0};
  const auto same = gof_metrics(q, q, 1000);
  CHECK(same.tv == doctest::Approx(0.0));
  CHECK(same.p_value == doctest::Approx(1.0));

  const auto off = gof_metrics(p, q, 100);
  CHECK(off.tv == doctest::Approx(0.25));
  CHECK(off.chi_square_valid);
  CHECK(off.chi_square == doctest::Approx(25.0 + 625.0 / 75.0).epsilon(1e-9));
  CHECK(off.p_value < 1e-6);

  std::vector<std::int64_t> counts = {50, 50};
  const auto fromc = gof_counts(counts, 100, q);
  CHECK(fromc.chi_square == doctest::Approx(off.chi_square).epsilon(1e-12));
}

TEST_CASE("report serialization") {
  ExperimentReport rep;
  rep.kind = "degree";
  rep.config = {{"t", 50}, {"seed", 1729}};
  rep.seed = 1729;
  rep.n_rep = 10;
  rep.n_completed = 10;
  rep.threads = 3;
  rep.duration_seconds = 5.25;
  rep.estimates["mean_degree"] = 2.0;
  CsvRow row;
  row.quantity = "mean_degree";
  row.estimate = 0.1 + 0.2;  // forces a long decimal
  row.n_rep = 10;
  row.seed = 1729;
  rep.rows.push_back(row);

  const std::string js = report_to_json(rep);
  CHECK(js.find("duration") == std::string::npos);
  CHECK(js.find("\"threads\"") == std::string::npos);
  CHECK(js.find("mean_degree") != std::string::npos);

  const std::string rt = runtime_to_json(rep);
  CHECK(rt.find("duration_seconds") != std::string::npos);
  CHECK(rt.find("\"threads\": 3") != std::string::npos);

  const std::string csv = report_to_csv(rep);
  CHECK(csv.find("# t = 50") != std::string::npos);
  CHECK(csv.find("quantity,") != std::string::npos);
  // %.17g output must round-trip to the exact double.
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", 0.1 + 0.2);
  CHECK(csv.find(buf) != std::string::npos);
}
