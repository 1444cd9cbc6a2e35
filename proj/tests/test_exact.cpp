#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include <doctest.h>

#include "rig/model.hpp"
#include "rig/rng.hpp"
#include "rig/stats.hpp"
#include "rig/theory.hpp"

using namespace rig;

namespace {

// All potential links (item, actor, probability) touching the given actors'
// windows, restricting the actor side to the listed actors.
struct Link {
  std::int64_t item, actor;
  double prob;
};

}  // namespace

TEST_CASE("pair probability closed cases") {
  ModelParams p{1.0, 4.0, TauFunction::linear()};
  const auto x = WeightVector::constant(1.0, 1, 64);

  // Disjoint lifetimes: t > 4s leaves no shared item.
  CHECK(exact_pair_prob_xy(p, x, 1.0, 1.0, 2, 9) == 0.0);

  // Exactly one shared item (12 for the pair (3, 12)):
  // p = p_{12,3} * p_{12,12} = (1/6) * (1/12).
  const double one = exact_pair_prob_xy(p, x, 1.0, 1.0, 3, 12);
  CHECK(one == doctest::Approx(1.0 / 72.0).epsilon(1e-14));

  // Full-vector entry point agrees.
  const auto y = WeightVector::constant(1.0, 1, 64);
  CHECK(exact_pair_prob(p, x, y, 3, 12) == doctest::Approx(one).epsilon(1e-15));

  // Saturated probabilities force adjacency.
  const auto xs = WeightVector::constant(50.0, 1, 64);
  CHECK(exact_pair_prob_xy(p, xs, 50.0, 50.0, 3, 5) == doctest::Approx(1.0));
}

TEST_CASE("pair probability matches a brute-force product") {
  ModelParams p{1.0, 4.0, TauFunction::linear()};
  RandomStream rs(12);
  WeightVector x;
  x.first = 1;
  x.values = WeightDistribution::lognormal(0.0, 0.5).sample_range(1, 64, rs);
  const std::int64_t s = 5, t = 11;
  const IndexInterval shared = intersect(item_window(p, s), item_window(p, t));
  REQUIRE_FALSE(shared.empty());
  double miss = 1.0;
  for (std::int64_t k = shared.lo; k <= shared.hi; ++k) {
    const double ps = std::min(1.0, x.at(k) * 0.9 / std::sqrt(static_cast<double>(k * s)));
    const double pt = std::min(1.0, x.at(k) * 1.1 / std::sqrt(static_cast<double>(k * t)));
    miss *= 1.0 - ps * pt;
  }
  CHECK(exact_pair_prob_xy(p, x, 0.9, 1.1, s, t) == doctest::Approx(1.0 - miss).epsilon(1e-13));
}

TEST_CASE("two-hop path count law by exhaustive enumeration") {
  // Actor 4 under half/double windows: 19 potential links, small enough to
  // enumerate every outcome.
  ModelParams p{1.0, 2.0, TauFunction::linear()};
  const double wx = 0.8, wy = 0.8;
  const auto x = WeightVector::constant(wx, 1, 16);
  const auto y = WeightVector::constant(wy, 1, 16);
  const std::int64_t t = 4;

  const IndexInterval tw = item_window(p, t);
  std::vector<Link> links;
  for (std::int64_t i = tw.lo; i <= tw.hi; ++i) {
    const IndexInterval aw = actor_window(p, i);
    for (std::int64_t j = aw.lo; j <= aw.hi; ++j) {
      links.push_back({i, j, edge_probability_in_window(wx, wy, i, j)});
    }
  }
  REQUIRE(links.size() == 19);

  std::vector<double> brute(32, 0.0);
  for (std::size_t mask = 0; mask < (std::size_t{1} << links.size()); ++mask) {
    double pr = 1.0;
    for (std::size_t l = 0; l < links.size(); ++l)
      pr *= (mask >> l & 1) ? links[l].prob : 1.0 - links[l].prob;
    std::int64_t paths = 0;
    for (std::size_t l = 0; l < links.size(); ++l) {
      if (links[l].actor != t || !(mask >> l & 1)) continue;
      for (std::size_t m2 = 0; m2 < links.size(); ++m2)
        if (links[m2].item == links[l].item && links[m2].actor != t && (mask >> m2 & 1)) ++paths;
    }
    brute[static_cast<std::size_t>(paths)] += pr;
  }

  const Pmf got = exact_path2_pmf(p, x, y, t, 20);
  for (int r = 0; r <= 20; ++r) CHECK(got.at(r) == doctest::Approx(brute[r]).epsilon(1e-11));
  CHECK(got.total() == doctest::Approx(1.0).epsilon(1e-12));

  // Mean identity against the direct double sum.
  double mean = 0.0;
  for (int r = 1; r < static_cast<int>(brute.size()); ++r) mean += r * brute[r];
  CHECK(exact_path2_mean(p, x, y, t) == doctest::Approx(mean).epsilon(1e-11));
  CHECK(got.mean_head() == doctest::Approx(mean).epsilon(1e-10));
}

TEST_CASE("two-hop path count hand fixture") {
  // Tight windows around actor 5: item 5 pairs it with nobody, item 6 links
  // it to actor 6 alone, so the path count is Bernoulli(p_{6,5} p_{6,6}).
  ModelParams p{1.0, 1.2, TauFunction::linear()};
  WeightVector x;
  x.first = 1;
  x.values.assign(8, 1.0);
  x.values[5] = 1.8;  // item 6
  WeightVector y;
  y.first = 1;
  y.values.assign(8, 1.0);
  y.values[5] = 1.5;  // actor 6

  const double p65 = std::min(1.0, 1.8 * 1.0 / std::sqrt(30.0));
  const double p66 = std::min(1.0, 1.8 * 1.5 / 6.0);
  const Pmf got = exact_path2_pmf(p, x, y, 5, 8);
  CHECK(got.at(0) == doctest::Approx(1.0 - p65 * p66).epsilon(1e-14));
  CHECK(got.at(1) == doctest::Approx(p65 * p66).epsilon(1e-14));
  CHECK(got.at(2) == doctest::Approx(0.0));
}

TEST_CASE("triple probabilities by exhaustive enumeration") {
  ModelParams p{1.0, 2.0, TauFunction::linear()};
  const double w = 0.7;
  const auto x = WeightVector::constant(w, 1, 8);
  const auto y = WeightVector::constant(w, 1, 8);
  const std::int64_t s = 2, t = 3, u = 4;

  std::vector<Link> links;
  for (std::int64_t j : {s, t, u}) {
    const IndexInterval iw = item_window(p, j);
    for (std::int64_t i = iw.lo; i <= iw.hi; ++i)
      links.push_back({i, j, edge_probability_in_window(w, w, i, j)});
  }
  REQUIRE(links.size() == 12);

  double b_tri = 0.0, b_s = 0.0, b_t = 0.0, b_u = 0.0;
  for (std::size_t mask = 0; mask < (std::size_t{1} << links.size()); ++mask) {
    double pr = 1.0;
    for (std::size_t l = 0; l < links.size(); ++l)
      pr *= (mask >> l & 1) ? links[l].prob : 1.0 - links[l].prob;
    auto shares = [&](std::int64_t a1, std::int64_t a2) {
      for (std::size_t l = 0; l < links.size(); ++l) {
        if (links[l].actor != a1 || !(mask >> l & 1)) continue;
        for (std::size_t m2 = 0; m2 < links.size(); ++m2)
          if (links[m2].actor == a2 && links[m2].item == links[l].item && (mask >> m2 & 1))
            return true;
      }
      return false;
    };
    const bool est = shares(s, t), esu = shares(s, u), etu = shares(t, u);
    if (est && esu && etu) b_tri += pr;
    if (est && esu) b_s += pr;
    if (est && etu) b_t += pr;
    if (esu && etu) b_u += pr;
  }

  const TripleProbs got = exact_triple_probs(p, x, y, s, t, u);
  CHECK(got.triangle == doctest::Approx(b_tri).epsilon(1e-11));
  CHECK(got.path_s == doctest::Approx(b_s).epsilon(1e-11));
  CHECK(got.path_t == doctest::Approx(b_t).epsilon(1e-11));
  CHECK(got.path_u == doctest::Approx(b_u).epsilon(1e-11));

  const TripleProbs got_xy = exact_triple_probs_xy(p, x, w, w, w, s, t, u);
  CHECK(got_xy.triangle == doctest::Approx(got.triangle).epsilon(1e-14));
}

TEST_CASE("saturated triple closes with certainty") {
  ModelParams p{1.0, 2.0, TauFunction::linear()};
  const auto x = WeightVector::constant(20.0, 1, 8);
  CHECK(exact_triple_probs_xy(p, x, 20.0, 20.0, 20.0, 2, 3, 4).triangle == doctest::Approx(1.0));
}

TEST_CASE("triangle frequency matches the exact triple probability") {
  ModelParams p{1.0, 4.0, TauFunction::linear()};
  const std::int64_t s = 6, t = 7, u = 9;
  const auto xv = WeightVector::constant(1.0, 1, 36);
  const double exact = exact_triple_probs_xy(p, xv, 1.0, 1.0, 1.0, s, t, u).triangle;
  REQUIRE(exact > 0.01);  // large enough for the frequency check to have power

  const WeightField xf = WeightField::constant(1.0);
  const WeightField yf = WeightField::constant(1.0);
  const int reps = 12000;
  std::int64_t hits = 0;
  RandomStream rs(515);
  for (int r = 0; r < reps; ++r) {
    const auto sub = local_subgraph(p, xf, yf, {s, t, u}, rs);
    if (local_adjacent(p, sub, s, t) && local_adjacent(p, sub, s, u) &&
        local_adjacent(p, sub, t, u))
      ++hits;
  }
  const auto ci = wilson_ci(hits, reps, 0.999);
  CHECK(ci.lo <= exact);
  CHECK(exact <= ci.hi);
}

TEST_CASE("leading-order triangle pins") {
  ModelParams p{1.0, 4.0, TauFunction::linear()};
  const XyMoments m;  // all unit moments
  const auto asym = asymptotic_triangle(p, m, 300, 360, 450);
  CHECK(asym.p_delta == doctest::Approx(5.242280515560438e-06).epsilon(1e-12));
  CHECK(asym.delta_t_su == doctest::Approx(1.400401942335729).epsilon(1e-12));
  CHECK(asym.delta_s_tu == doctest::Approx(1.180891746313441).epsilon(1e-12));
  CHECK(asym.delta_u_st == doctest::Approx(1.1408523399216903).epsilon(1e-12));
  CHECK(asym.alpha_t_su == doctest::Approx(0.33117086387791583).epsilon(1e-12));

  // The exact probability at this scale is already within a percent.
  const auto xv = WeightVector::constant(1.0, 1, 1800);
  const double exact = exact_triple_probs_xy(p, xv, 1.0, 1.0, 1.0, 300, 360, 450).triangle;
  CHECK(std::abs(exact - asym.p_delta) / exact < 0.02);

  // Overlap requirement: u's start must not pass s's end.
  CHECK_THROWS_AS((void)asymptotic_triangle(p, m, 10, 20, 50), std::invalid_argument);
}

TEST_CASE("limit assortativity from weight moments") {
  const auto c1 = assortativity_constants(1, 1, 1, 1, 1, 1, 1.0, 4.0);
  CHECK(c1.delta1 == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(c1.delta2 == doctest::Approx(21.0).epsilon(1e-12));
  CHECK(c1.cap_delta == doctest::Approx(4.0).epsilon(1e-12));
  REQUIRE(c1.r_st.has_value());
  CHECK(std::abs(*c1.r_st - 0.2) <= 1e-12);

  const auto c2 = assortativity_constants(1, 1, 1, 1, 1, 1, 1.0, 9.0);
  REQUIRE(c2.r_st.has_value());
  CHECK(*c2.r_st == doctest::Approx(3.0 / 31.0).epsilon(1e-12));

  // Zero or negative moments are rejected outright.
  CHECK_THROWS_AS((void)assortativity_constants(0, 0, 0, 1, 1, 1, 1.0, 4.0),
                  std::invalid_argument);

  // Moment inputs violating Cauchy-Schwarz (a4 < a3^2/a2) can push the
  // variance formula nonpositive; the correlation is withheld, not invented.
  const auto c3 = assortativity_constants(1, 10, 1, 1, 1, 1, 1.0, 4.0);
  CHECK(c3.delta2 - c3.delta1 * c3.delta1 <= 0.0);
  CHECK_FALSE(c3.r_st.has_value());
}
