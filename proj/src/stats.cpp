#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>

#include "rig/stats.hpp"

namespace rig {

WilsonInterval wilson_ci(std::int64_t successes, std::int64_t trials, double level) {
  if (trials < 0 || successes < 0 || successes > trials)
    throw std::invalid_argument("wilson interval requires 0 <= successes <= trials");
  if (!(level > 0.0) || !(level < 1.0))
    throw std::invalid_argument("confidence level must lie in (0, 1)");
  if (trials == 0) return {0.0, 1.0};
  static const boost::math::normal_distribution<double> n01;
  const double z = boost::math::quantile(n01, 0.5 * (1.0 + level));
  const double n = static_cast<double>(trials);
  const double phat = static_cast<double>(successes) / n;
  const double z2n = z * z / n;
  const double center = (phat + 0.5 * z2n) / (1.0 + z2n);
  const double half =
      (z / (1.0 + z2n)) * std::sqrt(phat * (1.0 - phat) / n + 0.25 * z2n / n);
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

double chi_square_tail(double statistic, std::int64_t dof) {
  if (dof < 1) return 1.0;
  if (!(statistic > 0.0)) return 1.0;
  const boost::math::chi_squared_distribution<double> dist(static_cast<double>(dof));
  return boost::math::cdf(boost::math::complement(dist, statistic));
}

GofResult gof_counts(const std::vector<std::int64_t>& counts, std::int64_t n_obs, const Pmf& q) {
  if (n_obs <= 0) throw std::invalid_argument("chi-square requires n_obs > 0");
  std::int64_t head_obs = 0;
  for (const std::int64_t c : counts) head_obs += c;
  if (head_obs > n_obs) throw std::invalid_argument("counts exceed n_obs");

  GofResult res;
  {
    Pmf emp;
    emp.p.resize(counts.size());
    for (std::size_t r = 0; r < counts.size(); ++r)
      emp.p[r] = static_cast<double>(counts[r]) / static_cast<double>(n_obs);
    emp.tail = static_cast<double>(n_obs - head_obs) / static_cast<double>(n_obs);
    res.tv = tv_distance(emp, q);
  }

  // Cells 0..R plus a rest cell (everything past R on both sides).  Head cells
  // whose expected count falls under 5 are pooled into the rest cell, merging
  // downward from the top until every kept cell passes.
  const int rq = std::min<int>(q.r_max(), static_cast<int>(counts.size()) - 1);
  int keep = rq + 1;
  auto expected_head = [&](int r) { return q.at(r) * static_cast<double>(n_obs); };
  auto rest_expected = [&](int kept) {
    double e = q.tail * static_cast<double>(n_obs);
    for (int r = kept; r <= q.r_max(); ++r) e += expected_head(r);
    return e;
  };
  while (keep > 0 &&
         (expected_head(keep - 1) < 5.0 || rest_expected(keep) < 5.0))
    --keep;

  double stat = 0.0;
  std::int64_t cells = 0;
  bool valid = keep >= 1;
  for (int r = 0; r < keep; ++r) {
    const double e = expected_head(r);
    const double o = static_cast<double>(counts[static_cast<std::size_t>(r)]);
    if (e <= 0.0) {
      if (o > 0.0) valid = false;
      continue;
    }
    stat += (o - e) * (o - e) / e;
    ++cells;
  }
  {
    std::int64_t o_rest = n_obs;
    for (int r = 0; r < keep; ++r) o_rest -= counts[static_cast<std::size_t>(r)];
    const double e = rest_expected(keep);
    if (e > 0.0) {
      stat += (static_cast<double>(o_rest) - e) * (static_cast<double>(o_rest) - e) / e;
      ++cells;
    } else if (o_rest > 0) {
      valid = false;
    }
  }
  res.chi_square = stat;
  res.dof = cells - 1;
  res.chi_square_valid = valid && res.dof >= 1;
  res.p_value = res.chi_square_valid ? chi_square_tail(stat, res.dof) : 1.0;
  return res;
}

GofResult gof_metrics(const Pmf& p, const Pmf& q, std::int64_t n_obs) {
  GofResult res;
  res.tv = tv_distance(p, q);
  if (n_obs > 0) {
    std::vector<std::int64_t> counts(p.p.size());
    for (std::size_t r = 0; r < p.p.size(); ++r)
      counts[r] = static_cast<std::int64_t>(std::llround(p.p[r] * static_cast<double>(n_obs)));
    std::int64_t total = 0;
    for (const std::int64_t c : counts) total += c;
    if (total <= n_obs) {
      GofResult chi = gof_counts(counts, n_obs, q);
      res.chi_square = chi.chi_square;
      res.p_value = chi.p_value;
      res.dof = chi.dof;
      res.chi_square_valid = chi.chi_square_valid;
    }
  }
  return res;
}

// ---------------------------------------------------------------------------
// Reports

namespace {

std::string format_g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string report_to_json(const ExperimentReport& report) {
  nlohmann::json j;
  j["kind"] = report.kind;
  j["config"] = report.config;
  j["seed"] = report.seed;
  j["n_rep"] = report.n_rep;
  j["n_completed"] = report.n_completed;
  j["truncated"] = report.truncated;
  j["warnings"] = report.warnings;
  j["estimates"] = report.estimates;
  j["theory"] = report.theory;
  j["distances"] = report.distances;
  return j.dump(2) + "\n";
}

std::string runtime_to_json(const ExperimentReport& report) {
  nlohmann::json j;
  j["duration_seconds"] = report.duration_seconds;
  j["threads"] = report.threads;
  j["truncated"] = report.truncated;
  return j.dump(2) + "\n";
}

std::string report_to_csv(const ExperimentReport& report) {
  std::ostringstream os;
  for (auto it = report.config.begin(); it != report.config.end(); ++it)
    os << "# " << it.key() << " = "
       << (it.value().is_string() ? it.value().get<std::string>() : it.value().dump()) << "\n";
  os << "quantity,r_or_pair,estimate,ci_lo,ci_hi,theory,n_rep,seed\n";
  for (const CsvRow& row : report.rows) {
    os << row.quantity << ',' << row.r_or_pair << ',' << format_g17(row.estimate) << ',';
    if (row.ci_lo) os << format_g17(*row.ci_lo);
    os << ',';
    if (row.ci_hi) os << format_g17(*row.ci_hi);
    os << ',';
    if (row.theory) os << format_g17(*row.theory);
    os << ',' << row.n_rep << ',' << row.seed << "\n";
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Weight setup

bool WeightSetup::deterministic() const {
  const bool x_det = x_fixed.has_value() || !x_dist.has_value() || x_dist->is_deterministic();
  const bool y_det = y_fixed.has_value() || !y_dist.has_value() || y_dist->is_deterministic();
  return x_det && y_det;
}

namespace {

WeightVector realize_side(const std::optional<WeightVector>& fixed,
                          const std::optional<WeightDistribution>& dist, std::int64_t lo,
                          std::int64_t hi, RandomStream& rs, const char* side) {
  if (hi < lo) return WeightVector{lo, {}};
  if (fixed) {
    if (!fixed->covers(lo, hi))
      throw std::invalid_argument(std::string("fixed ") + side +
                                  " weights do not cover the required index range");
    WeightVector v;
    v.first = lo;
    v.values.assign(fixed->values.begin() + (lo - fixed->first),
                    fixed->values.begin() + (hi - fixed->first + 1));
    return v;
  }
  if (dist) return WeightVector::draw(*dist, lo, hi, rs);
  return WeightVector::constant(1.0, lo, hi);
}

std::optional<double> side_moment(const std::optional<WeightVector>& fixed,
                                  const std::optional<WeightDistribution>& dist, int k,
                                  std::string* warn, const char* side) {
  if (fixed) {
    if (warn) *warn = std::string("fixed ") + side + " weights have no distributional moments";
    return std::nullopt;
  }
  if (!dist) return 1.0;
  try {
    return dist->moment(k);
  } catch (const InfiniteMomentError& e) {
    if (warn) *warn = e.what();
    return std::nullopt;
  }
}

}  // namespace

WeightVector WeightSetup::realize_x(std::int64_t lo, std::int64_t hi, RandomStream& rs) const {
  return realize_side(x_fixed, x_dist, lo, hi, rs, "x");
}

WeightVector WeightSetup::realize_y(std::int64_t lo, std::int64_t hi, RandomStream& rs) const {
  return realize_side(y_fixed, y_dist, lo, hi, rs, "y");
}

std::optional<double> WeightSetup::x_moment(int k, std::string* warn) const {
  return side_moment(x_fixed, x_dist, k, warn, "x");
}

std::optional<double> WeightSetup::y_moment(int k, std::string* warn) const {
  return side_moment(y_fixed, y_dist, k, warn, "y");
}

}  // namespace rig
