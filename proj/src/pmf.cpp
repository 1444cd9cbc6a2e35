#include "rig/pmf.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rig {

double Pmf::head_mass() const {
  double s = 0.0;
  for (const double v : p) s += v;
  return s;
}

double Pmf::mean_head() const {
  double s = 0.0;
  for (std::size_t r = 1; r < p.size(); ++r) s += static_cast<double>(r) * p[r];
  return s;
}

Pmf Pmf::point_mass(int r, int r_max) {
  if (r_max < 0) throw std::invalid_argument("r_max must be >= 0");
  Pmf out;
  out.p.assign(static_cast<std::size_t>(r_max) + 1, 0.0);
  if (r >= 0 && r <= r_max)
    out.p[static_cast<std::size_t>(r)] = 1.0;
  else
    out.tail = 1.0;
  return out;
}

Pmf poisson_pmf(double lambda, int r_max) {
  if (!(lambda >= 0.0)) throw std::invalid_argument("poisson rate must be >= 0");
  if (r_max < 0) throw std::invalid_argument("r_max must be >= 0");
  Pmf out;
  out.p.resize(static_cast<std::size_t>(r_max) + 1);
  // p(r) = exp(-lambda + r log lambda - log r!) accumulated in log space to
  // stay finite for large rates.
  double log_fact = 0.0;
  double head = 0.0;
  const double log_lam = lambda > 0.0 ? std::log(lambda) : 0.0;
  for (int r = 0; r <= r_max; ++r) {
    if (r > 0) log_fact += std::log(static_cast<double>(r));
    const double lp = lambda > 0.0 ? (-lambda + r * log_lam - log_fact) : (r == 0 ? 0.0 : -1e300);
    out.p[static_cast<std::size_t>(r)] = std::exp(lp);
    head += out.p[static_cast<std::size_t>(r)];
  }
  out.tail = std::max(0.0, 1.0 - head);
  return out;
}

double tv_distance(const Pmf& a, const Pmf& b) {
  // Outcomes beyond the shorter head are merged into a single bucket on both
  // sides, which keeps the comparison a genuine total variation distance (on
  // the merged outcome space).
  const int rmax = std::min(a.r_max(), b.r_max());
  double s = 0.0;
  double a_tail = a.tail;
  double b_tail = b.tail;
  for (int r = rmax + 1; r <= a.r_max(); ++r) a_tail += a.at(r);
  for (int r = rmax + 1; r <= b.r_max(); ++r) b_tail += b.at(r);
  for (int r = 0; r <= rmax; ++r) s += std::abs(a.at(r) - b.at(r));
  s += std::abs(a_tail - b_tail);
  return 0.5 * s;
}

}  // namespace rig
