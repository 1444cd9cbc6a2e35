#include "rig/tau.hpp"

#include <cmath>
#include <stdexcept>

namespace rig {

double TauFunction::operator()(std::int64_t t) const {
  const double td = static_cast<double>(t);
  switch (kind) {
    case TauKind::Linear:
      return td;
    case TauKind::Power:
      return std::pow(td, nu);
    case TauKind::TLogT:
      return td * std::log(td);
    case TauKind::ExpLogSquared: {
      const double l = std::log(td);
      return std::exp(l * l);
    }
    case TauKind::Exp:
      return std::exp(td);
  }
  throw std::logic_error("unreachable tau kind");
}

TauFunction TauFunction::power(double nu) {
  if (!(nu > 1.0)) throw std::invalid_argument("power schedule requires nu > 1");
  return {TauKind::Power, nu};
}

TauFunction TauFunction::parse(std::string_view name, double nu_value) {
  if (name == "linear") return linear();
  if (name == "power") return power(nu_value);
  if (name == "t-log-t") return t_log_t();
  if (name == "exp-log-squared") return exp_log_squared();
  if (name == "exp") return exp_t();
  throw std::invalid_argument("unknown schedule '" + std::string(name) +
                              "' (expected linear|power|t-log-t|exp-log-squared|exp)");
}

std::string TauFunction::name() const {
  switch (kind) {
    case TauKind::Linear:
      return "linear";
    case TauKind::Power:
      return "power";
    case TauKind::TLogT:
      return "t-log-t";
    case TauKind::ExpLogSquared:
      return "exp-log-squared";
    case TauKind::Exp:
      return "exp";
  }
  return "?";
}

std::int64_t tau_floor_inverse(const TauFunction& tau, double v) {
  if (!(v >= tau(1)))
    throw std::domain_error("tau_floor_inverse: value below tau(1)");
  // Exponential bracket, then bisection on the monotone schedule.
  std::int64_t lo = 1, hi = 2;
  const std::int64_t cap = std::int64_t{1} << 61;
  while (tau(hi) <= v) {
    lo = hi;
    if (hi >= cap) break;
    hi *= 2;
  }
  while (hi - lo > 1) {
    const std::int64_t mid = lo + (hi - lo) / 2;
    if (tau(mid) <= v)
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

}  // namespace rig
