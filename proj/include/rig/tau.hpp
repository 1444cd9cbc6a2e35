#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace rig {

enum class TauKind { Linear, Power, TLogT, ExpLogSquared, Exp };

/// Nondecreasing schedule tau mapping an actor index to the scale of its item
/// window.  Supported kinds: linear t, power t^nu (nu > 1), t-log-t t*ln(t),
/// exp-log-squared exp(ln(t)^2), exp exp(t).
///
/// t-log-t evaluates to 0 at t = 1; the corresponding item window is empty,
/// i.e. actor 1 is isolated under that schedule.
struct TauFunction {
  TauKind kind = TauKind::Linear;
  double nu = 2.0;  // Power only

  double operator()(std::int64_t t) const;

  static TauFunction linear() { return {TauKind::Linear, 0.0}; }
  static TauFunction power(double nu);
  static TauFunction t_log_t() { return {TauKind::TLogT, 0.0}; }
  static TauFunction exp_log_squared() { return {TauKind::ExpLogSquared, 0.0}; }
  static TauFunction exp_t() { return {TauKind::Exp, 0.0}; }

  /// Accepts the CLI names: linear | power | t-log-t | exp-log-squared | exp.
  static TauFunction parse(std::string_view name, double nu_value);

  std::string name() const;
};

/// Largest integer t >= 1 with tau(t) <= v; throws std::domain_error when
/// v < tau(1).
std::int64_t tau_floor_inverse(const TauFunction& tau, double v);

}  // namespace rig
