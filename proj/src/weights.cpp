#include "rig/weights.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <optional>
#include <sstream>

namespace rig {

namespace {

[[noreturn]] void bad_spec(const std::string& msg) { throw std::invalid_argument(msg); }

std::string strip(std::string_view sv) {
  std::size_t b = 0, e = sv.size();
  while (b < e && std::isspace(static_cast<unsigned char>(sv[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(sv[e - 1]))) --e;
  return std::string(sv.substr(b, e - b));
}

double parse_number(const std::string& text, const std::string& what) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &pos);
  } catch (const std::exception&) {
    bad_spec("weight spec: cannot parse number '" + text + "' for " + what);
  }
  if (pos != text.size()) bad_spec("weight spec: trailing characters in '" + text + "'");
  return v;
}

// Splits "a=1, b=2" / "1, 2" / "(1,0.5),(2,0.5)" at top-level commas.
std::vector<std::string> split_args(const std::string& body) {
  std::vector<std::string> out;
  int depth = 0;
  std::string cur;
  for (char c : body) {
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (c == ',' && depth == 0) {
      out.push_back(strip(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  const std::string last = strip(cur);
  if (!last.empty()) out.push_back(last);
  return out;
}

double named_or_positional(const std::vector<std::string>& args, std::size_t position,
                           const std::string& name, std::optional<double> fallback = {}) {
  for (const auto& a : args) {
    const auto eq = a.find('=');
    if (eq == std::string::npos) continue;
    if (strip(a.substr(0, eq)) == name) return parse_number(strip(a.substr(eq + 1)), name);
  }
  if (position < args.size() && args[position].find('=') == std::string::npos)
    return parse_number(args[position], name);
  if (fallback) return *fallback;
  bad_spec("weight spec: missing parameter '" + name + "'");
}

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

WeightDistribution WeightDistribution::constant(double c) {
  if (!(c >= 0.0) || !std::isfinite(c)) bad_spec("constant weight requires c >= 0");
  WeightDistribution d;
  d.kind_ = WeightKind::Constant;
  d.p1_ = c;
  return d;
}

WeightDistribution WeightDistribution::pareto(double alpha, double xmin) {
  if (!(alpha > 0.0)) bad_spec("pareto weight requires alpha > 0");
  if (!(xmin > 0.0)) bad_spec("pareto weight requires xmin > 0");
  WeightDistribution d;
  d.kind_ = WeightKind::Pareto;
  d.p1_ = alpha;
  d.p2_ = xmin;
  return d;
}

WeightDistribution WeightDistribution::lognormal(double mu, double sigma) {
  if (!(sigma >= 0.0) || !std::isfinite(mu)) bad_spec("lognormal weight requires sigma >= 0 and finite mu");
  WeightDistribution d;
  d.kind_ = WeightKind::Lognormal;
  d.p1_ = mu;
  d.p2_ = sigma;
  return d;
}

WeightDistribution WeightDistribution::discrete_table(std::vector<std::pair<double, double>> table) {
  if (table.empty()) bad_spec("discrete weight table must not be empty");
  double mass = 0.0;
  for (const auto& [v, p] : table) {
    if (!(v >= 0.0) || !std::isfinite(v)) bad_spec("discrete weight values must be >= 0");
    if (!(p >= 0.0)) bad_spec("discrete weight probabilities must be >= 0");
    mass += p;
  }
  if (std::abs(mass - 1.0) > 1e-9) bad_spec("discrete weight probabilities must sum to 1");
  WeightDistribution d;
  d.kind_ = WeightKind::DiscreteTable;
  d.table_ = std::move(table);
  return d;
}

WeightDistribution WeightDistribution::parse(std::string_view spec) {
  const std::string text = strip(spec);
  const auto open = text.find('(');
  if (open == std::string::npos || text.back() != ')')
    bad_spec("weight spec must look like name(args): '" + text + "'");
  const std::string name = strip(text.substr(0, open));
  const std::string body = text.substr(open + 1, text.size() - open - 2);
  const auto args = split_args(body);

  if (name == "constant") return constant(named_or_positional(args, 0, "c"));
  if (name == "pareto")
    return pareto(named_or_positional(args, 0, "alpha"), named_or_positional(args, 1, "xmin", 1.0));
  if (name == "lognormal")
    return lognormal(named_or_positional(args, 0, "mu", 0.0), named_or_positional(args, 1, "sigma"));
  if (name == "discrete") {
    std::vector<std::pair<double, double>> table;
    for (const auto& a : args) {
      if (a.size() < 2 || a.front() != '(' || a.back() != ')')
        bad_spec("discrete weight entries must be (value,prob) pairs: '" + a + "'");
      const auto parts = split_args(a.substr(1, a.size() - 2));
      if (parts.size() != 2) bad_spec("discrete weight entries must be (value,prob) pairs: '" + a + "'");
      table.emplace_back(parse_number(parts[0], "value"), parse_number(parts[1], "prob"));
    }
    return discrete_table(std::move(table));
  }
  bad_spec("unknown weight family '" + name + "'");
}

double WeightDistribution::constant_value() const {
  if (kind_ != WeightKind::Constant) throw std::logic_error("constant_value on non-constant weight");
  return p1_;
}

bool WeightDistribution::moment_finite(int k) const {
  if (k < 1) throw std::invalid_argument("moment order must be >= 1");
  return kind_ != WeightKind::Pareto || static_cast<double>(k) < p1_;
}

double WeightDistribution::moment(int k) const {
  if (k < 1) throw std::invalid_argument("moment order must be >= 1");
  switch (kind_) {
    case WeightKind::Constant:
      return std::pow(p1_, k);
    case WeightKind::Pareto: {
      if (static_cast<double>(k) >= p1_)
        throw InfiniteMomentError("pareto moment E V^" + std::to_string(k) +
                                  " diverges for alpha = " + format_double(p1_));
      return p1_ * std::pow(p2_, k) / (p1_ - static_cast<double>(k));
    }
    case WeightKind::Lognormal:
      return std::exp(static_cast<double>(k) * p1_ +
                      0.5 * static_cast<double>(k) * static_cast<double>(k) * p2_ * p2_);
    case WeightKind::DiscreteTable: {
      double m = 0.0;
      for (const auto& [v, p] : table_) m += p * std::pow(v, k);
      return m;
    }
  }
  throw std::logic_error("unreachable weight kind");
}

double WeightDistribution::sample(RandomStream& rs) const {
  switch (kind_) {
    case WeightKind::Constant:
      return p1_;
    case WeightKind::Pareto:
      return p2_ * std::pow(rs.uniform_pos(), -1.0 / p1_);
    case WeightKind::Lognormal:
      return std::exp(p1_ + p2_ * rs.normal());
    case WeightKind::DiscreteTable: {
      const double u = rs.uniform();
      double cum = 0.0;
      for (const auto& [v, p] : table_) {
        cum += p;
        if (u < cum) return v;
      }
      return table_.back().first;
    }
  }
  throw std::logic_error("unreachable weight kind");
}

std::vector<double> WeightDistribution::sample_range(std::int64_t first, std::int64_t last,
                                                     RandomStream& rs) const {
  if (last < first) return {};
  std::vector<double> out(static_cast<std::size_t>(last - first + 1));
  for (auto& v : out) v = sample(rs);
  return out;
}

std::string WeightDistribution::describe() const {
  std::ostringstream os;
  os.precision(17);
  switch (kind_) {
    case WeightKind::Constant:
      os << "constant(" << p1_ << ")";
      break;
    case WeightKind::Pareto:
      os << "pareto(alpha=" << p1_ << ", xmin=" << p2_ << ")";
      break;
    case WeightKind::Lognormal:
      os << "lognormal(mu=" << p1_ << ", sigma=" << p2_ << ")";
      break;
    case WeightKind::DiscreteTable: {
      os << "discrete(";
      bool sep = false;
      for (const auto& [v, p] : table_) {
        if (sep) os << ",";
        os << "(" << v << "," << p << ")";
        sep = true;
      }
      os << ")";
      break;
    }
  }
  return os.str();
}

}  // namespace rig
