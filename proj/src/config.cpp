#include "rig/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

namespace rig {

namespace {

const std::vector<std::string>& known_subcommands() {
  static const std::vector<std::string> v = {"theory",     "simulate", "degree",
                                             "clustering", "assort",   "sweep"};
  return v;
}

bool is_subcommand(const std::string& name) {
  const auto& v = known_subcommands();
  return std::find(v.begin(), v.end(), name) != v.end();
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value) {
  throw std::invalid_argument("invalid value for " + key + ": '" + value + "'");
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) bad_value(key, value);
    return v;
  } catch (const std::invalid_argument&) {
    bad_value(key, value);
  } catch (const std::out_of_range&) {
    bad_value(key, value);
  }
}

std::int64_t parse_i64(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(value, &pos);
    if (pos != value.size()) bad_value(key, value);
    return v;
  } catch (const std::invalid_argument&) {
    bad_value(key, value);
  } catch (const std::out_of_range&) {
    bad_value(key, value);
  }
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  try {
    if (!value.empty() && value[0] == '-') bad_value(key, value);
    std::size_t pos = 0;
    const unsigned long long v = std::stoull(value, &pos);
    if (pos != value.size()) bad_value(key, value);
    return v;
  } catch (const std::invalid_argument&) {
    bad_value(key, value);
  } catch (const std::out_of_range&) {
    bad_value(key, value);
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  bad_value(key, value);
}

std::vector<double> parse_double_list(const std::string& key, const std::string& value) {
  std::vector<double> out;
  std::string item;
  std::istringstream in(value);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (item.empty()) bad_value(key, value);
    out.push_back(parse_double(key, item));
  }
  if (out.empty()) bad_value(key, value);
  return out;
}

using KeyApplier = std::function<void(ExperimentConfig&, const std::string&)>;

const std::map<std::string, KeyApplier>& key_schema() {
  static const std::map<std::string, KeyApplier> schema = {
      {"a", [](ExperimentConfig& c, const std::string& v) { c.a = parse_double("a", v); }},
      {"b", [](ExperimentConfig& c, const std::string& v) { c.b = parse_double("b", v); }},
      {"tau", [](ExperimentConfig& c, const std::string& v) { c.tau_name = v; }},
      {"nu", [](ExperimentConfig& c, const std::string& v) { c.nu = parse_double("nu", v); }},
      {"x_dist", [](ExperimentConfig& c, const std::string& v) { c.x_dist = v; }},
      {"y_dist", [](ExperimentConfig& c, const std::string& v) { c.y_dist = v; }},
      {"x_values", [](ExperimentConfig& c, const std::string& v) { c.x_values = v; }},
      {"y_values", [](ExperimentConfig& c, const std::string& v) { c.y_values = v; }},
      {"x_first",
       [](ExperimentConfig& c, const std::string& v) { c.x_first = parse_i64("x_first", v); }},
      {"y_first",
       [](ExperimentConfig& c, const std::string& v) { c.y_first = parse_i64("y_first", v); }},
      {"t", [](ExperimentConfig& c, const std::string& v) { c.t = parse_i64("t", v); }},
      {"s", [](ExperimentConfig& c, const std::string& v) { c.s = parse_i64("s", v); }},
      {"u", [](ExperimentConfig& c, const std::string& v) { c.u = parse_i64("u", v); }},
      {"t_max",
       [](ExperimentConfig& c, const std::string& v) { c.t_max = parse_i64("t_max", v); }},
      {"n_rep",
       [](ExperimentConfig& c, const std::string& v) { c.n_rep = parse_i64("n_rep", v); }},
      {"seed", [](ExperimentConfig& c, const std::string& v) { c.seed = parse_u64("seed", v); }},
      {"threads",
       [](ExperimentConfig& c, const std::string& v) {
         c.threads = static_cast<int>(parse_i64("threads", v));
       }},
      {"budget_seconds",
       [](ExperimentConfig& c, const std::string& v) {
         c.budget_seconds = parse_double("budget_seconds", v);
       }},
      {"backend", [](ExperimentConfig& c, const std::string& v) { c.backend = v; }},
      {"out_dir", [](ExperimentConfig& c, const std::string& v) { c.out_dir = v; }},
      {"format",
       [](ExperimentConfig& c, const std::string& v) {
         c.out_json = false;
         c.out_csv = false;
         std::string item;
         std::istringstream in(v);
         while (std::getline(in, item, ',')) {
           item = trim(item);
           if (item == "json")
             c.out_json = true;
           else if (item == "csv")
             c.out_csv = true;
           else
             throw std::invalid_argument("unknown format '" + item + "' (expected json,csv)");
         }
         if (!c.out_json && !c.out_csv)
           throw std::invalid_argument("format must include at least one of json,csv");
       }},
      {"r_max",
       [](ExperimentConfig& c, const std::string& v) {
         c.r_max = static_cast<int>(parse_i64("r_max", v));
       }},
      {"gamma_star",
       [](ExperimentConfig& c, const std::string& v) { c.gamma_star = parse_bool("gamma_star", v); }},
      {"experiment",
       [](ExperimentConfig& c, const std::string& v) { c.sweep_experiment = v; }},
      {"scales",
       [](ExperimentConfig& c, const std::string& v) {
         c.sweep_scales = parse_double_list("scales", v);
       }},
  };
  return schema;
}

void apply_key(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  const auto& schema = key_schema();
  const auto it = schema.find(key);
  if (it == schema.end()) throw std::invalid_argument("unknown config key '" + key + "'");
  it->second(cfg, value);
}

std::vector<double> parse_weight_values(const std::string& key, const std::string& text) {
  std::vector<double> vals = parse_double_list(key, text);
  for (double v : vals)
    if (!(v >= 0.0) || !std::isfinite(v))
      throw std::invalid_argument(key + " entries must be finite and >= 0");
  return vals;
}

std::int64_t scaled_index(std::int64_t base, double scale) {
  return static_cast<std::int64_t>(std::llround(static_cast<double>(base) * scale));
}

void validate_pair(const ModelParams& params, std::int64_t s, std::int64_t t,
                   const char* subcommand) {
  if (!(1 <= s && s < t))
    throw std::invalid_argument(std::string(subcommand) + " requires 1 <= s < t");
  if (intersect(item_window(params, s), item_window(params, t)).empty())
    throw std::invalid_argument(std::string(subcommand) +
                                " window condition violated: requires "
                                "ceil(a*tau(t)) <= floor(b*tau(s))");
}

void validate_triple(const ModelParams& params, std::int64_t s, std::int64_t t, std::int64_t u,
                     const char* subcommand) {
  if (!(1 <= s && s < t && t < u))
    throw std::invalid_argument(std::string(subcommand) + " requires 1 <= s < t < u");
  if (intersect(item_window(params, s), item_window(params, u)).empty())
    throw std::invalid_argument(std::string(subcommand) +
                                " window condition violated: requires "
                                "ceil(a*tau(u)) <= floor(b*tau(s))");
}

/// Post-assignment validation; every constraint error names the inequality.
void finalize(ExperimentConfig& cfg) {
  if (!is_subcommand(cfg.subcommand))
    throw std::invalid_argument("unknown subcommand '" + cfg.subcommand + "'");
  if (!(cfg.a > 0.0 && cfg.a < cfg.b))
    throw std::invalid_argument("model parameters require 0 < a < b");
  const ModelParams params = cfg.model();  // validates tau kind and nu
  params.validate();
  (void)cfg.gen_backend();
  if (cfg.r_max < 0) throw std::invalid_argument("requires r_max >= 0");
  if (cfg.threads < 0) throw std::invalid_argument("requires threads >= 0");
  if (cfg.budget_seconds < 0.0) throw std::invalid_argument("requires budget_seconds >= 0");
  if (cfg.x_first < 1) throw std::invalid_argument("requires x_first >= 1");
  if (cfg.y_first < 1) throw std::invalid_argument("requires y_first >= 1");

  // Parse weight specs now so malformed text fails at config time.
  if (!cfg.x_values.empty()) parse_weight_values("x_values", cfg.x_values);
  if (!cfg.y_values.empty()) parse_weight_values("y_values", cfg.y_values);
  const WeightSetup setup = cfg.weight_setup();

  cfg.warnings.clear();
  if (!cfg.x_values.empty())
    cfg.warnings.push_back("realized x weights supplied: x_dist is ignored");
  if (!cfg.y_values.empty())
    cfg.warnings.push_back("realized y weights supplied: y_dist is ignored");

  if (cfg.subcommand == "degree") {
    if (cfg.t < 1) throw std::invalid_argument("degree requires t >= 1");
    if (cfg.n_rep < 1) throw std::invalid_argument("degree requires n_rep >= 1");
  } else if (cfg.subcommand == "simulate") {
    if (cfg.t_max < 1) throw std::invalid_argument("simulate requires t_max >= 1");
  } else if (cfg.subcommand == "clustering") {
    validate_triple(params, cfg.s, cfg.t, cfg.u, "clustering");
    if (!setup.deterministic() && cfg.n_rep < 1)
      throw std::invalid_argument("clustering with random weights requires n_rep >= 1");
  } else if (cfg.subcommand == "assort") {
    validate_pair(params, cfg.s, cfg.t, "assort");
    if (cfg.n_rep < 1) throw std::invalid_argument("assort requires n_rep >= 1");
  } else if (cfg.subcommand == "sweep") {
    const std::string& exp = cfg.sweep_experiment;
    if (exp != "degree" && exp != "clustering" && exp != "assort")
      throw std::invalid_argument("sweep experiment must be one of degree, clustering, assort");
    if (cfg.sweep_scales.empty())
      throw std::invalid_argument("sweep requires a nonempty scales list");
    for (double sc : cfg.sweep_scales)
      if (!(sc > 0.0) || !std::isfinite(sc))
        throw std::invalid_argument("sweep scales must be finite and > 0");
    for (double sc : cfg.sweep_scales) {
      if (exp == "degree") {
        if (scaled_index(cfg.t, sc) < 1)
          throw std::invalid_argument("degree requires t >= 1 at every sweep scale");
      } else if (exp == "clustering") {
        validate_triple(params, scaled_index(cfg.s, sc), scaled_index(cfg.t, sc),
                        scaled_index(cfg.u, sc), "clustering");
      } else {
        validate_pair(params, scaled_index(cfg.s, sc), scaled_index(cfg.t, sc), "assort");
      }
    }
    if (exp == "assort" && cfg.n_rep < 1)
      throw std::invalid_argument("assort requires n_rep >= 1");
    if (exp != "assort" && !setup.deterministic())
      throw std::invalid_argument("sweep over " + exp + " requires deterministic weights");
  } else if (cfg.subcommand == "theory") {
    if (cfg.u != 0)
      validate_triple(params, cfg.s, cfg.t, cfg.u, "theory triple block");
    else if (cfg.s != 0)
      validate_pair(params, cfg.s, cfg.t, "theory pair block");
  }
}

}  // namespace

ModelParams ExperimentConfig::model() const {
  return ModelParams{a, b, TauFunction::parse(tau_name, nu)};
}

WeightSetup ExperimentConfig::weight_setup() const {
  WeightSetup setup;
  if (!x_values.empty()) {
    WeightVector v;
    v.first = x_first;
    v.values = parse_weight_values("x_values", x_values);
    setup.x_fixed = std::move(v);
  } else {
    setup.x_dist = WeightDistribution::parse(x_dist);
  }
  if (!y_values.empty()) {
    WeightVector v;
    v.first = y_first;
    v.values = parse_weight_values("y_values", y_values);
    setup.y_fixed = std::move(v);
  } else {
    setup.y_dist = WeightDistribution::parse(y_dist);
  }
  return setup;
}

GenBackend ExperimentConfig::gen_backend() const { return parse_backend(backend); }

McOptions ExperimentConfig::mc_options() const {
  McOptions opt;
  opt.n_rep = n_rep;
  opt.seed = seed;
  opt.threads = threads;
  opt.budget_seconds = budget_seconds;
  opt.r_max = r_max;
  return opt;
}

nlohmann::json ExperimentConfig::echo() const {
  nlohmann::json j;
  j["subcommand"] = subcommand;
  j["a"] = a;
  j["b"] = b;
  j["tau"] = tau_name;
  j["nu"] = nu;
  j["x_dist"] = x_dist;
  j["y_dist"] = y_dist;
  j["x_values"] = x_values;
  j["x_first"] = x_first;
  j["y_values"] = y_values;
  j["y_first"] = y_first;
  j["t"] = t;
  j["s"] = s;
  j["u"] = u;
  j["t_max"] = t_max;
  j["n_rep"] = n_rep;
  j["seed"] = seed;
  j["backend"] = backend;
  j["r_max"] = r_max;
  j["gamma_star"] = gamma_star;
  j["experiment"] = sweep_experiment;
  j["scales"] = sweep_scales;
  return j;
}

ExperimentConfig parse_config(const std::string& subcommand, const std::string& config_text,
                              const FlagOverrides& flags) {
  ExperimentConfig cfg;
  cfg.subcommand = subcommand;
  if (!is_subcommand(subcommand))
    throw std::invalid_argument("unknown subcommand '" + subcommand + "'");

  // Pass 1: collect (scope, key, value) in file order; validate key and
  // section names everywhere, even for sections that are not selected.
  std::string scope;  // "" = global
  std::vector<std::pair<std::string, std::pair<std::string, std::string>>> entries;
  std::istringstream in(config_text);
  std::string raw;
  while (std::getline(in, raw)) {
    const auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw std::invalid_argument("malformed config section line: '" + line + "'");
      scope = trim(line.substr(1, line.size() - 2));
      if (!is_subcommand(scope))
        throw std::invalid_argument("unknown config section '" + scope + "'");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("malformed config line (expected key = value): '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw std::invalid_argument("malformed config line: '" + line + "'");
    if (key_schema().find(key) == key_schema().end())
      throw std::invalid_argument("unknown config key '" + key + "'");
    entries.emplace_back(scope, std::make_pair(key, value));
  }

  // Pass 2: apply global entries, then the selected section, in file order.
  for (const auto& e : entries)
    if (e.first.empty()) apply_key(cfg, e.second.first, e.second.second);
  for (const auto& e : entries)
    if (e.first == subcommand) apply_key(cfg, e.second.first, e.second.second);

  // --set overrides ("key=value" or "section.key=value").
  for (const std::string& set : flags.sets) {
    const auto eq = set.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("malformed --set (expected key=value): '" + set + "'");
    std::string key = trim(set.substr(0, eq));
    const std::string value = trim(set.substr(eq + 1));
    const auto dot = key.find('.');
    if (dot != std::string::npos) {
      const std::string section = key.substr(0, dot);
      if (!is_subcommand(section))
        throw std::invalid_argument("unknown config section '" + section + "'");
      key = key.substr(dot + 1);
      if (key_schema().find(key) == key_schema().end())
        throw std::invalid_argument("unknown config key '" + key + "'");
      if (section != subcommand) continue;
    }
    apply_key(cfg, key, value);
  }

  // Typed flags override everything from the file.
  if (flags.seed) cfg.seed = *flags.seed;
  if (flags.threads) cfg.threads = *flags.threads;
  if (flags.out_dir) cfg.out_dir = *flags.out_dir;
  if (flags.format) apply_key(cfg, "format", *flags.format);
  if (flags.budget_seconds) cfg.budget_seconds = *flags.budget_seconds;

  // Environment fallback for the worker count.
  if (cfg.threads == 0) {
    if (const char* env = std::getenv("RIG_LAB_THREADS")) {
      const std::string v(env);
      if (!v.empty()) cfg.threads = static_cast<int>(parse_i64("RIG_LAB_THREADS", v));
    }
  }

  finalize(cfg);
  return cfg;
}

ExperimentConfig parse_config_file(const std::string& subcommand, const std::string& config_path,
                                   const FlagOverrides& flags) {
  std::string text;
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) throw std::runtime_error("cannot read config file: " + config_path);
    std::ostringstream buf;
    buf << in.rdbuf();
    text = buf.str();
  }
  return parse_config(subcommand, text, flags);
}

ExperimentConfig config_from_echo(const nlohmann::json& echo) {
  ExperimentConfig cfg;
  cfg.subcommand = echo.at("subcommand").get<std::string>();
  cfg.a = echo.at("a").get<double>();
  cfg.b = echo.at("b").get<double>();
  cfg.tau_name = echo.at("tau").get<std::string>();
  cfg.nu = echo.at("nu").get<double>();
  cfg.x_dist = echo.at("x_dist").get<std::string>();
  cfg.y_dist = echo.at("y_dist").get<std::string>();
  cfg.x_values = echo.at("x_values").get<std::string>();
  cfg.x_first = echo.at("x_first").get<std::int64_t>();
  cfg.y_values = echo.at("y_values").get<std::string>();
  cfg.y_first = echo.at("y_first").get<std::int64_t>();
  cfg.t = echo.at("t").get<std::int64_t>();
  cfg.s = echo.at("s").get<std::int64_t>();
  cfg.u = echo.at("u").get<std::int64_t>();
  cfg.t_max = echo.at("t_max").get<std::int64_t>();
  cfg.n_rep = echo.at("n_rep").get<std::int64_t>();
  cfg.seed = echo.at("seed").get<std::uint64_t>();
  cfg.backend = echo.at("backend").get<std::string>();
  cfg.r_max = echo.at("r_max").get<int>();
  cfg.gamma_star = echo.at("gamma_star").get<bool>();
  cfg.sweep_experiment = echo.at("experiment").get<std::string>();
  cfg.sweep_scales = echo.at("scales").get<std::vector<double>>();
  finalize(cfg);
  return cfg;
}

}  // namespace rig
