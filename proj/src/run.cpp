#include "rig/run.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "rig/parallel.hpp"
#include "rig/theory.hpp"

namespace rig {

namespace {

nlohmann::json value_json(double v, const char* source) {
  nlohmann::json j;
  j["value"] = v;
  j["source"] = source;
  return j;
}

nlohmann::json pmf_json(const Pmf& pmf, const char* source) {
  nlohmann::json j;
  j["pmf"] = pmf.p;
  j["tail"] = pmf.tail;
  j["source"] = source;
  return j;
}

void push_row(ExperimentReport& rep, const std::string& quantity, const std::string& label,
              double estimate, std::optional<double> ci_lo, std::optional<double> ci_hi,
              std::optional<double> theory, std::int64_t n_rep) {
  CsvRow row;
  row.quantity = quantity;
  row.r_or_pair = label;
  row.estimate = estimate;
  row.ci_lo = ci_lo;
  row.ci_hi = ci_hi;
  row.theory = theory;
  row.n_rep = n_rep;
  row.seed = rep.seed;
  rep.rows.push_back(std::move(row));
}

void warn_once(ExperimentReport& rep, const std::string& msg) {
  for (const std::string& w : rep.warnings)
    if (w == msg) return;
  rep.warnings.push_back(msg);
}

// ---------------------------------------------------------------------------
// theory

bool slow_schedule(TauKind kind) {
  return kind == TauKind::TLogT || kind == TauKind::ExpLogSquared || kind == TauKind::Exp;
}

ExperimentReport theory_report(const ExperimentConfig& cfg) {
  ExperimentReport rep;
  rep.kind = "theory";
  rep.seed = cfg.seed;
  rep.threads = resolve_threads(cfg.threads);
  const ModelParams params = cfg.model();
  const WeightSetup setup = cfg.weight_setup();

  const bool want_gamma_star = cfg.gamma_star || slow_schedule(params.tau.kind);
  const LimitConstants lc = limit_constants(params, want_gamma_star);
  rep.theory["gamma1"] = value_json(lc.gamma1, "sumos");
  rep.theory["gamma2"] = value_json(lc.gamma2, "sumos");
  rep.theory["gamma"] = value_json(lc.gamma, "thm2_eq5");
  push_row(rep, "gamma1", "", lc.gamma1, std::nullopt, std::nullopt, lc.gamma1, 0);
  push_row(rep, "gamma2", "", lc.gamma2, std::nullopt, std::nullopt, lc.gamma2, 0);
  push_row(rep, "gamma", "", lc.gamma, std::nullopt, std::nullopt, lc.gamma, 0);
  if (lc.gamma_star) {
    nlohmann::json gs;
    gs["value"] = lc.gamma_star->value;
    gs["error_estimate"] = lc.gamma_star->error_estimate;
    gs["partial"] = lc.gamma_star->partial;
    gs["t0"] = lc.gamma_star->t0;
    gs["source"] = "remark1";
    rep.theory["gamma_star"] = gs;
    push_row(rep, "gamma_star", params.tau.name(), lc.gamma_star->value, std::nullopt,
             std::nullopt, lc.gamma_star->value, 0);
  }

  // Degree limit law + pgf cross-check (needs weight distributions).
  if (setup.x_dist && setup.y_dist) {
    try {
      const DegreeLimitLaw lim = degree_limit_pmf(params, *setup.x_dist, *setup.y_dist, cfg.r_max);
      nlohmann::json th =
          pmf_json(lim.pmf, lim.regime == DegreeRegime::Linear ? "thm1_eq3" : "thm2_eq5");
      th["regime"] = lim.regime == DegreeRegime::Linear ? "linear" : "power";
      th["rate"] = lim.rate;
      th["gamma_used"] = lim.gamma_used;
      th["achieved_rel_error"] = lim.achieved_rel_error;
      th["tail_target_met"] = lim.tail_target_met;
      rep.theory["degree_limit"] = th;
      push_row(rep, "degree_limit_p0", "0", lim.pmf.at(0), std::nullopt, std::nullopt,
               lim.pmf.at(0), 0);
      if (lim.regime == DegreeRegime::Linear) {
        rep.theory["kappa"] = pmf_json(lim.kappa, "thm1_eq4");
        std::string warn;
        const auto a1 = setup.x_moment(1, &warn);
        if (a1) {
          double max_diff = 0.0;
          for (const double z : {0.0, -0.5, 0.5}) {
            const double closed = degree_limit_pgf(params, *setup.y_dist, *a1, lim.kappa, z);
            const double head = pmf_pgf_head(lim.pmf, z);
            max_diff = std::max(max_diff, std::abs(closed - head));
          }
          rep.distances["pgf_max_abs_diff"] = max_diff;
        }
      }
    } catch (const InfiniteMomentError& e) {
      warn_once(rep, std::string("degree limit law skipped: ") + e.what());
    }
  } else {
    warn_once(rep, "degree limit law skipped: weights are fixed vectors");
  }

  // Assortativity limit constants.
  {
    std::string warn;
    const auto a2 = setup.x_moment(2, &warn);
    const auto a3 = setup.x_moment(3, &warn);
    const auto a4 = setup.x_moment(4, &warn);
    const auto b1 = setup.y_moment(1, &warn);
    const auto b2 = setup.y_moment(2, &warn);
    const auto b3 = setup.y_moment(3, &warn);
    if (a2 && a3 && a4 && b1 && b2 && b3) {
      const AssortativityConstants ac =
          assortativity_constants(*a2, *a3, *a4, *b1, *b2, *b3, params.a, params.b);
      nlohmann::json th;
      th["h"] = ac.h;
      th["source_h"] = "sec2_estLs";
      th["gamma_tilde"] = ac.gamma_tilde;
      th["delta1"] = value_json(ac.delta1, "sec2_s_momentai");
      th["delta2"] = value_json(ac.delta2, "sec2_s_momentai");
      th["cap_delta"] = value_json(ac.cap_delta, "sec2_s_momentai");
      if (ac.r_st) {
        th["r_st"] = value_json(*ac.r_st, "sec2_r_st");
        push_row(rep, "r_st", "", *ac.r_st, std::nullopt, std::nullopt, *ac.r_st, 0);
      } else {
        warn_once(rep, "limit correlation withheld: delta2 - delta1^2 <= 0");
      }
      rep.theory["assortativity"] = th;
    } else if (!warn.empty()) {
      warn_once(rep, "assortativity constants skipped: " + warn);
    }
  }

  // Optional pair/triple asymptotics for explicitly supplied indices.
  if (cfg.s >= 1 && cfg.t > cfg.s) {
    try {
      rep.theory["theta"] = value_json(theta_pair(params, cfg.s, cfg.t), "sec34_theta");
    } catch (const std::invalid_argument& e) {
      warn_once(rep, std::string("theta skipped: ") + e.what());
    }
  }
  if (cfg.u >= 1) {
    std::string warn;
    const auto a2 = setup.x_moment(2, &warn);
    const auto a3 = setup.x_moment(3, &warn);
    const auto b1 = setup.y_moment(1, &warn);
    const auto b2 = setup.y_moment(2, &warn);
    if (a2 && a3 && b1 && b2) {
      try {
        const TriangleAsymptotics tri =
            asymptotic_triangle(params, {*a2, *a3, *b1, *b2}, cfg.s, cfg.t, cfg.u);
        nlohmann::json th;
        th["p_delta"] = value_json(tri.p_delta, "thm3_eq6");
        th["alpha_t_su"] = value_json(tri.alpha_t_su, "thm3_eq7");
        th["alpha_s_tu"] = value_json(tri.alpha_s_tu, "thm3_eq8");
        th["alpha_u_st"] = value_json(tri.alpha_u_st, "thm3_eq9");
        th["note"] = "leading order";
        rep.theory["triangle"] = th;
      } catch (const std::invalid_argument& e) {
        warn_once(rep, std::string("triangle asymptotics skipped: ") + e.what());
      }
    } else if (!warn.empty()) {
      warn_once(rep, "triangle asymptotics skipped: " + warn);
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// simulate

ExperimentReport simulate_report(const ExperimentConfig& cfg, BipartiteGraph* out_graph) {
  ExperimentReport rep;
  rep.kind = "simulate";
  rep.seed = cfg.seed;
  rep.threads = resolve_threads(cfg.threads);
  const ModelParams params = cfg.model();
  const WeightSetup setup = cfg.weight_setup();

  const IndexInterval top = item_window(params, cfg.t_max);
  const std::int64_t item_hi = std::max<std::int64_t>(top.hi, 1);
  RandomStream rs = RandomStream::derive(cfg.seed, 0);
  const WeightVector x = setup.realize_x(1, item_hi, rs);
  const WeightVector y = setup.realize_y(1, cfg.t_max, rs);
  BipartiteGraph g = generate_bipartite(params, x, y, cfg.t_max, cfg.gen_backend(), rs);

  rep.n_rep = 1;
  rep.n_completed = 1;
  rep.estimates["edge_count"] = g.edge_count;
  rep.estimates["actor_horizon"] = g.actor_horizon;
  rep.estimates["item_horizon"] = g.item_horizon;
  rep.estimates["backend"] = backend_name(cfg.gen_backend());

  // Analytic edge-count mean/variance for the realized weights (the edge
  // indicators are independent Bernoullis).
  double total_window = 0.0;
  for (std::int64_t j = 1; j <= cfg.t_max; ++j)
    total_window += static_cast<double>(item_window(params, j).size());
  if (total_window <= 2e8) {
    double mean = 0.0, var = 0.0;
    for (std::int64_t j = 1; j <= cfg.t_max; ++j) {
      const IndexInterval w = item_window(params, j);
      for (std::int64_t i = w.lo; i <= w.hi; ++i) {
        const double p = edge_probability_in_window(x.at(i), y.at(j), i, j);
        mean += p;
        var += p * (1.0 - p);
      }
    }
    rep.theory["edge_count"] = value_json(mean, "eq1");
    rep.theory["edge_count_sd"] = value_json(std::sqrt(var), "eq1");
    if (var > 0.0)
      rep.distances["edge_count_z"] =
          (static_cast<double>(g.edge_count) - mean) / std::sqrt(var);
    push_row(rep, "edge_count", std::to_string(cfg.t_max), static_cast<double>(g.edge_count),
             std::nullopt, std::nullopt, mean, 1);
  } else {
    warn_once(rep, "analytic edge-count moments skipped: window sum too large");
    push_row(rep, "edge_count", std::to_string(cfg.t_max), static_cast<double>(g.edge_count),
             std::nullopt, std::nullopt, std::nullopt, 1);
  }

  if (out_graph) *out_graph = std::move(g);
  return rep;
}

// ---------------------------------------------------------------------------
// sweep

std::int64_t scaled_index(std::int64_t base, double scale) {
  return static_cast<std::int64_t>(std::llround(static_cast<double>(base) * scale));
}

ExperimentReport sweep_report(const ExperimentConfig& cfg) {
  ExperimentReport rep;
  rep.kind = "sweep";
  rep.seed = cfg.seed;
  rep.threads = resolve_threads(cfg.threads);
  const ModelParams params = cfg.model();
  const WeightSetup setup = cfg.weight_setup();
  nlohmann::json table = nlohmann::json::array();

  if (cfg.sweep_experiment == "degree") {
    if (!setup.x_dist || !setup.y_dist)
      throw std::invalid_argument("degree sweep requires weight distributions, not fixed vectors");
    const DegreeLimitLaw lim = degree_limit_pmf(params, *setup.x_dist, *setup.y_dist, cfg.r_max);
    rep.theory["degree_limit"] =
        pmf_json(lim.pmf, lim.regime == DegreeRegime::Linear ? "thm1_eq3" : "thm2_eq5");
    std::vector<double> tvs;
    for (double sc : cfg.sweep_scales) {
      const std::int64_t t = scaled_index(cfg.t, sc);
      const IndexInterval w = item_window(params, t);
      const std::int64_t y_lo = w.empty() ? t : actor_window(params, w.lo).lo;
      const std::int64_t y_hi = w.empty() ? t : actor_window(params, w.hi).hi;
      const WeightVector xv =
          WeightVector::constant(setup.x_dist->constant_value(), w.lo, std::max(w.hi, w.lo));
      const WeightVector yv = WeightVector::constant(setup.y_dist->constant_value(), y_lo, y_hi);
      const Pmf exact = exact_path2_pmf(params, xv, yv, t, cfg.r_max);
      const double tv = tv_distance(exact, lim.pmf);
      tvs.push_back(tv);
      nlohmann::json entry;
      entry["scale"] = sc;
      entry["t"] = t;
      entry["tv_exact_vs_limit"] = tv;
      entry["exact_p0"] = exact.at(0);
      entry["limit_p0"] = lim.pmf.at(0);
      table.push_back(entry);
      push_row(rep, "tv_exact_vs_limit", std::to_string(t), tv, std::nullopt, std::nullopt,
               std::nullopt, 0);
    }
    rep.distances["tv_by_scale"] = tvs;
  } else if (cfg.sweep_experiment == "clustering") {
    McOptions opt = cfg.mc_options();
    for (double sc : cfg.sweep_scales) {
      const std::int64_t s = scaled_index(cfg.s, sc);
      const std::int64_t t = scaled_index(cfg.t, sc);
      const std::int64_t u = scaled_index(cfg.u, sc);
      const ExperimentReport sub = mc_clustering(params, setup, s, t, u, opt);
      nlohmann::json entry;
      entry["scale"] = sc;
      entry["s"] = s;
      entry["t"] = t;
      entry["u"] = u;
      entry["p_delta"] = sub.estimates.value("p_delta", 0.0);
      if (sub.theory.contains("triangle")) {
        entry["p_delta_theory"] = sub.theory["triangle"]["p_delta"]["value"];
        if (sub.distances.contains("rel_err_p_delta"))
          entry["rel_err_p_delta"] = sub.distances["rel_err_p_delta"];
        if (sub.distances.contains("rel_err_alpha_t_su"))
          entry["rel_err_alpha_t_su"] = sub.distances["rel_err_alpha_t_su"];
      }
      if (sub.estimates.contains("alpha_t_su")) entry["alpha_t_su"] = sub.estimates["alpha_t_su"];
      table.push_back(entry);
      const std::string label =
          std::to_string(s) + ":" + std::to_string(t) + ":" + std::to_string(u);
      const std::optional<double> p_th =
          sub.theory.contains("triangle")
              ? std::optional<double>(sub.theory["triangle"]["p_delta"]["value"].get<double>())
              : std::nullopt;
      push_row(rep, "p_delta", label, sub.estimates.value("p_delta", 0.0), std::nullopt,
               std::nullopt, p_th, 0);
      if (sub.estimates.contains("alpha_t_su")) {
        const std::optional<double> a_th =
            sub.theory.contains("triangle")
                ? std::optional<double>(
                      sub.theory["triangle"]["alpha_t_su"]["value"].get<double>())
                : std::nullopt;
        push_row(rep, "alpha_t_su", label, sub.estimates["alpha_t_su"].get<double>(),
                 std::nullopt, std::nullopt, a_th, 0);
      }
      for (const std::string& w : sub.warnings) warn_once(rep, w);
    }
  } else {  // assort
    for (std::size_t idx = 0; idx < cfg.sweep_scales.size(); ++idx) {
      const double sc = cfg.sweep_scales[idx];
      const std::int64_t s = scaled_index(cfg.s, sc);
      const std::int64_t t = scaled_index(cfg.t, sc);
      McOptions opt = cfg.mc_options();
      opt.seed = cfg.seed + idx;  // decorrelate the per-scale runs
      const ExperimentReport sub = mc_assortativity(params, setup, s, t, opt);
      rep.n_rep += sub.n_rep;
      rep.n_completed += sub.n_completed;
      rep.truncated = rep.truncated || sub.truncated;
      nlohmann::json entry;
      entry["scale"] = sc;
      entry["s"] = s;
      entry["t"] = t;
      entry["seed"] = opt.seed;
      entry["n_raw"] = sub.n_completed;
      entry["n_accepted"] = sub.estimates.value("n_accepted", std::int64_t{0});
      if (sub.estimates.contains("acceptance_rate"))
        entry["acceptance_rate"] = sub.estimates["acceptance_rate"];
      if (sub.estimates.contains("pearson_r")) entry["pearson_r"] = sub.estimates["pearson_r"];
      table.push_back(entry);
      for (const CsvRow& row : sub.rows)
        if (row.quantity == "pearson_r" || row.quantity == "acceptance_rate") {
          CsvRow copy = row;
          copy.seed = opt.seed;
          rep.rows.push_back(std::move(copy));
        }
      if (sub.theory.contains("assortativity") && !rep.theory.contains("assortativity"))
        rep.theory["assortativity"] = sub.theory["assortativity"];
      for (const std::string& w : sub.warnings) warn_once(rep, w);
    }
  }
  rep.estimates["table"] = table;
  return rep;
}

ExperimentReport build_report_impl(const ExperimentConfig& cfg, BipartiteGraph* sim_graph) {
  ExperimentReport rep;
  const ModelParams params = cfg.model();
  const WeightSetup setup = cfg.weight_setup();
  if (cfg.subcommand == "theory") {
    rep = theory_report(cfg);
  } else if (cfg.subcommand == "simulate") {
    rep = simulate_report(cfg, sim_graph);
  } else if (cfg.subcommand == "degree") {
    rep = mc_degree_distribution(params, setup, cfg.t, cfg.mc_options());
  } else if (cfg.subcommand == "clustering") {
    rep = mc_clustering(params, setup, cfg.s, cfg.t, cfg.u, cfg.mc_options());
  } else if (cfg.subcommand == "assort") {
    rep = mc_assortativity(params, setup, cfg.s, cfg.t, cfg.mc_options());
  } else if (cfg.subcommand == "sweep") {
    rep = sweep_report(cfg);
  } else {
    throw std::invalid_argument("unknown subcommand '" + cfg.subcommand + "'");
  }
  rep.config = cfg.echo();
  rep.warnings.insert(rep.warnings.begin(), cfg.warnings.begin(), cfg.warnings.end());
  return rep;
}

void write_text_file(const std::string& path, const std::string& content,
                     std::vector<std::string>& written) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  written.push_back(path);
  out << content;
  out.flush();
  if (!out.good()) throw std::runtime_error("failed to write output file: " + path);
}

}  // namespace

ExperimentReport build_report(const ExperimentConfig& cfg) {
  return build_report_impl(cfg, nullptr);
}

std::vector<std::string> run_experiment(const ExperimentConfig& cfg) {
  namespace fs = std::filesystem;
  const auto start = std::chrono::steady_clock::now();
  fs::create_directories(cfg.out_dir);
  std::vector<std::string> written;
  try {
    BipartiteGraph graph;
    ExperimentReport rep = build_report_impl(cfg, cfg.subcommand == "simulate" ? &graph : nullptr);
    rep.duration_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    const fs::path dir(cfg.out_dir);
    if (cfg.out_json) {
      write_text_file((dir / "report.json").string(), report_to_json(rep), written);
      write_text_file((dir / "runtime.json").string(), runtime_to_json(rep), written);
    }
    if (cfg.out_csv) write_text_file((dir / "report.csv").string(), report_to_csv(rep), written);
    if (cfg.subcommand == "simulate") {
      std::ostringstream os;
      const std::string x_spec =
          cfg.x_values.empty() ? cfg.x_dist
                               : "values(first=" + std::to_string(cfg.x_first) + ")";
      const std::string y_spec =
          cfg.y_values.empty() ? cfg.y_dist
                               : "values(first=" + std::to_string(cfg.y_first) + ")";
      write_edge_list(os, graph, cfg.model(), x_spec, y_spec, cfg.seed, cfg.gen_backend());
      write_text_file((dir / "edges.tsv").string(), os.str(), written);
    }
    return written;
  } catch (...) {
    for (const std::string& p : written) {
      std::error_code ec;
      fs::remove(fs::path(p), ec);
    }
    throw;
  }
}

}  // namespace rig
