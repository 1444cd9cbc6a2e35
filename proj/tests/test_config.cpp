#include <cstdlib>
#include <stdexcept>
#include <string>

#include <doctest.h>

#include "rig/config.hpp"
#include "rig/run.hpp"

using namespace rig;

namespace {

ExperimentConfig parse(const std::string& sub, const std::string& text,
                       FlagOverrides flags = {}) {
  return parse_config(sub, text, flags);
}

bool throws_with(const std::string& sub, const std::string& text, const char* needle) {
  try {
    (void)parse_config(sub, text, {});
  } catch (const std::exception& e) {
    return std::string(e.what()).find(needle) != std::string::npos;
  }
  return false;
}

}  // namespace

TEST_CASE("defaults and key parsing") {
  const auto cfg = parse("degree", "t = 50\nn_rep = 10\n");
  CHECK(cfg.a == doctest::Approx(1.0));
  CHECK(cfg.b == doctest::Approx(4.0));
  CHECK(cfg.tau_name == "linear");
  CHECK(cfg.t == 50);
  CHECK(cfg.n_rep == 10);
  CHECK(cfg.seed == kDefaultSeed);
  CHECK(cfg.backend == "envelope-skip");
  CHECK(cfg.out_json);
  CHECK(cfg.out_csv);
}

TEST_CASE("comments, spacing and value forms") {
  const auto cfg = parse("degree",
                         "# a comment\n"
                         "  t = 50   # trailing comment\n"
                         "n_rep = 10\n"
                         "a = 0.5\n"
                         "b = 2\n"
                         "tau = power\n"
                         "nu = 2.5\n"
                         "x_dist = pareto(2.5, 1)\n");
  CHECK(cfg.t == 50);
  CHECK(cfg.a == doctest::Approx(0.5));
  CHECK(cfg.tau_name == "power");
  CHECK(cfg.nu == doctest::Approx(2.5));
  CHECK(cfg.x_dist == "pareto(2.5, 1)");
}

TEST_CASE("sections apply only to the chosen subcommand") {
  const std::string text =
      "seed = 99\n"
      "[degree]\n"
      "t = 40\n"
      "n_rep = 5\n"
      "[clustering]\n"
      "s = 30\n"
      "t = 36\n"
      "u = 45\n";
  const auto deg = parse("degree", text);
  CHECK(deg.t == 40);
  CHECK(deg.seed == 99);
  CHECK(deg.u == 0);
  const auto clu = parse("clustering", text);
  CHECK(clu.s == 30);
  CHECK(clu.t == 36);
  CHECK(clu.u == 45);
}

TEST_CASE("parse errors carry the offending key") {
  CHECK(throws_with("degree", "t = 50\nn_rep = 5\nbogus = 1\n", "bogus"));
  CHECK(throws_with("degree", "t = fifty\nn_rep = 5\n", "invalid value for t"));
  CHECK(throws_with("degree", "t = 50\nn_rep = 5\na = 4\nb = 1\n", "0 < a < b"));
  CHECK(throws_with("degree", "t = 50\nn_rep = 5\nformat = yaml\n", "unknown format"));
  CHECK(throws_with("degree", "t = 50\nn_rep = 5\nbackend = quantum\n", "backend"));
  CHECK(throws_with("degree", "t = 50\nn_rep = 5\ntau = power\nnu = 0.5\n", "nu"));
  CHECK(throws_with("degree", "n_rep = 5\n", "t"));
  // Unknown keys are rejected in every section, not only the selected one.
  CHECK(throws_with("degree", "t = 50\nn_rep = 5\n[assort]\nbad_key = 3\n", "bad_key"));
}

TEST_CASE("pair and triple window conditions are validated at parse time") {
  CHECK(throws_with("assort", "s = 2\nt = 9\nn_rep = 5\n", "window condition"));
  CHECK(throws_with("clustering", "s = 10\nt = 20\nu = 50\nn_rep = 5\n", "window condition"));
  CHECK_NOTHROW((void)parse("assort", "s = 500\nt = 600\nn_rep = 5\n"));
  CHECK_NOTHROW((void)parse("clustering", "s = 30\nt = 36\nu = 45\n"));
}

TEST_CASE("format switch controls outputs") {
  const auto js = parse("degree", "t = 5\nn_rep = 1\nformat = json\n");
  CHECK(js.out_json);
  CHECK_FALSE(js.out_csv);
  const auto both = parse("degree", "t = 5\nn_rep = 1\nformat = json,csv\n");
  CHECK(both.out_json);
  CHECK(both.out_csv);
}

TEST_CASE("flag overrides win over file values") {
  FlagOverrides flags;
  flags.seed = 777;
  flags.sets = {"t=60", "degree.n_rep=20"};
  const auto cfg = parse("degree", "t = 50\nn_rep = 10\nseed = 5\n", flags);
  CHECK(cfg.seed == 777);
  CHECK(cfg.t == 60);
  CHECK(cfg.n_rep == 20);
  // A set targeting another section is validated but skipped.
  FlagOverrides other;
  other.sets = {"assort.s=2"};
  const auto cfg2 = parse("degree", "t = 50\nn_rep = 10\n", other);
  CHECK(cfg2.s == 0);
}

TEST_CASE("realized weight lists") {
  const auto cfg = parse("degree",
                         "t = 3\nn_rep = 5\n"
                         "x_values = 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12\n"
                         "y_values = 1, 1, 1\n");
  const auto setup = cfg.weight_setup();
  REQUIRE(setup.x_fixed.has_value());
  CHECK(setup.x_fixed->covers(1, 12));
  CHECK(setup.x_fixed->at(4) == doctest::Approx(4.0));
  CHECK_FALSE(setup.x_dist.has_value());
  bool noted = false;
  for (const auto& w : cfg.warnings)
    if (w.find("x_dist is ignored") != std::string::npos) noted = true;
  CHECK(noted);
  CHECK(throws_with("degree", "t = 3\nn_rep = 5\nx_values = 1, -2\n", "x_values"));
}

TEST_CASE("environment thread fallback") {
  setenv("RIG_LAB_THREADS", "3", 1);
  const auto cfg = parse("degree", "t = 5\nn_rep = 1\n");
  CHECK(cfg.threads == 3);
  unsetenv("RIG_LAB_THREADS");
  const auto cfg2 = parse("degree", "t = 5\nn_rep = 1\nthreads = 2\n");
  CHECK(cfg2.threads == 2);
}

TEST_CASE("sweep configuration") {
  const auto cfg = parse("sweep",
                         "experiment = degree\n"
                         "scales = 1, 2, 4\n"
                         "t = 100\nn_rep = 10\n");
  CHECK(cfg.sweep_experiment == "degree");
  REQUIRE(cfg.sweep_scales.size() == 3);
  CHECK(cfg.sweep_scales[2] == doctest::Approx(4.0));
  CHECK(throws_with("sweep", "experiment = bogus\nscales = 1\nt = 5\nn_rep = 1\n", "experiment"));
  CHECK(throws_with("sweep", "experiment = degree\nt = 5\nn_rep = 1\n", "scales"));
  // Every scale must satisfy the window conditions.
  CHECK(throws_with("sweep",
                    "experiment = clustering\nscales = 1\ns = 10\nt = 20\nu = 50\nn_rep = 5\n",
                    "window condition"));
}

TEST_CASE("echo round-trips to the same configuration") {
  const auto cfg = parse("degree",
                         "t = 60\nn_rep = 40\nseed = 3\na = 0.5\nb = 2\n"
                         "tau = power\nnu = 2\nx_dist = lognormal(0, 0.3)\nr_max = 12\n");
  const auto cfg2 = config_from_echo(cfg.echo());
  CHECK(cfg2.echo() == cfg.echo());
  CHECK(cfg2.subcommand == "degree");
  CHECK(cfg2.nu == doctest::Approx(2.0));
}

TEST_CASE("reports rebuilt from their embedded echo are byte-identical") {
  const auto cfg = parse("degree", "t = 60\nn_rep = 500\nseed = 12\nr_max = 16\n");
  const auto rep1 = build_report(cfg);
  const auto rep2 = build_report(config_from_echo(rep1.config));
  CHECK(report_to_json(rep1) == report_to_json(rep2));
  CHECK(report_to_csv(rep1) == report_to_csv(rep2));
}

TEST_CASE("theory subcommand accepts optional focus indices") {
  const auto plain = parse("theory", "");
  CHECK(plain.subcommand == "theory");
  const auto pair = parse("theory", "s = 500\nt = 600\n");
  CHECK(pair.s == 500);
  const auto triple = parse("theory", "s = 300\nt = 360\nu = 450\n");
  CHECK(triple.u == 450);
  CHECK(throws_with("theory", "s = 2\nt = 9\n", "window condition"));
}

TEST_CASE("simulate requires a horizon") {
  CHECK(throws_with("simulate", "", "t_max"));
  const auto cfg = parse("simulate", "t_max = 100\n");
  CHECK(cfg.t_max == 100);
}
