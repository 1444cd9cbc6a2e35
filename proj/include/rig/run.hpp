#pragma once

#include <string>
#include <vector>

#include "rig/config.hpp"
#include "rig/stats.hpp"

namespace rig {

/// Builds the report for a configuration without touching the filesystem.
ExperimentReport build_report(const ExperimentConfig& cfg);

/// Runs the experiment and writes report.json / runtime.json / report.csv
/// (and edges.tsv for simulate) into cfg.out_dir.  Partially written outputs
/// are removed when the run fails.  Returns the paths written.
std::vector<std::string> run_experiment(const ExperimentConfig& cfg);

}  // namespace rig
