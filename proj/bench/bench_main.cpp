// Timing comparison for the two generation backends and for the threaded
// replicate driver against its serial path.  Plain wall-clock timing; run on
// a quiet machine and compare medians across repeats if the numbers matter.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <vector>

#include "rig/model.hpp"
#include "rig/parallel.hpp"
#include "rig/rng.hpp"
#include "rig/stats.hpp"

using namespace rig;
using clock_type = std::chrono::steady_clock;

namespace {

double seconds_since(clock_type::time_point start) {
  return std::chrono::duration<double>(clock_type::now() - start).count();
}

void bench_backends() {
  std::printf("-- generation: naive scan vs envelope skip --\n");
  std::printf("%10s %8s %14s %14s %8s\n", "t_max", "edges", "naive ops/s", "skip ops/s",
              "speedup");
  ModelParams p{1.0, 4.0, TauFunction::linear()};
  for (std::int64_t t_max : {500, 2000, 8000}) {
    const std::int64_t item_hi = item_window(p, t_max).hi;
    const auto x = WeightVector::constant(0.8, 1, item_hi);
    const auto y = WeightVector::constant(0.8, 1, t_max);
    double secs[2];
    std::int64_t edges = 0;
    const int reps = t_max <= 2000 ? 20 : 5;
    int k = 0;
    for (GenBackend b : {GenBackend::Naive, GenBackend::EnvelopeSkip}) {
      RandomStream rs(kDefaultSeed);
      const auto start = clock_type::now();
      for (int r = 0; r < reps; ++r) {
        const auto g = generate_bipartite(p, x, y, t_max, b, rs);
        edges = g.edge_count;
      }
      secs[k++] = seconds_since(start) / reps;
    }
    std::printf("%10lld %8lld %14.3g %14.3g %7.1fx\n", static_cast<long long>(t_max),
                static_cast<long long>(edges), 1.0 / secs[0], 1.0 / secs[1], secs[0] / secs[1]);
  }
}

void bench_threads() {
  std::printf("\n-- degree replicates: serial vs threaded driver --\n");
  std::printf("%8s %12s %12s %8s\n", "threads", "reps/s", "seconds", "speedup");
  ModelParams p{1.0, 4.0, TauFunction::linear()};
  WeightSetup w;
  w.x_dist = WeightDistribution::constant(1.0);
  w.y_dist = WeightDistribution::constant(1.0);
  const int hw = resolve_threads(0);
  double base = 0.0;
  for (int threads : {1, hw}) {
    McOptions opt;
    opt.n_rep = 200000;
    opt.seed = kDefaultSeed;
    opt.threads = threads;
    const auto start = clock_type::now();
    const auto rep = mc_degree_distribution(p, w, 400, opt);
    (void)rep;
    const double secs = seconds_since(start);
    if (threads == 1) base = secs;
    std::printf("%8d %12.3g %12.3g %7.2fx\n", threads, opt.n_rep / secs, secs, base / secs);
    if (hw == 1) break;  // nothing to compare against on a single-core host
  }
}

}  // namespace

int main() {
  bench_backends();
  bench_threads();
  return 0;
}
