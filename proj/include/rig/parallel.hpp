#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <exception>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "rig/rng.hpp"

namespace rig {

inline int resolve_threads(int requested) {
#ifdef _OPENMP
  return requested > 0 ? requested : omp_get_max_threads();
#else
  return requested > 0 ? requested : 1;
#endif
}

/// Fixed partition of n replicates into blocks; depends on n only, never on
/// the thread count, so per-block accumulators merge identically for any
/// schedule.
inline std::int64_t replicate_block_size(std::int64_t n) {
  const std::int64_t bs = (n + 1023) / 1024;
  return bs < 64 ? 64 : bs;
}

struct ReplicateRunInfo {
  std::int64_t n_done = 0;
  bool truncated = false;
};

/// Runs worker(rep, stream, block_acc) for rep = 0..n_rep-1 with per-replicate
/// streams derived from (seed, rep), accumulating into one BlockAcc per block
/// and merging completed blocks in ascending block order.  With a positive
/// budget_seconds the remaining work is abandoned once the wall clock exceeds
/// it; completed work is still merged and the run is flagged truncated.
template <class BlockAcc, class Worker, class Merge>
ReplicateRunInfo run_replicates(std::int64_t n_rep, std::uint64_t seed, int threads,
                                double budget_seconds, Worker&& worker, Merge&& merge) {
  const std::int64_t block = replicate_block_size(n_rep);
  const std::int64_t n_blocks = n_rep > 0 ? (n_rep + block - 1) / block : 0;

  std::vector<BlockAcc> accs(static_cast<std::size_t>(n_blocks));
  std::vector<std::int64_t> done(static_cast<std::size_t>(n_blocks), 0);
  std::atomic<bool> stop{false};
  std::exception_ptr first_error = nullptr;
  const auto start = std::chrono::steady_clock::now();
  const int nthreads = resolve_threads(threads);
  (void)nthreads;

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 1) num_threads(nthreads)
#endif
  for (std::int64_t bi = 0; bi < n_blocks; ++bi) {
    if (stop.load(std::memory_order_relaxed)) continue;
    const std::int64_t lo = bi * block;
    const std::int64_t hi = std::min(n_rep, lo + block);
    std::int64_t count = 0;
    try {
      for (std::int64_t rep = lo; rep < hi; ++rep) {
        RandomStream rs = RandomStream::derive(seed, static_cast<std::uint64_t>(rep));
        worker(rep, rs, accs[static_cast<std::size_t>(bi)]);
        ++count;
        if (budget_seconds > 0.0 && (count & 255) == 0) {
          const std::chrono::duration<double> el = std::chrono::steady_clock::now() - start;
          if (el.count() > budget_seconds) {
            stop.store(true, std::memory_order_relaxed);
            break;
          }
        }
      }
    } catch (...) {
#ifdef _OPENMP
#pragma omp critical
#endif
      {
        if (!first_error) first_error = std::current_exception();
      }
      stop.store(true, std::memory_order_relaxed);
    }
    done[static_cast<std::size_t>(bi)] = count;
    if (budget_seconds > 0.0) {
      const std::chrono::duration<double> el = std::chrono::steady_clock::now() - start;
      if (el.count() > budget_seconds) stop.store(true, std::memory_order_relaxed);
    }
  }

  if (first_error) std::rethrow_exception(first_error);

  ReplicateRunInfo info;
  for (std::int64_t bi = 0; bi < n_blocks; ++bi) {
    merge(accs[static_cast<std::size_t>(bi)], done[static_cast<std::size_t>(bi)]);
    info.n_done += done[static_cast<std::size_t>(bi)];
  }
  info.truncated = info.n_done < n_rep;
  return info;
}

}  // namespace rig
