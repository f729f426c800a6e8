#ifndef COLLAPSE_PARALLEL_HPP
#define COLLAPSE_PARALLEL_HPP

#include <cstdint>
#include <functional>
#include <vector>

namespace collapse {

// Worker count resolution: explicit value, else COLLAPSE_WORKERS env var,
// else OpenMP hardware default. 1 selects the serial reference path.
int resolve_workers(int requested = 0);

// Runs fn(i) for i in [0, n). workers == 1 is a plain loop (the serial
// reference); workers > 1 uses OpenMP. Results must be written to
// per-index slots: numeric output is then independent of the schedule.
void parallel_for(int64_t n, int workers, const std::function<void(int64_t)>& fn);

// Deterministic sum of f(i) over [0, n): fixed 4096-element chunks are
// summed serially, chunk results combined in index order. Bit-identical
// for any worker count.
double chunked_sum(int64_t n, int workers, const std::function<double(int64_t)>& f);

// Pre-chunked variant: fn fills the sum of its chunk [lo, hi).
double chunked_sum_ranges(int64_t n, int workers,
                          const std::function<double(int64_t, int64_t)>& chunk_sum);

struct MeanStderr {
    double mean = 0.0;
    double stderr_ = 0.0;
};

// mean and standard error of per-trial values
MeanStderr summarize(const std::vector<double>& values);

// Trial grid driver: evaluates cell(point, trial) -> double for every
// (point, trial), parallel over cells, and reduces each point's trials in
// trial order. The cell function must derive all randomness from its own
// (point, trial) coordinates.
std::vector<MeanStderr> run_trial_grid(
    int64_t n_points, int64_t n_trials, int workers,
    const std::function<double(int64_t, int64_t)>& cell);

} // namespace collapse

#endif
