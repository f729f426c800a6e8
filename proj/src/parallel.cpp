#include "collapse/parallel.hpp"

#include <cmath>
#include <cstdlib>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace collapse {

int resolve_workers(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("COLLAPSE_WORKERS")) {
        int v = std::atoi(env);
        if (v > 0) return v;
    }
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

void parallel_for(int64_t n, int workers, const std::function<void(int64_t)>& fn) {
    workers = resolve_workers(workers);
    if (workers <= 1 || n <= 1) {
        for (int64_t i = 0; i < n; ++i) fn(i);
        return;
    }
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 1) num_threads(workers)
    for (int64_t i = 0; i < n; ++i) fn(i);
#else
    for (int64_t i = 0; i < n; ++i) fn(i);
#endif
}

double chunked_sum_ranges(int64_t n, int workers,
                          const std::function<double(int64_t, int64_t)>& chunk_sum) {
    constexpr int64_t kChunk = 4096;
    int64_t n_chunks = (n + kChunk - 1) / kChunk;
    std::vector<double> partial(static_cast<std::size_t>(n_chunks), 0.0);
    parallel_for(n_chunks, workers, [&](int64_t c) {
        int64_t lo = c * kChunk;
        int64_t hi = lo + kChunk < n ? lo + kChunk : n;
        partial[static_cast<std::size_t>(c)] = chunk_sum(lo, hi);
    });
    double total = 0.0;
    for (double v : partial) total += v;
    return total;
}

double chunked_sum(int64_t n, int workers, const std::function<double(int64_t)>& f) {
    return chunked_sum_ranges(n, workers, [&](int64_t lo, int64_t hi) {
        double s = 0.0;
        for (int64_t i = lo; i < hi; ++i) s += f(i);
        return s;
    });
}

MeanStderr summarize(const std::vector<double>& values) {
    MeanStderr out;
    if (values.empty()) return out;
    double sum = 0.0;
    for (double v : values) sum += v;
    out.mean = sum / static_cast<double>(values.size());
    if (values.size() >= 2) {
        double ss = 0.0;
        for (double v : values) ss += (v - out.mean) * (v - out.mean);
        double var = ss / static_cast<double>(values.size() - 1);
        out.stderr_ = std::sqrt(var / static_cast<double>(values.size()));
    }
    return out;
}

std::vector<MeanStderr> run_trial_grid(
    int64_t n_points, int64_t n_trials, int workers,
    const std::function<double(int64_t, int64_t)>& cell) {
    std::vector<double> slots(static_cast<std::size_t>(n_points * n_trials), 0.0);
    parallel_for(n_points * n_trials, workers, [&](int64_t idx) {
        int64_t point = idx / n_trials;
        int64_t trial = idx % n_trials;
        slots[static_cast<std::size_t>(idx)] = cell(point, trial);
    });
    std::vector<MeanStderr> out(static_cast<std::size_t>(n_points));
    for (int64_t p = 0; p < n_points; ++p) {
        std::vector<double> vals(slots.begin() + p * n_trials, slots.begin() + (p + 1) * n_trials);
        out[static_cast<std::size_t>(p)] = summarize(vals);
    }
    return out;
}

} // namespace collapse
