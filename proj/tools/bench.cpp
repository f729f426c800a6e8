// Compares the OpenMP kernels against the serial reference path on
// representative workloads and checks that results are bit-identical.

#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#include "collapse/analytic.hpp"
#include "collapse/bigram.hpp"
#include "collapse/categorical.hpp"
#include "collapse/hutter.hpp"
#include "collapse/memory.hpp"
#include "collapse/parallel.hpp"

using namespace collapse;

namespace {

double now_ms() {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

struct BenchRow {
    std::string name;
    double serial_ms;
    double parallel_ms;
    bool identical;
};

template <typename F>
BenchRow bench(const std::string& name, F&& run) {
    double t0 = now_ms();
    auto serial = run(1);
    double t1 = now_ms();
    int hw = resolve_workers(0);
    auto parallel = run(hw);
    double t2 = now_ms();
    bool same = serial.size() == parallel.size();
    if (same)
        for (std::size_t i = 0; i < serial.size(); ++i)
            if (serial[i] != parallel[i]) { same = false; break; }
    return {name, t1 - t0, t2 - t1, same};
}

} // namespace

int main() {
    std::vector<BenchRow> rows;

    {
        Categorical p = zipf_pmf({1.5, 1000000});
        std::vector<uint64_t> grid = geometric_grid_u64(1e2, 1e6, 9);
        rows.push_back(bench("hutter exact curve (N=1e6, 9 T-points)", [&](int workers) {
            ScalingCurve c = hutter_exact_curve(p, p, grid, workers);
            std::vector<double> out;
            for (const auto& pt : c.points) out.push_back(pt.y_mean);
            return out;
        }));
    }
    {
        Categorical p = zipf_pmf({2.0, 100000});
        rows.push_back(bench("hutter MC error (T=1e5, 64 trials)", [&](int workers) {
            auto ms = hutter_mc_error(p, p, 100000, 64, 42, workers);
            return std::vector<double>{ms.mean, ms.stderr_};
        }));
    }
    {
        ConditionalFamily family(zipf_pmf({1.4, 100}), 1.4, 10000, PermutationMode::identity);
        rows.push_back(bench("bigram expected TV (T=1e5, 32 trials)", [&](int workers) {
            auto ms = expected_tv_mc(family, 100000, 32, 42, UnseenContextRule::assign_two, workers);
            return std::vector<double>{ms.mean, ms.stderr_};
        }));
    }
    {
        rows.push_back(bench("memory population error (N=1e4, d=1024)", [&](int workers) {
            Categorical p = zipf_pmf({2.0, 10000});
            GroundTruth truth = GroundTruth::modulo(10000, 32);
            EmbeddingSet emb =
                make_embeddings(10000, 32, 1024, EmbeddingMode::random_sphere, 7, workers);
            RngStream rng(42, 0);
            SampleCounts counts = sample_counts(p, 100000, rng);
            MemoryModel model = train_memory(counts, truth, emb, UpdateRule::counting);
            return std::vector<double>{population_error(model, p, truth, workers)};
        }));
    }

    std::printf("%-44s %12s %12s %9s %s\n", "workload", "serial ms", "parallel ms", "speedup",
                "identical");
    bool all_same = true;
    for (const auto& r : rows) {
        std::printf("%-44s %12.1f %12.1f %8.2fx %s\n", r.name.c_str(), r.serial_ms, r.parallel_ms,
                    r.parallel_ms > 0 ? r.serial_ms / r.parallel_ms : 0.0,
                    r.identical ? "yes" : "NO");
        all_same = all_same && r.identical;
    }
    std::printf("workers: serial=1 parallel=%d\n", resolve_workers(0));
    return all_same ? 0 : 1;
}
