#ifndef COLLAPSE_GENERATIONS_HPP
#define COLLAPSE_GENERATIONS_HPP

#include <cstdint>
#include <vector>

#include "collapse/bigram.hpp"
#include "collapse/categorical.hpp"
#include "collapse/fitting.hpp"

namespace collapse {

// One regeneration arrow: empirical frequencies of a T0-sample, then the
// configured distortions, renormalized.
Categorical regenerate(const Categorical& dist, uint64_t t0,
                       std::span<const TailTransform> transforms, RngStream& rng);

enum class ChainLearner { hutter, bigram };

struct ChainConfig {
    int generations = 0;                  // n >= 0
    std::vector<uint64_t> t0_schedule;    // one entry, or one per generation
    std::vector<TailTransform> transforms;
    ChainLearner learner = ChainLearner::hutter;
    std::vector<uint64_t> final_t_grid;
    int trials = 1;
    uint64_t seed = 1;
    int workers = 0;
    // bigram worlds only
    double cond_beta = 2.0;
    uint32_t vocab = 0;
    bool propagate_fitted_marginal = false; // default re-imposes the true marginal
    int tv_trials = 8;                      // inner TV Monte Carlo per (gen, T)
    bool keep_trace_distributions = false;  // retain trial 0's fitted distributions

    uint64_t t0_for(int generation) const {
        if (t0_schedule.empty()) return 0;
        if (t0_schedule.size() == 1) return t0_schedule.front();
        return t0_schedule.at(static_cast<std::size_t>(generation));
    }
};

struct GenerationTrace {
    // per generation (0 = the true distribution), averaged over trials
    std::vector<double> mean_support_size;
    std::vector<double> mean_entropy;
    // trial 0's fitted marginals, kept when the config asks for them
    std::vector<Categorical> distributions;
};

struct ChainResult {
    std::vector<ScalingCurve> per_generation; // index 0 is the clean curve
    GenerationTrace trace;
};

// Hutter chain: each generation is a regenerated marginal; the final
// learner is scored by the exact unseen-mass formula against the truth.
ChainResult run_chain(const Categorical& truth, const ChainConfig& config);

// Bigram chain: each generation refits conditionals from T0 pairs and
// resamples with the true context marginal re-imposed (the curation step);
// downstream learner scored by expected TV against the true family.
ChainResult run_chain_bigram(const ConditionalFamily& truth, const ChainConfig& config);

} // namespace collapse

#endif
