#ifndef COLLAPSE_HUTTER_HPP
#define COLLAPSE_HUTTER_HPP

#include <cstdint>
#include <vector>

#include "collapse/categorical.hpp"
#include "collapse/fitting.hpp"
#include "collapse/parallel.hpp"
#include "collapse/sampling.hpp"

namespace collapse {

// Infinite-memory learner: memorize every context seen in training,
// abstain otherwise. Labels are deterministic, so only the seen-context
// set matters for the test error.
struct HutterModel {
    std::vector<uint8_t> seen;
    uint64_t seen_count = 0;
};

HutterModel hutter_train(const SampleCounts& counts);

// unseen test mass: sum over i not in seen of p_test[i]
double hutter_error(const HutterModel& model, const Categorical& p_test);

// Monte Carlo mean/stderr of the train-and-score pipeline; agrees with
// hutter_exact_error within sampling noise (oracle-equivalence property).
MeanStderr hutter_mc_error(const Categorical& p_test, const Categorical& q_train, uint64_t t,
                           int trials, uint64_t seed, int workers = 0);

// Exact error curve over a T grid for an arbitrary training distribution.
ScalingCurve hutter_exact_curve(const Categorical& p_test, const Categorical& q_train,
                                const std::vector<uint64_t>& t_grid, int workers = 0);

// Mixture pi * p + (1 - pi) * truncate(p, k); exact when trials == 0.
ScalingCurve grokking_curve(const Categorical& p, std::size_t k, double pi,
                            const std::vector<uint64_t>& t_grid, int trials, uint64_t seed,
                            int workers = 0);

// Equal-weight mixture of truncate(p, k) and acquired_tail(p, N_start);
// requires N_start >= k + 1. Exact when trials == 0.
ScalingCurve annealed_curve(const Categorical& p, const PowerLawSpec& spec, std::size_t k,
                            std::size_t n_start, const std::vector<uint64_t>& t_grid, int trials,
                            uint64_t seed, double clean_weight = 0.5, int workers = 0);

// T_real clean samples pooled with a frozen chunk of T_AI samples from
// truncate(p, k). Exact mode uses P(unseen) = (1-p)^Tr (1-p')^Ta.
ScalingCurve fixed_budget_curve(const Categorical& p, std::size_t k, uint64_t t_ai,
                                const std::vector<uint64_t>& t_real_grid, int trials,
                                uint64_t seed, int workers = 0);

// train on Zipf(beta'), test on p (tail narrowing); exact formula
ScalingCurve narrow_curve(const Categorical& p, double beta_prime,
                          const std::vector<uint64_t>& t_grid, int workers = 0);

} // namespace collapse

#endif
