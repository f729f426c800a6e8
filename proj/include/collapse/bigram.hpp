#ifndef COLLAPSE_BIGRAM_HPP
#define COLLAPSE_BIGRAM_HPP

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "collapse/categorical.hpp"
#include "collapse/fitting.hpp"
#include "collapse/parallel.hpp"
#include "collapse/sampling.hpp"

namespace collapse {

enum class PermutationMode { identity, seeded_random, explicit_table };

// Bigram world: marginal over contexts plus per-context conditionals that
// share the same power-law shape up to a permutation of the vocabulary.
// Conditionals are materialized lazily and cached (publish-once), since
// n_contexts * vocab vectors can be large.
class ConditionalFamily {
public:
    ConditionalFamily(Categorical marginal, double cond_beta, uint32_t vocab,
                      PermutationMode mode, uint64_t perm_seed = 0,
                      std::optional<uint32_t> head_cut = std::nullopt, bool index_cut = false);

    // copies share the immutable cached conditionals
    ConditionalFamily(const ConditionalFamily& other);
    ConditionalFamily& operator=(const ConditionalFamily& other);

    // world with arbitrary materialized conditionals (regeneration chains)
    static ConditionalFamily from_conditionals(Categorical marginal,
                                               std::vector<Categorical> conditionals);

    uint32_t n_contexts() const { return static_cast<uint32_t>(marginal_.support_size()); }
    uint32_t vocab() const { return vocab_; }
    const Categorical& marginal() const { return marginal_; }
    double cond_beta() const { return cond_beta_; }
    std::optional<uint32_t> head_cut() const { return head_cut_; }

    // p(. | i) for context index i in [0, n_contexts)
    const Categorical& conditional(uint32_t ctx) const;
    const AliasTable& conditional_alias(uint32_t ctx) const;

    // per-context vocabulary permutation rank, pi_i(j); identity mode is j+1
    uint32_t rank(uint32_t ctx, uint32_t token) const;

private:
    struct CondData {
        Categorical pmf;
        AliasTable alias;
        CondData(Categorical p) : pmf(std::move(p)), alias(pmf) {}
    };
    ConditionalFamily(Categorical marginal, uint32_t vocab, std::vector<Categorical> conditionals);
    const CondData& cond_data(uint32_t ctx) const;
    Categorical build_conditional(uint32_t ctx) const;

    Categorical marginal_;
    double cond_beta_ = 0.0;
    uint32_t vocab_ = 0;
    PermutationMode mode_;
    uint64_t perm_seed_ = 0;
    std::optional<uint32_t> head_cut_;
    bool index_cut_ = false;
    std::vector<Categorical> explicit_;
    mutable std::vector<std::shared_ptr<const CondData>> cache_;
    mutable std::mutex cache_mu_;
};

// Empirical pair counts n_T(i), n_T(i, j) from a sampled dataset.
struct PairCounts {
    std::vector<uint64_t> context_counts;
    std::unordered_map<uint64_t, uint64_t> joint; // key = i * vocab + j
    uint64_t total = 0;
    uint32_t vocab = 0;
};

PairCounts sample_pairs(const ConditionalFamily& family, uint64_t t, RngStream& rng);

// Count-ratio conditional estimates q_T(j|i) = n_T(i,j) / n_T(i) for seen
// contexts; fitted marginal n_T(i) / T kept for sequence scoring.
struct BigramModel {
    struct Entry {
        uint32_t token;
        double q;
    };
    std::vector<std::vector<Entry>> conditionals; // empty for unseen contexts
    std::vector<uint64_t> context_counts;
    uint64_t total = 0;
    uint32_t vocab = 0;

    bool context_seen(uint32_t ctx) const {
        return ctx < context_counts.size() && context_counts[ctx] > 0;
    }
    double q(uint32_t ctx, uint32_t token) const;          // 0 when unseen pair
    double fitted_marginal(uint32_t ctx) const;
};

BigramModel fit_bigram(const PairCounts& counts);

// scoring convention for contexts absent from the training data
enum class UnseenContextRule {
    assign_two,          // TV(q, p(.|i)) := 2, the worst case
    skip_and_renormalize // drop unseen contexts, renormalize marginal weights
};

// E_test = sum_i p_i E[ TV(q_T(.|i), p(.|i)) ] by Monte Carlo over datasets.
// The optional training world lets the dataset come from a distorted
// family (head-cut data, regenerated data) while the comparison stays
// against this family's true conditionals and marginal weights.
MeanStderr expected_tv_mc(const ConditionalFamily& truth, uint64_t t, int trials, uint64_t seed,
                          UnseenContextRule rule = UnseenContextRule::assign_two, int workers = 0,
                          const ConditionalFamily* train = nullptr);

ScalingCurve expected_tv_curve(const ConditionalFamily& truth, const std::vector<uint64_t>& t_grid,
                               int trials, uint64_t seed,
                               UnseenContextRule rule = UnseenContextRule::assign_two,
                               int workers = 0, const ConditionalFamily* train = nullptr);

// Exact expectation by enumerating every dataset of size T with its
// multinomial probability. Feasible only for (n_ctx * vocab)^T <= 1e7.
double expected_tv_bruteforce(const ConditionalFamily& family, uint64_t t,
                              UnseenContextRule rule = UnseenContextRule::assign_two);

// a(i) = sum_{p(j|i) <= 1/n} p(j|i); b(i) = n^-1/2 sum_{p(j|i) >= 1/n} sqrt(p(j|i));
// boundary atoms p = 1/n land in both sums (the proof uses <= and >=)
std::pair<double, double> berend_conditional_terms(const ConditionalFamily& family, uint32_t ctx,
                                                   uint64_t n);

// Autoregressive sampling: first token from the marginal, following
// tokens from (optionally transformed) conditionals. Requires
// n_contexts == vocab so tokens re-enter as contexts.
std::vector<std::vector<uint32_t>> sample_sequences(const ConditionalFamily& family,
                                                    std::size_t count, std::size_t length,
                                                    RngStream& rng,
                                                    std::span<const TailTransform> inference = {});

// exp of the mean negative log-likelihood per token; unseen transitions
// and first tokens score max(q, floor)
double perplexity(const BigramModel& model, const std::vector<std::vector<uint32_t>>& sequences,
                  double smoothing_floor = 1e-8);

// E[TV(empirical marginal, p)] over T-grid: the Lemma-style marginal rate
ScalingCurve marginal_tv_curve(const Categorical& p, const std::vector<uint64_t>& t_grid,
                               int trials, uint64_t seed, int workers = 0);

} // namespace collapse

#endif
