#include "collapse/bigram.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "collapse/rng.hpp"

namespace collapse {

ConditionalFamily::ConditionalFamily(Categorical marginal, double cond_beta, uint32_t vocab,
                                     PermutationMode mode, uint64_t perm_seed,
                                     std::optional<uint32_t> head_cut, bool index_cut)
    : marginal_(std::move(marginal)),
      cond_beta_(cond_beta),
      vocab_(vocab),
      mode_(mode),
      perm_seed_(perm_seed),
      head_cut_(head_cut),
      index_cut_(index_cut) {
    if (mode == PermutationMode::explicit_table)
        throw std::invalid_argument("ConditionalFamily: use from_conditionals for explicit tables");
    if (!(cond_beta_ > 1.0)) throw std::invalid_argument("ConditionalFamily: cond_beta must be > 1");
    if (vocab_ < 1) throw std::invalid_argument("ConditionalFamily: vocab must be >= 1");
    if (head_cut_ && (*head_cut_ < 1 || *head_cut_ > vocab_))
        throw std::invalid_argument("ConditionalFamily: head_cut out of range");
    cache_.resize(marginal_.support_size());
}

ConditionalFamily ConditionalFamily::from_conditionals(Categorical marginal,
                                                       std::vector<Categorical> conditionals) {
    if (conditionals.size() != marginal.support_size())
        throw std::invalid_argument("from_conditionals: one conditional per context required");
    uint32_t vocab = conditionals.empty() ? 0u
                                          : static_cast<uint32_t>(conditionals.front().support_size());
    for (const auto& c : conditionals)
        if (c.support_size() != vocab)
            throw std::invalid_argument("from_conditionals: conditional supports differ");
    return ConditionalFamily(std::move(marginal), vocab, std::move(conditionals));
}

ConditionalFamily::ConditionalFamily(const ConditionalFamily& other)
    : marginal_(other.marginal_),
      cond_beta_(other.cond_beta_),
      vocab_(other.vocab_),
      mode_(other.mode_),
      perm_seed_(other.perm_seed_),
      head_cut_(other.head_cut_),
      index_cut_(other.index_cut_),
      explicit_(other.explicit_) {
    std::lock_guard<std::mutex> lock(other.cache_mu_);
    cache_ = other.cache_;
}

ConditionalFamily& ConditionalFamily::operator=(const ConditionalFamily& other) {
    if (this == &other) return *this;
    std::vector<std::shared_ptr<const CondData>> cache_copy;
    {
        std::lock_guard<std::mutex> lock(other.cache_mu_);
        cache_copy = other.cache_;
    }
    marginal_ = other.marginal_;
    cond_beta_ = other.cond_beta_;
    vocab_ = other.vocab_;
    mode_ = other.mode_;
    perm_seed_ = other.perm_seed_;
    head_cut_ = other.head_cut_;
    index_cut_ = other.index_cut_;
    explicit_ = other.explicit_;
    std::lock_guard<std::mutex> lock(cache_mu_);
    cache_ = std::move(cache_copy);
    return *this;
}

// private explicit-mode constructor body lives here to keep the header lean
ConditionalFamily::ConditionalFamily(Categorical marginal, uint32_t vocab,
                                     std::vector<Categorical> conditionals)
    : marginal_(std::move(marginal)),
      cond_beta_(0.0),
      vocab_(vocab),
      mode_(PermutationMode::explicit_table),
      explicit_(std::move(conditionals)) {
    cache_.resize(marginal_.support_size());
}

uint32_t ConditionalFamily::rank(uint32_t ctx, uint32_t token) const {
    if (mode_ == PermutationMode::identity) return token + 1;
    if (mode_ == PermutationMode::explicit_table)
        throw std::logic_error("rank: explicit families carry no permutation");
    // Fisher-Yates shuffle keyed by (family seed, context); rank of token j
    // is its 1-based position in the shuffled order.
    RngStream rng(perm_seed_, static_cast<uint64_t>(ctx) + 1);
    std::vector<uint32_t> order(vocab_);
    std::iota(order.begin(), order.end(), 0u);
    for (uint32_t i = vocab_ - 1; i > 0; --i) {
        auto j = static_cast<uint32_t>(rng.next_double() * (i + 1));
        if (j > i) j = i;
        std::swap(order[i], order[j]);
    }
    for (uint32_t r = 0; r < vocab_; ++r)
        if (order[r] == token) return r + 1;
    throw std::logic_error("rank: token not found");
}

Categorical ConditionalFamily::build_conditional(uint32_t ctx) const {
    if (mode_ == PermutationMode::explicit_table) return explicit_[ctx];

    std::vector<uint32_t> rank_of(vocab_);
    if (mode_ == PermutationMode::identity) {
        std::iota(rank_of.begin(), rank_of.end(), 1u);
    } else {
        RngStream rng(perm_seed_, static_cast<uint64_t>(ctx) + 1);
        std::vector<uint32_t> order(vocab_);
        std::iota(order.begin(), order.end(), 0u);
        for (uint32_t i = vocab_ - 1; i > 0; --i) {
            auto j = static_cast<uint32_t>(rng.next_double() * (i + 1));
            if (j > i) j = i;
            std::swap(order[i], order[j]);
        }
        for (uint32_t r = 0; r < vocab_; ++r) rank_of[order[r]] = r + 1;
    }

    std::vector<double> w(vocab_, 0.0);
    for (uint32_t j = 0; j < vocab_; ++j) {
        bool keep = true;
        if (head_cut_) keep = index_cut_ ? (j + 1 <= *head_cut_) : (rank_of[j] <= *head_cut_);
        if (keep) w[j] = std::pow(static_cast<double>(rank_of[j]), -cond_beta_);
    }
    return Categorical::from_weights(std::move(w));
}

const ConditionalFamily::CondData& ConditionalFamily::cond_data(uint32_t ctx) const {
    if (ctx >= cache_.size()) throw std::invalid_argument("conditional: context out of range");
    {
        std::lock_guard<std::mutex> lock(cache_mu_);
        if (cache_[ctx]) return *cache_[ctx];
    }
    auto data = std::make_shared<const CondData>(build_conditional(ctx));
    std::lock_guard<std::mutex> lock(cache_mu_);
    if (!cache_[ctx]) cache_[ctx] = std::move(data); // first publisher wins; results identical
    return *cache_[ctx];
}

const Categorical& ConditionalFamily::conditional(uint32_t ctx) const { return cond_data(ctx).pmf; }
const AliasTable& ConditionalFamily::conditional_alias(uint32_t ctx) const {
    return cond_data(ctx).alias;
}

PairCounts sample_pairs(const ConditionalFamily& family, uint64_t t, RngStream& rng) {
    if (t < 1) throw std::invalid_argument("sample_pairs: T must be >= 1");
    PairCounts out;
    out.vocab = family.vocab();
    out.context_counts.assign(family.n_contexts(), 0);
    out.total = t;
    AliasTable marginal_alias(family.marginal());
    for (uint64_t s = 0; s < t; ++s) {
        auto i = static_cast<uint32_t>(marginal_alias.sample(rng));
        auto j = static_cast<uint32_t>(family.conditional_alias(i).sample(rng));
        ++out.context_counts[i];
        ++out.joint[static_cast<uint64_t>(i) * family.vocab() + j];
    }
    return out;
}

double BigramModel::q(uint32_t ctx, uint32_t token) const {
    if (ctx >= conditionals.size()) return 0.0;
    const auto& row = conditionals[ctx];
    auto it = std::lower_bound(row.begin(), row.end(), token,
                               [](const Entry& e, uint32_t tok) { return e.token < tok; });
    if (it != row.end() && it->token == token) return it->q;
    return 0.0;
}

double BigramModel::fitted_marginal(uint32_t ctx) const {
    if (total == 0 || ctx >= context_counts.size()) return 0.0;
    return static_cast<double>(context_counts[ctx]) / static_cast<double>(total);
}

BigramModel fit_bigram(const PairCounts& counts) {
    BigramModel model;
    model.context_counts = counts.context_counts;
    model.total = counts.total;
    model.vocab = counts.vocab;
    model.conditionals.assign(counts.context_counts.size(), {});
    for (const auto& [key, n] : counts.joint) {
        auto ctx = static_cast<uint32_t>(key / counts.vocab);
        auto tok = static_cast<uint32_t>(key % counts.vocab);
        double denom = static_cast<double>(counts.context_counts[ctx]);
        model.conditionals[ctx].push_back({tok, static_cast<double>(n) / denom});
    }
    for (auto& row : model.conditionals)
        std::sort(row.begin(), row.end(),
                  [](const BigramModel::Entry& a, const BigramModel::Entry& b) {
                      return a.token < b.token;
                  });
    return model;
}

namespace {

// TV(q_T(.|i), p(.|i)) from the sorted draw list of context i:
//   sum_{j seen} |n_ij/n_i - p(j|i)| + (1 - sum_{j seen} p(j|i))
double tv_against_conditional(std::span<const uint32_t> sorted_tokens, const Categorical& cond) {
    double n_i = static_cast<double>(sorted_tokens.size());
    double seen_true_mass = 0.0;
    double seen_abs = 0.0;
    std::size_t s = 0;
    while (s < sorted_tokens.size()) {
        std::size_t e = s;
        while (e < sorted_tokens.size() && sorted_tokens[e] == sorted_tokens[s]) ++e;
        double q = static_cast<double>(e - s) / n_i;
        double p = cond[sorted_tokens[s]];
        seen_true_mass += p;
        seen_abs += std::abs(q - p);
        s = e;
    }
    return seen_abs + (1.0 - seen_true_mass);
}

double tv_error_of_dataset(const ConditionalFamily& family,
                           std::vector<std::vector<uint32_t>>& per_ctx_tokens,
                           UnseenContextRule rule) {
    const auto& marg = family.marginal();
    double err = 0.0;
    double seen_weight = 0.0;
    for (uint32_t i = 0; i < family.n_contexts(); ++i) {
        auto& toks = per_ctx_tokens[i];
        if (toks.empty()) {
            if (rule == UnseenContextRule::assign_two) err += marg[i] * 2.0;
            continue;
        }
        std::sort(toks.begin(), toks.end());
        err += marg[i] * tv_against_conditional(toks, family.conditional(i));
        seen_weight += marg[i];
    }
    if (rule == UnseenContextRule::skip_and_renormalize)
        return seen_weight > 0.0 ? err / seen_weight : 2.0;
    return err;
}

} // namespace

MeanStderr expected_tv_mc(const ConditionalFamily& truth, uint64_t t, int trials, uint64_t seed,
                          UnseenContextRule rule, int workers, const ConditionalFamily* train) {
    auto curve = expected_tv_curve(truth, {t}, trials, seed, rule, workers, train);
    return {curve.points.front().y_mean, curve.points.front().y_stderr};
}

ScalingCurve expected_tv_curve(const ConditionalFamily& truth, const std::vector<uint64_t>& t_grid,
                               int trials, uint64_t seed, UnseenContextRule rule, int workers,
                               const ConditionalFamily* train) {
    if (trials < 2) throw std::invalid_argument("expected_tv_curve: trials must be >= 2");
    const ConditionalFamily& world = train ? *train : truth;
    if (train && (train->n_contexts() != truth.n_contexts() || train->vocab() != truth.vocab()))
        throw std::invalid_argument("expected_tv_curve: training world shape mismatch");
    // warm the conditional caches so parallel trials only read them
    for (uint32_t i = 0; i < truth.n_contexts(); ++i) {
        truth.conditional(i);
        world.conditional_alias(i);
    }
    AliasTable marginal_alias(world.marginal());
    auto res = run_trial_grid(
        static_cast<int64_t>(t_grid.size()), trials, workers, [&](int64_t point, int64_t trial) {
            RngStream rng(seed, stream_index(static_cast<uint64_t>(point),
                                             static_cast<uint64_t>(trial)));
            std::vector<std::vector<uint32_t>> per_ctx(world.n_contexts());
            for (uint64_t s = 0; s < t_grid[point]; ++s) {
                auto i = static_cast<uint32_t>(marginal_alias.sample(rng));
                auto j = static_cast<uint32_t>(world.conditional_alias(i).sample(rng));
                per_ctx[i].push_back(j);
            }
            return tv_error_of_dataset(truth, per_ctx, rule);
        });
    ScalingCurve curve;
    curve.tag = "bigram-tv";
    for (std::size_t i = 0; i < t_grid.size(); ++i)
        curve.points.push_back({static_cast<double>(t_grid[i]), res[i].mean, res[i].stderr_});
    return curve;
}

double expected_tv_bruteforce(const ConditionalFamily& family, uint64_t t,
                              UnseenContextRule rule) {
    const uint64_t cells = static_cast<uint64_t>(family.n_contexts()) * family.vocab();
    double combos = std::pow(static_cast<double>(cells), static_cast<double>(t));
    if (!(combos <= 1e7))
        throw std::invalid_argument("expected_tv_bruteforce: enumeration budget exceeded");

    // cell probabilities p(i) * p(j|i)
    std::vector<double> cell_prob(cells);
    for (uint32_t i = 0; i < family.n_contexts(); ++i)
        for (uint32_t j = 0; j < family.vocab(); ++j)
            cell_prob[static_cast<uint64_t>(i) * family.vocab() + j] =
                family.marginal()[i] * family.conditional(i)[j];

    std::vector<uint64_t> odometer(t, 0);
    std::vector<std::vector<uint32_t>> per_ctx(family.n_contexts());
    double expectation = 0.0;
    while (true) {
        double prob = 1.0;
        for (uint64_t d : odometer) prob *= cell_prob[d];
        if (prob > 0.0) {
            for (auto& v : per_ctx) v.clear();
            for (uint64_t d : odometer)
                per_ctx[static_cast<uint32_t>(d / family.vocab())].push_back(
                    static_cast<uint32_t>(d % family.vocab()));
            expectation += prob * tv_error_of_dataset(family, per_ctx, rule);
        }
        std::size_t pos = 0;
        while (pos < odometer.size() && ++odometer[pos] == cells) {
            odometer[pos] = 0;
            ++pos;
        }
        if (pos == odometer.size()) break;
    }
    return expectation;
}

std::pair<double, double> berend_conditional_terms(const ConditionalFamily& family, uint32_t ctx,
                                                   uint64_t n) {
    if (n < 1) throw std::invalid_argument("berend_conditional_terms: n must be >= 1");
    const Categorical& cond = family.conditional(ctx);
    const double thr = 1.0 / static_cast<double>(n);
    double a = 0.0, b = 0.0;
    for (std::size_t j = 0; j < cond.support_size(); ++j) {
        double p = cond[j];
        if (p <= thr) a += p;
        if (p >= thr) b += std::sqrt(p);
    }
    b /= std::sqrt(static_cast<double>(n));
    return {a, b};
}

std::vector<std::vector<uint32_t>> sample_sequences(const ConditionalFamily& family,
                                                    std::size_t count, std::size_t length,
                                                    RngStream& rng,
                                                    std::span<const TailTransform> inference) {
    if (length < 1) throw std::invalid_argument("sample_sequences: length must be >= 1");
    if (family.n_contexts() != family.vocab())
        throw std::invalid_argument("sample_sequences: requires n_contexts == vocab");

    AliasTable marginal_alias(family.marginal());
    // inference transforms are fixed per run: materialize transformed
    // conditionals once per context
    std::vector<std::unique_ptr<AliasTable>> step(family.n_contexts());
    auto step_alias = [&](uint32_t ctx) -> const AliasTable& {
        if (!step[ctx]) {
            if (inference.empty()) return family.conditional_alias(ctx);
            Categorical c = apply_transforms(family.conditional(ctx), inference);
            step[ctx] = std::make_unique<AliasTable>(c);
        }
        return *step[ctx];
    };

    std::vector<std::vector<uint32_t>> out(count);
    for (auto& seq : out) {
        seq.resize(length);
        auto cur = static_cast<uint32_t>(marginal_alias.sample(rng));
        seq[0] = cur;
        for (std::size_t pos = 1; pos < length; ++pos) {
            cur = static_cast<uint32_t>(step_alias(cur).sample(rng));
            seq[pos] = cur;
        }
    }
    return out;
}

double perplexity(const BigramModel& model, const std::vector<std::vector<uint32_t>>& sequences,
                  double smoothing_floor) {
    if (!(smoothing_floor > 0.0))
        throw std::invalid_argument("perplexity: smoothing_floor must be > 0");
    if (sequences.empty()) throw std::invalid_argument("perplexity: empty sequence set");
    double nll = 0.0;
    uint64_t tokens = 0;
    for (const auto& seq : sequences) {
        if (seq.empty()) continue;
        nll -= std::log(std::max(model.fitted_marginal(seq[0]), smoothing_floor));
        ++tokens;
        for (std::size_t pos = 1; pos < seq.size(); ++pos) {
            nll -= std::log(std::max(model.q(seq[pos - 1], seq[pos]), smoothing_floor));
            ++tokens;
        }
    }
    if (tokens == 0) throw std::invalid_argument("perplexity: no scorable tokens");
    return std::exp(nll / static_cast<double>(tokens));
}

ScalingCurve marginal_tv_curve(const Categorical& p, const std::vector<uint64_t>& t_grid,
                               int trials, uint64_t seed, int workers) {
    if (trials < 2) throw std::invalid_argument("marginal_tv_curve: trials must be >= 2");
    AliasTable table(p);
    auto res = run_trial_grid(
        static_cast<int64_t>(t_grid.size()), trials, workers, [&](int64_t point, int64_t trial) {
            RngStream rng(seed, stream_index(static_cast<uint64_t>(point),
                                             static_cast<uint64_t>(trial)));
            uint64_t t = t_grid[point];
            std::vector<uint32_t> draws(t);
            for (uint64_t s = 0; s < t; ++s) draws[s] = static_cast<uint32_t>(table.sample(rng));
            std::sort(draws.begin(), draws.end());
            // sparse TV: seen atoms contribute |n/T - p|, unseen their mass
            double seen_mass = 0.0, acc = 0.0;
            std::size_t s = 0;
            while (s < draws.size()) {
                std::size_t e = s;
                while (e < draws.size() && draws[e] == draws[s]) ++e;
                double freq = static_cast<double>(e - s) / static_cast<double>(t);
                seen_mass += p[draws[s]];
                acc += std::abs(freq - p[draws[s]]);
                s = e;
            }
            return acc + (1.0 - seen_mass);
        });
    ScalingCurve curve;
    curve.tag = "marginal-tv";
    for (std::size_t i = 0; i < t_grid.size(); ++i)
        curve.points.push_back({static_cast<double>(t_grid[i]), res[i].mean, res[i].stderr_});
    return curve;
}

} // namespace collapse
