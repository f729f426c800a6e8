#include "collapse/generations.hpp"

#include <cmath>
#include <stdexcept>

#include "collapse/analytic.hpp"
#include "collapse/parallel.hpp"
#include "collapse/rng.hpp"
#include "collapse/sampling.hpp"

namespace collapse {

Categorical regenerate(const Categorical& dist, uint64_t t0,
                       std::span<const TailTransform> transforms, RngStream& rng) {
    if (t0 < 1) throw std::invalid_argument("regenerate: T0 must be >= 1");
    AliasTable table(dist);
    std::vector<double> w(dist.support_size(), 0.0);
    for (uint64_t s = 0; s < t0; ++s) w[table.sample(rng)] += 1.0;
    Categorical fitted = Categorical::from_weights(std::move(w));
    if (transforms.empty()) return fitted;
    try {
        return apply_transforms(fitted, transforms);
    } catch (const std::invalid_argument&) {
        throw std::invalid_argument(
            "regenerate: transforms destroyed all mass of the fitted distribution "
            "(e.g. truncation below the smallest sampled outcome)");
    }
}

namespace {

double entropy_nats(const Categorical& d) {
    double h = 0.0;
    for (std::size_t i = 0; i < d.support_size(); ++i)
        if (d[i] > 0.0) h -= d[i] * std::log(d[i]);
    return h;
}

double support_count(const Categorical& d) {
    double n = 0.0;
    for (std::size_t i = 0; i < d.support_size(); ++i)
        if (d[i] > 0.0) n += 1.0;
    return n;
}

} // namespace

ChainResult run_chain(const Categorical& truth, const ChainConfig& config) {
    if (config.generations < 0) throw std::invalid_argument("run_chain: generations must be >= 0");
    if (!config.t0_schedule.empty() && config.t0_schedule.size() != 1 &&
        config.t0_schedule.size() != static_cast<std::size_t>(config.generations))
        throw std::invalid_argument("run_chain: T0 schedule length must be 1 or n");
    if (config.generations > 0 && config.t0_schedule.empty())
        throw std::invalid_argument("run_chain: T0 schedule required for n > 0");

    const int gens = config.generations;
    const auto& grid = config.final_t_grid;
    const int trials = std::max(config.trials, 1);

    // cell (trial, generation, T-point) -> error; trials run in parallel,
    // the chain inside a trial is inherently sequential
    std::vector<double> errs(static_cast<std::size_t>(trials) * (gens + 1) * grid.size(), 0.0);
    std::vector<double> supp(static_cast<std::size_t>(trials) * (gens + 1), 0.0);
    std::vector<double> entr(static_cast<std::size_t>(trials) * (gens + 1), 0.0);
    std::vector<Categorical> kept;

    parallel_for(trials, config.workers, [&](int64_t trial) {
        Categorical current = truth;
        for (int g = 0; g <= gens; ++g) {
            std::size_t base = (static_cast<std::size_t>(trial) * (gens + 1) + g) * grid.size();
            // same evaluation path as the hutter module, so generation 0
            // reproduces the clean curve bit for bit
            for (std::size_t ti = 0; ti < grid.size(); ++ti)
                errs[base + ti] = hutter_exact_error(truth, current, grid[ti], 1);
            supp[static_cast<std::size_t>(trial) * (gens + 1) + g] = support_count(current);
            entr[static_cast<std::size_t>(trial) * (gens + 1) + g] = entropy_nats(current);
            if (config.keep_trace_distributions && trial == 0) kept.push_back(current);
            if (g == gens) break;
            RngStream rng(config.seed, stream_index(static_cast<uint64_t>(trial),
                                                    static_cast<uint64_t>(g), 11));
            current = regenerate(current, config.t0_for(g), config.transforms, rng);
        }
    });

    ChainResult out;
    out.trace.distributions = std::move(kept);
    out.per_generation.resize(gens + 1);
    for (int g = 0; g <= gens; ++g) {
        auto& curve = out.per_generation[static_cast<std::size_t>(g)];
        curve.tag = "chain-gen" + std::to_string(g);
        for (std::size_t ti = 0; ti < grid.size(); ++ti) {
            std::vector<double> vals(static_cast<std::size_t>(trials));
            for (int tr = 0; tr < trials; ++tr)
                vals[static_cast<std::size_t>(tr)] =
                    errs[(static_cast<std::size_t>(tr) * (gens + 1) + g) * grid.size() + ti];
            auto ms = summarize(vals);
            curve.points.push_back({static_cast<double>(grid[ti]), ms.mean, ms.stderr_});
        }
        std::vector<double> s(static_cast<std::size_t>(trials)), h(static_cast<std::size_t>(trials));
        for (int tr = 0; tr < trials; ++tr) {
            s[static_cast<std::size_t>(tr)] = supp[static_cast<std::size_t>(tr) * (gens + 1) + g];
            h[static_cast<std::size_t>(tr)] = entr[static_cast<std::size_t>(tr) * (gens + 1) + g];
        }
        out.trace.mean_support_size.push_back(summarize(s).mean);
        out.trace.mean_entropy.push_back(summarize(h).mean);
    }
    return out;
}

namespace {

// one regeneration arrow for a bigram world: fit on T0 pairs, then fresh
// conditionals; contexts unseen during the fit fall back to uniform
ConditionalFamily regenerate_bigram(const ConditionalFamily& world, const Categorical& true_marginal,
                                    uint64_t t0, std::span<const TailTransform> transforms,
                                    bool propagate_fitted_marginal, RngStream& rng) {
    PairCounts counts = sample_pairs(world, t0, rng);
    BigramModel fitted = fit_bigram(counts);
    const uint32_t vocab = world.vocab();

    std::vector<Categorical> conds;
    conds.reserve(world.n_contexts());
    for (uint32_t i = 0; i < world.n_contexts(); ++i) {
        std::vector<double> w(vocab, 0.0);
        if (fitted.context_seen(i)) {
            for (const auto& entry : fitted.conditionals[i]) w[entry.token] = entry.q;
        } else {
            // no estimate for this context: emit uniformly at random
            std::fill(w.begin(), w.end(), 1.0 / vocab);
        }
        Categorical c = Categorical::from_weights(std::move(w));
        if (!transforms.empty()) c = apply_transforms(c, transforms);
        conds.push_back(std::move(c));
    }

    Categorical marginal = true_marginal;
    if (propagate_fitted_marginal) {
        std::vector<double> w(world.n_contexts(), 0.0);
        for (uint32_t i = 0; i < world.n_contexts(); ++i)
            w[i] = static_cast<double>(counts.context_counts[i]);
        marginal = Categorical::from_weights(std::move(w));
    }
    return ConditionalFamily::from_conditionals(std::move(marginal), std::move(conds));
}

// expected TV of a learner fit on T pairs from `world`, scored against the
// true family (marginal weights and target conditionals from the truth)
double tv_vs_truth(const ConditionalFamily& truth, const ConditionalFamily& world, uint64_t t,
                   int inner_trials, RngStream& rng) {
    double acc = 0.0;
    for (int it = 0; it < inner_trials; ++it) {
        PairCounts counts = sample_pairs(world, t, rng);
        BigramModel fitted = fit_bigram(counts);
        double err = 0.0;
        for (uint32_t i = 0; i < truth.n_contexts(); ++i) {
            double w = truth.marginal()[i];
            if (w <= 0.0) continue;
            if (!fitted.context_seen(i)) {
                err += w * 2.0;
                continue;
            }
            const Categorical& target = truth.conditional(i);
            double seen_mass = 0.0, abs_acc = 0.0;
            for (const auto& entry : fitted.conditionals[i]) {
                seen_mass += target[entry.token];
                abs_acc += std::abs(entry.q - target[entry.token]);
            }
            err += w * (abs_acc + (1.0 - seen_mass));
        }
        acc += err;
    }
    return acc / inner_trials;
}

} // namespace

ChainResult run_chain_bigram(const ConditionalFamily& truth, const ChainConfig& config) {
    if (config.generations < 0)
        throw std::invalid_argument("run_chain_bigram: generations must be >= 0");
    if (config.generations > 0 && config.t0_schedule.empty())
        throw std::invalid_argument("run_chain_bigram: T0 schedule required for n > 0");

    const int gens = config.generations;
    const auto& grid = config.final_t_grid;
    const int trials = std::max(config.trials, 1);

    std::vector<double> errs(static_cast<std::size_t>(trials) * (gens + 1) * grid.size(), 0.0);
    std::vector<double> supp(static_cast<std::size_t>(trials) * (gens + 1), 0.0);
    std::vector<double> entr(static_cast<std::size_t>(trials) * (gens + 1), 0.0);
    parallel_for(trials, config.workers, [&](int64_t trial) {
        // generation 0 is the truth itself
        ConditionalFamily current = truth;
        for (int g = 0; g <= gens; ++g) {
            std::size_t base = (static_cast<std::size_t>(trial) * (gens + 1) + g) * grid.size();
            for (std::size_t ti = 0; ti < grid.size(); ++ti) {
                RngStream rng(config.seed,
                              stream_index(static_cast<uint64_t>(trial) * 1000 + g, ti, 13));
                errs[base + ti] = tv_vs_truth(truth, current, grid[ti], config.tv_trials, rng);
            }
            double mean_supp = 0.0;
            for (uint32_t i = 0; i < current.n_contexts(); ++i)
                mean_supp += support_count(current.conditional(i));
            supp[static_cast<std::size_t>(trial) * (gens + 1) + g] =
                mean_supp / current.n_contexts();
            entr[static_cast<std::size_t>(trial) * (gens + 1) + g] = entropy_nats(current.marginal());
            if (g == gens) break;
            RngStream rng(config.seed, stream_index(static_cast<uint64_t>(trial),
                                                    static_cast<uint64_t>(g), 17));
            current = regenerate_bigram(current, truth.marginal(), config.t0_for(g),
                                        config.transforms, config.propagate_fitted_marginal, rng);
        }
    });

    ChainResult out;
    out.per_generation.resize(gens + 1);
    for (int g = 0; g <= gens; ++g) {
        auto& curve = out.per_generation[static_cast<std::size_t>(g)];
        curve.tag = "bigram-chain-gen" + std::to_string(g);
        for (std::size_t ti = 0; ti < grid.size(); ++ti) {
            std::vector<double> vals(static_cast<std::size_t>(trials));
            for (int tr = 0; tr < trials; ++tr)
                vals[static_cast<std::size_t>(tr)] =
                    errs[(static_cast<std::size_t>(tr) * (gens + 1) + g) * grid.size() + ti];
            auto ms = summarize(vals);
            curve.points.push_back({static_cast<double>(grid[ti]), ms.mean, ms.stderr_});
        }
        std::vector<double> s(static_cast<std::size_t>(trials)), h(static_cast<std::size_t>(trials));
        for (int tr = 0; tr < trials; ++tr) {
            s[static_cast<std::size_t>(tr)] = supp[static_cast<std::size_t>(tr) * (gens + 1) + g];
            h[static_cast<std::size_t>(tr)] = entr[static_cast<std::size_t>(tr) * (gens + 1) + g];
        }
        out.trace.mean_support_size.push_back(summarize(s).mean);
        out.trace.mean_entropy.push_back(summarize(h).mean);
    }
    return out;
}

} // namespace collapse
