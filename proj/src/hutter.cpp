#include "collapse/hutter.hpp"

#include <cmath>
#include <stdexcept>

#include "collapse/analytic.hpp"
#include "collapse/rng.hpp"

namespace collapse {

HutterModel hutter_train(const SampleCounts& counts) {
    HutterModel model;
    model.seen.assign(counts.counts.size(), 0);
    for (std::size_t i = 0; i < counts.counts.size(); ++i) {
        if (counts.counts[i] >= 1) {
            model.seen[i] = 1;
            ++model.seen_count;
        }
    }
    return model;
}

double hutter_error(const HutterModel& model, const Categorical& p_test) {
    if (model.seen.size() != p_test.support_size())
        throw std::invalid_argument("hutter_error: support mismatch");
    double err = 0.0;
    for (std::size_t i = 0; i < model.seen.size(); ++i)
        if (!model.seen[i]) err += p_test[i];
    return err;
}

MeanStderr hutter_mc_error(const Categorical& p_test, const Categorical& q_train, uint64_t t,
                           int trials, uint64_t seed, int workers) {
    if (trials < 2) throw std::invalid_argument("hutter_mc_error: trials must be >= 2");
    if (p_test.support_size() != q_train.support_size())
        throw std::invalid_argument("hutter_mc_error: support mismatch");
    AliasTable table(q_train);
    auto res = run_trial_grid(1, trials, workers, [&](int64_t, int64_t trial) {
        RngStream rng(seed, stream_index(0, static_cast<uint64_t>(trial)));
        // seen-membership only; avoids materializing counts for large supports
        std::vector<uint8_t> seen(q_train.support_size(), 0);
        for (uint64_t s = 0; s < t; ++s) seen[table.sample(rng)] = 1;
        double err = 0.0;
        for (std::size_t i = 0; i < seen.size(); ++i)
            if (!seen[i]) err += p_test[i];
        return err;
    });
    return res.front();
}

ScalingCurve hutter_exact_curve(const Categorical& p_test, const Categorical& q_train,
                                const std::vector<uint64_t>& t_grid, int workers) {
    ScalingCurve curve;
    for (uint64_t t : t_grid)
        curve.points.push_back({static_cast<double>(t),
                                hutter_exact_error(p_test, q_train, t, resolve_workers(workers)),
                                0.0});
    return curve;
}

namespace {

ScalingCurve curve_for_mixture(const Categorical& p, const Categorical& q,
                               const std::vector<uint64_t>& t_grid, int trials, uint64_t seed,
                               int workers) {
    if (trials == 0) return hutter_exact_curve(p, q, t_grid, workers);
    ScalingCurve curve;
    AliasTable table(q);
    auto res = run_trial_grid(static_cast<int64_t>(t_grid.size()), trials, workers,
                              [&](int64_t point, int64_t trial) {
                                  RngStream rng(seed, stream_index(static_cast<uint64_t>(point),
                                                                   static_cast<uint64_t>(trial)));
                                  std::vector<uint8_t> seen(q.support_size(), 0);
                                  for (uint64_t s = 0; s < t_grid[point]; ++s)
                                      seen[table.sample(rng)] = 1;
                                  double err = 0.0;
                                  for (std::size_t i = 0; i < seen.size(); ++i)
                                      if (!seen[i]) err += p[i];
                                  return err;
                              });
    for (std::size_t i = 0; i < t_grid.size(); ++i)
        curve.points.push_back({static_cast<double>(t_grid[i]), res[i].mean, res[i].stderr_});
    return curve;
}

} // namespace

ScalingCurve grokking_curve(const Categorical& p, std::size_t k, double pi,
                            const std::vector<uint64_t>& t_grid, int trials, uint64_t seed,
                            int workers) {
    if (pi < 0.0 || pi > 1.0) throw std::invalid_argument("grokking_curve: pi must be in [0, 1]");
    Categorical q = pi >= 1.0 ? p : mix({p, truncate_tail(p, k)}, {pi, 1.0 - pi});
    ScalingCurve curve = curve_for_mixture(p, q, t_grid, trials, seed, workers);
    curve.tag = "grokking";
    return curve;
}

ScalingCurve annealed_curve(const Categorical& p, const PowerLawSpec& spec, std::size_t k,
                            std::size_t n_start, const std::vector<uint64_t>& t_grid, int trials,
                            uint64_t seed, double clean_weight, int workers) {
    if (n_start <= k)
        throw std::invalid_argument("annealed_curve: requires N_start >= k + 1");
    Categorical q = mix({truncate_tail(p, k), acquired_tail(spec, n_start)},
                        {clean_weight, 1.0 - clean_weight});
    ScalingCurve curve = curve_for_mixture(p, q, t_grid, trials, seed, workers);
    curve.tag = "annealed";
    return curve;
}

ScalingCurve fixed_budget_curve(const Categorical& p, std::size_t k, uint64_t t_ai,
                                const std::vector<uint64_t>& t_real_grid, int trials,
                                uint64_t seed, int workers) {
    Categorical q_ai = truncate_tail(p, k);
    ScalingCurve curve;
    curve.tag = "fixed-budget";
    if (trials == 0) {
        // P(i unseen) = (1 - p_i)^T_real * (1 - q_ai_i)^T_AI
        for (uint64_t tr : t_real_grid) {
            double err = 0.0;
            for (std::size_t i = 0; i < p.support_size(); ++i) {
                double a = p[i] >= 1.0 ? 0.0 : std::exp(static_cast<double>(tr) * std::log1p(-p[i]));
                double b = q_ai[i] >= 1.0
                               ? (t_ai > 0 ? 0.0 : 1.0)
                               : std::exp(static_cast<double>(t_ai) * std::log1p(-q_ai[i]));
                err += p[i] * a * b;
            }
            curve.points.push_back({static_cast<double>(tr), err, 0.0});
        }
        return curve;
    }
    AliasTable clean_table(p);
    AliasTable ai_table(q_ai);
    auto res = run_trial_grid(static_cast<int64_t>(t_real_grid.size()), trials, workers,
                              [&](int64_t point, int64_t trial) {
                                  RngStream rng(seed, stream_index(static_cast<uint64_t>(point),
                                                                   static_cast<uint64_t>(trial)));
                                  std::vector<uint8_t> seen(p.support_size(), 0);
                                  for (uint64_t s = 0; s < t_real_grid[point]; ++s)
                                      seen[clean_table.sample(rng)] = 1;
                                  for (uint64_t s = 0; s < t_ai; ++s)
                                      seen[ai_table.sample(rng)] = 1;
                                  double err = 0.0;
                                  for (std::size_t i = 0; i < seen.size(); ++i)
                                      if (!seen[i]) err += p[i];
                                  return err;
                              });
    for (std::size_t i = 0; i < t_real_grid.size(); ++i)
        curve.points.push_back({static_cast<double>(t_real_grid[i]), res[i].mean, res[i].stderr_});
    return curve;
}

ScalingCurve narrow_curve(const Categorical& p, double beta_prime,
                          const std::vector<uint64_t>& t_grid, int workers) {
    Categorical q = zipf_pmf({beta_prime, p.support_size()});
    ScalingCurve curve = hutter_exact_curve(p, q, t_grid, workers);
    curve.tag = "narrow";
    return curve;
}

} // namespace collapse
