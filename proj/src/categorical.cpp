#include "collapse/categorical.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace collapse {

Categorical Categorical::from_weights(std::vector<double> weights) {
    if (weights.empty())
        throw std::invalid_argument("Categorical: empty support");
    double total = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0))
            throw std::invalid_argument("Categorical: negative or NaN weight");
        total += w;
    }
    if (!(total > 0.0) || !std::isfinite(total))
        throw std::invalid_argument("Categorical: weights must have positive finite mass");
    for (double& w : weights) w /= total;
    return Categorical(std::move(weights));
}

double Categorical::sum() const {
    return std::accumulate(probs_.begin(), probs_.end(), 0.0);
}

bool Categorical::is_normalized() const {
    for (double p : probs_)
        if (!(p >= 0.0)) return false;
    return std::abs(sum() - 1.0) <= 1e-12;
}

Categorical zipf_pmf(const PowerLawSpec& spec) {
    if (!(spec.beta > 1.0))
        throw std::invalid_argument("zipf_pmf: beta must be > 1");
    if (spec.support_size < 1)
        throw std::invalid_argument("zipf_pmf: support_size must be >= 1");
    std::vector<double> w(spec.support_size);
    for (std::size_t i = 0; i < w.size(); ++i)
        w[i] = std::pow(static_cast<double>(i + 1), -spec.beta);
    return Categorical::from_weights(std::move(w));
}

Categorical truncate_tail(const Categorical& dist, std::size_t k) {
    if (k < 1 || k > dist.support_size())
        throw std::invalid_argument("truncate_tail: k out of range");
    std::vector<double> w(dist.support_size(), 0.0);
    for (std::size_t i = 0; i < k; ++i) w[i] = dist[i];
    return Categorical::from_weights(std::move(w));
}

Categorical temperature_transform(const Categorical& dist, double tau) {
    if (!(tau > 0.0))
        throw std::invalid_argument("temperature_transform: tau must be > 0");
    // work on log-probabilities so extreme tau stays finite
    double max_log = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < dist.support_size(); ++i)
        if (dist[i] > 0.0) max_log = std::max(max_log, std::log(dist[i]) / tau);
    if (!std::isfinite(max_log))
        throw std::invalid_argument("temperature_transform: distribution has no positive entry");
    std::vector<double> w(dist.support_size(), 0.0);
    for (std::size_t i = 0; i < dist.support_size(); ++i)
        if (dist[i] > 0.0) w[i] = std::exp(std::log(dist[i]) / tau - max_log);
    return Categorical::from_weights(std::move(w));
}

Categorical top_p_transform(const Categorical& dist, double mass) {
    if (!(mass > 0.0) || mass > 1.0)
        throw std::invalid_argument("top_p_transform: mass must be in (0, 1]");
    std::vector<std::size_t> order(dist.support_size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (dist[a] != dist[b]) return dist[a] > dist[b];
        return a < b;
    });
    std::vector<double> w(dist.support_size(), 0.0);
    double cum = 0.0;
    for (std::size_t idx : order) {
        w[idx] = dist[idx];
        cum += dist[idx];
        if (cum >= mass) break;
    }
    return Categorical::from_weights(std::move(w));
}

Categorical mix(const std::vector<Categorical>& components, const std::vector<double>& weights) {
    if (components.empty() || components.size() != weights.size())
        throw std::invalid_argument("mix: components/weights size mismatch");
    double wsum = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0)) throw std::invalid_argument("mix: negative weight");
        wsum += w;
    }
    if (std::abs(wsum - 1.0) > 1e-12)
        throw std::invalid_argument("mix: weights must sum to 1");
    std::size_t n = components.front().support_size();
    for (const auto& c : components)
        if (c.support_size() != n)
            throw std::invalid_argument("mix: mismatched supports");
    std::vector<double> w(n, 0.0);
    for (std::size_t m = 0; m < components.size(); ++m)
        for (std::size_t i = 0; i < n; ++i)
            w[i] += weights[m] * components[m][i];
    return Categorical::from_weights(std::move(w));
}

Categorical acquired_tail(const PowerLawSpec& spec, std::size_t n_start) {
    if (n_start < 1 || n_start > spec.support_size)
        throw std::invalid_argument("acquired_tail: N_start out of range");
    if (!(spec.beta > 1.0))
        throw std::invalid_argument("acquired_tail: beta must be > 1");
    std::vector<double> w(spec.support_size, 0.0);
    for (std::size_t i = n_start - 1; i < spec.support_size; ++i)
        w[i] = std::pow(static_cast<double>(i + 1), -spec.beta);
    return Categorical::from_weights(std::move(w));
}

double tv(const Categorical& a, const Categorical& b) {
    if (a.support_size() != b.support_size())
        throw std::invalid_argument("tv: support mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.support_size(); ++i)
        s += std::abs(a[i] - b[i]);
    return s;
}

Categorical apply_transform(const Categorical& dist, const TailTransform& t) {
    return std::visit(
        [&](const auto& v) -> Categorical {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, Truncate>) {
                return truncate_tail(dist, v.k);
            } else if constexpr (std::is_same_v<T, Narrow>) {
                return zipf_pmf({v.beta_prime, dist.support_size()});
            } else if constexpr (std::is_same_v<T, Temperature>) {
                return temperature_transform(dist, v.tau);
            } else {
                return top_p_transform(dist, v.mass);
            }
        },
        t);
}

Categorical apply_transforms(const Categorical& dist, std::span<const TailTransform> ts) {
    if (ts.empty()) return dist;
    Categorical out = apply_transform(dist, ts.front());
    for (std::size_t i = 1; i < ts.size(); ++i) out = apply_transform(out, ts[i]);
    return out;
}

std::string transform_name(const TailTransform& t) {
    return std::visit(
        [](const auto& v) -> std::string {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, Truncate>) return "truncate:" + std::to_string(v.k);
            else if constexpr (std::is_same_v<T, Narrow>) return "narrow:" + std::to_string(v.beta_prime);
            else if constexpr (std::is_same_v<T, Temperature>) return "temperature:" + std::to_string(v.tau);
            else return "top-p:" + std::to_string(v.mass);
        },
        t);
}

double effective_cutoff(uint64_t t0, double beta) {
    if (t0 < 1) throw std::invalid_argument("effective_cutoff: T0 must be >= 1");
    if (!(beta > 1.0)) throw std::invalid_argument("effective_cutoff: beta must be > 1");
    return std::pow(static_cast<double>(t0), 1.0 / beta);
}

} // namespace collapse
