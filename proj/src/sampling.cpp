#include "collapse/sampling.hpp"

#include <cmath>
#include <stdexcept>

namespace collapse {

AliasTable::AliasTable(const Categorical& dist) {
    build(dist.probs().data(), dist.support_size());
}

AliasTable::AliasTable(const double* probs, std::size_t n) { build(probs, n); }

void AliasTable::build(const double* probs, std::size_t n) {
    if (n == 0) throw std::invalid_argument("AliasTable: empty distribution");
    n_ = n;
    threshold_.assign(n, 0.0);
    alias_.assign(n, 0);

    std::vector<double> scaled(n);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += probs[i];
    for (std::size_t i = 0; i < n; ++i) scaled[i] = probs[i] * static_cast<double>(n) / total;

    std::vector<uint32_t> small, large;
    small.reserve(n);
    large.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        (scaled[i] < 1.0 ? small : large).push_back(static_cast<uint32_t>(i));

    while (!small.empty() && !large.empty()) {
        uint32_t s = small.back(); small.pop_back();
        uint32_t l = large.back(); large.pop_back();
        threshold_[s] = scaled[s];
        alias_[s] = l;
        scaled[l] = (scaled[l] + scaled[s]) - 1.0;
        (scaled[l] < 1.0 ? small : large).push_back(l);
    }
    for (uint32_t l : large) { threshold_[l] = 1.0; alias_[l] = l; }
    for (uint32_t s : small) { threshold_[s] = 1.0; alias_[s] = s; } // fp leftovers
}

SampleCounts sample_counts(const Categorical& dist, uint64_t t, RngStream& rng) {
    AliasTable table(dist);
    return sample_counts(table, t, rng);
}

SampleCounts sample_counts(const AliasTable& table, uint64_t t, RngStream& rng) {
    SampleCounts out;
    out.counts.assign(table.size(), 0);
    out.total = t;
    for (uint64_t i = 0; i < t; ++i) ++out.counts[table.sample(rng)];
    return out;
}

std::vector<uint8_t> sample_seen_mask(const Categorical& dist, double t, RngStream& rng) {
    std::vector<uint8_t> seen(dist.support_size(), 0);
    for (std::size_t i = 0; i < dist.support_size(); ++i) {
        double p = dist[i];
        if (p <= 0.0) continue;
        // 1 - (1-p)^T, stable for tiny p
        double pr = p >= 1.0 ? 1.0 : -std::expm1(t * std::log1p(-p));
        seen[i] = rng.next_double() < pr ? 1 : 0;
    }
    return seen;
}

} // namespace collapse
