#ifndef COLLAPSE_SAMPLING_HPP
#define COLLAPSE_SAMPLING_HPP

#include <cstdint>
#include <vector>

#include "collapse/categorical.hpp"
#include "collapse/rng.hpp"

namespace collapse {

// Walker/Vose alias table; O(N) build, O(1) per draw.
class AliasTable {
public:
    explicit AliasTable(const Categorical& dist);
    AliasTable(const double* probs, std::size_t n);

    // outcome in [0, n)
    std::size_t sample(RngStream& rng) const {
        double u = rng.next_double() * static_cast<double>(n_);
        auto idx = static_cast<std::size_t>(u);
        if (idx >= n_) idx = n_ - 1;
        double frac = u - static_cast<double>(idx);
        return frac < threshold_[idx] ? idx : alias_[idx];
    }

    std::size_t size() const { return n_; }

private:
    void build(const double* probs, std::size_t n);
    std::size_t n_ = 0;
    std::vector<double> threshold_;
    std::vector<uint32_t> alias_;
};

struct SampleCounts {
    std::vector<uint64_t> counts; // over outcomes 1..N
    uint64_t total = 0;
};

// multinomial(T, dist) accumulated as counts; deterministic given the stream
SampleCounts sample_counts(const Categorical& dist, uint64_t t, RngStream& rng);
SampleCounts sample_counts(const AliasTable& table, uint64_t t, RngStream& rng);

// Bernoulli seen-mask with P(seen_i) = 1 - (1 - p_i)^T; the exact law of
// {n_T(i) >= 1} without materializing T draws. For T beyond what count
// sampling can afford.
std::vector<uint8_t> sample_seen_mask(const Categorical& dist, double t, RngStream& rng);

} // namespace collapse

#endif
