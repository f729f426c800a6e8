#ifndef COLLAPSE_CATEGORICAL_HPP
#define COLLAPSE_CATEGORICAL_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace collapse {

// Normalized finite discrete distribution over outcomes 1..N.
// probs()[i-1] is the probability of outcome i. Immutable after
// construction; safe to share across threads.
class Categorical {
public:
    // Normalizes non-negative weights. Throws std::invalid_argument on
    // negative entries, empty input, or zero total mass.
    static Categorical from_weights(std::vector<double> weights);

    std::size_t support_size() const { return probs_.size(); }
    double operator[](std::size_t outcome_minus_one) const { return probs_[outcome_minus_one]; }
    std::span<const double> probs() const { return probs_; }

    double sum() const;
    // true when the normalization invariant holds within 1e-12
    bool is_normalized() const;

private:
    explicit Categorical(std::vector<double> p) : probs_(std::move(p)) {}
    std::vector<double> probs_;
};

struct PowerLawSpec {
    double beta;              // Zipf exponent, > 1
    std::size_t support_size; // finite truncation of the infinite support
};

// p_i = i^-beta / sum_j j^-beta
Categorical zipf_pmf(const PowerLawSpec& spec);

// keep outcomes 1..k, renormalize; support size preserved
Categorical truncate_tail(const Categorical& dist, std::size_t k);

// result[i] proportional to dist[i]^(1/tau) over positive entries; zeros stay zero
Categorical temperature_transform(const Categorical& dist, double tau);

// nucleus truncation: shortest descending-probability prefix with
// cumulative mass >= mass (ties by lower index), renormalized
Categorical top_p_transform(const Categorical& dist, double mass);

// convex combination; weights must sum to 1 within 1e-12
Categorical mix(const std::vector<Categorical>& components, const std::vector<double>& weights);

// tail of the power law from N_start on, renormalized
Categorical acquired_tail(const PowerLawSpec& spec, std::size_t n_start);

// total variation as the plain L1 distance sum_j |a_j - b_j| (no 1/2
// factor), range [0, 2]
double tv(const Categorical& a, const Categorical& b);

// Generation distortion selected at runtime (CLI, chain configs).
struct Truncate { std::size_t k; };
struct Narrow { double beta_prime; };       // replace exponent: materialized as zipf(beta') on the same support
struct Temperature { double tau; };
struct TopP { double mass; };
using TailTransform = std::variant<Truncate, Narrow, Temperature, TopP>;

Categorical apply_transform(const Categorical& dist, const TailTransform& t);
Categorical apply_transforms(const Categorical& dist, std::span<const TailTransform> ts);
std::string transform_name(const TailTransform& t);

// sampling-bias cutoff predictor k(T0) = T0^(1/beta)
double effective_cutoff(uint64_t t0, double beta);

} // namespace collapse

#endif
