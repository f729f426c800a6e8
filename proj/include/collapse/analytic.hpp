#ifndef COLLAPSE_ANALYTIC_HPP
#define COLLAPSE_ANALYTIC_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <utility>

#include "collapse/categorical.hpp"

namespace collapse {

// Upper incomplete gamma Gamma(s, x) = int_x^inf u^(s-1) e^-u du for
// s in (0, 1], x >= 0. Series for the lower gamma when x < s + 1,
// Lentz continued fraction otherwise. Absolute error <= 1e-10.
double upper_incomplete_gamma(double s, double x);

// log Gamma(s, x); finite far past the underflow point of the linear form
double log_upper_incomplete_gamma(double s, double x);

// log(Gamma(s, x1) - Gamma(s, x2)) for x1 < x2, computed without underflow
double log_gamma_difference(double s, double x1, double x2);

// E_test = sum_i p_i (1 - q_i)^T, the exact Hutter test error
double hutter_exact_error(const Categorical& p_test, const Categorical& q_train, uint64_t t,
                          int workers = 1);

// Both sides of the plateau lemma, unnormalized weights i^-beta:
//   lhs = T^c sum_{i<=k} i^-beta exp(-T i^-beta), c = 1 - 1/beta
//   rhs = Gamma(c, T k^-beta) - Gamma(c, T)
std::pair<double, double> lemma_gamma_sides(double beta, uint64_t k, uint64_t t);

// log-domain variant; the linear sides underflow once T >> k^beta
std::pair<double, double> lemma_gamma_sides_log(double beta, uint64_t k, uint64_t t);

// a_T = sum_{p_i < 1/T} p_i, b_T = T^-1/2 sum_{p_i >= 1/T} sqrt(p_i);
// boundary atoms p_i = 1/T on the b side
std::pair<double, double> berend_marginal_terms(const Categorical& dist, uint64_t t);

// d E_test / d pi = -T sum_{i > k} p_i^2 (1 - pi p_i)^(T-1); always <= 0
double mixture_error_derivative(const Categorical& p, std::size_t k, double pi, uint64_t t);

struct AsymptotePrediction {
    double exponent_t = 0.0;                 // predicted power-law exponent in sample size
    std::optional<double> plateau_level;
    std::optional<double> crossover_t;
    std::string description;
};

// Pure formula evaluators, one per scaling-law statement.
namespace predict {

AsymptotePrediction simple(double beta, double k);
AsymptotePrediction finite_t0(double beta, double t0);
AsymptotePrediction narrow(double beta, double beta_prime);
AsymptotePrediction n_fold(double beta, double n, double t, double t0);
AsymptotePrediction grokk(double beta, double k, double pi);
AsymptotePrediction grokk_narrow(double beta, double beta_prime, double pi);
AsymptotePrediction annealed(double beta, double k, double n_start);
AsymptotePrediction bigram(double beta, double k);      // rejects beta == 2
enum class MemoryRule { counting, thresholded };
AsymptotePrediction triplet(double beta, MemoryRule rule);
AsymptotePrediction marginal_tv(double beta);           // rejects beta == 2

} // namespace predict

} // namespace collapse

#endif
