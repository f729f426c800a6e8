#include "collapse/analytic.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "collapse/parallel.hpp"

namespace collapse {

namespace {

// lower regularized series: gamma(s,x) = x^s e^-x sum_n x^n / (s(s+1)...(s+n))
double lower_gamma_series(double s, double x) {
    double term = 1.0 / s;
    double sum = term;
    for (int n = 1; n < 500; ++n) {
        term *= x / (s + n);
        sum += term;
        if (std::abs(term) < std::abs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + s * std::log(x));
}

// log of the continued-fraction factor CF in Gamma(s,x) = e^-x x^s CF (Lentz)
double log_upper_gamma_cf(double s, double x) {
    const double tiny = std::numeric_limits<double>::min() / std::numeric_limits<double>::epsilon();
    double b = x + 1.0 - s;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 500; ++i) {
        double an = -static_cast<double>(i) * (static_cast<double>(i) - s);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) <= 1e-16) break;
    }
    return std::log(h);
}

void check_gamma_domain(double s, double x) {
    if (!(s > 0.0) || s > 1.0)
        throw std::invalid_argument("upper_incomplete_gamma: s must be in (0, 1]");
    if (!(x >= 0.0))
        throw std::invalid_argument("upper_incomplete_gamma: x must be >= 0");
}

} // namespace

double upper_incomplete_gamma(double s, double x) {
    check_gamma_domain(s, x);
    if (x == 0.0) return std::tgamma(s);
    if (x < s + 1.0) return std::tgamma(s) - lower_gamma_series(s, x);
    return std::exp(-x + s * std::log(x) + log_upper_gamma_cf(s, x));
}

double log_upper_incomplete_gamma(double s, double x) {
    check_gamma_domain(s, x);
    if (x < s + 1.0) {
        double v = upper_incomplete_gamma(s, x);
        return std::log(v);
    }
    return -x + s * std::log(x) + log_upper_gamma_cf(s, x);
}

double log_gamma_difference(double s, double x1, double x2) {
    if (!(x1 <= x2)) throw std::invalid_argument("log_gamma_difference: requires x1 <= x2");
    if (x1 == x2) return -std::numeric_limits<double>::infinity();
    double la = log_upper_incomplete_gamma(s, x1);
    double lb = x2 == std::numeric_limits<double>::infinity()
                    ? -std::numeric_limits<double>::infinity()
                    : log_upper_incomplete_gamma(s, x2);
    // log(e^la - e^lb) = la + log1p(-e^(lb-la))
    double delta = lb - la;
    if (delta < -700.0) return la;
    return la + std::log1p(-std::exp(delta));
}

double hutter_exact_error(const Categorical& p_test, const Categorical& q_train, uint64_t t,
                          int workers) {
    if (p_test.support_size() != q_train.support_size())
        throw std::invalid_argument("hutter_exact_error: support mismatch");
    if (t == 0) return 1.0;
    auto n = static_cast<int64_t>(p_test.support_size());
    const double td = static_cast<double>(t);
    const double* p = p_test.probs().data();
    const double* q = q_train.probs().data();
    return chunked_sum_ranges(n, workers, [&](int64_t lo, int64_t hi) {
        double s = 0.0;
        for (int64_t i = lo; i < hi; ++i) {
            double qi = q[i];
            if (qi >= 1.0) continue;
            if (qi <= 0.0) { s += p[i]; continue; } // never-sampled outcome keeps its mass
            s += p[i] * std::exp(td * std::log1p(-qi));
        }
        return s;
    });
}

std::pair<double, double> lemma_gamma_sides(double beta, uint64_t k, uint64_t t) {
    auto [ll, lr] = lemma_gamma_sides_log(beta, k, t);
    return {std::exp(ll), std::exp(lr)};
}

std::pair<double, double> lemma_gamma_sides_log(double beta, uint64_t k, uint64_t t) {
    if (!(beta > 1.0)) throw std::invalid_argument("lemma_gamma_sides: beta must be > 1");
    if (k < 1 || t < 1) throw std::invalid_argument("lemma_gamma_sides: k, T must be >= 1");
    const double c = 1.0 - 1.0 / beta;
    const double td = static_cast<double>(t);

    // log of sum_{i<=k} i^-beta exp(-T i^-beta) via log-sum-exp
    double max_log = -std::numeric_limits<double>::infinity();
    std::vector<double> logs(k);
    for (uint64_t i = 1; i <= k; ++i) {
        double pi = std::pow(static_cast<double>(i), -beta);
        logs[i - 1] = -beta * std::log(static_cast<double>(i)) - td * pi;
        if (logs[i - 1] > max_log) max_log = logs[i - 1];
    }
    double acc = 0.0;
    for (double l : logs) acc += std::exp(l - max_log);
    double log_lhs = c * std::log(td) + max_log + std::log(acc);

    double x1 = td * std::pow(static_cast<double>(k), -beta);
    double log_rhs = log_gamma_difference(c, x1, td);
    return {log_lhs, log_rhs};
}

std::pair<double, double> berend_marginal_terms(const Categorical& dist, uint64_t t) {
    if (t < 1) throw std::invalid_argument("berend_marginal_terms: T must be >= 1");
    const double thr = 1.0 / static_cast<double>(t);
    double a = 0.0, b = 0.0;
    for (std::size_t i = 0; i < dist.support_size(); ++i) {
        double p = dist[i];
        if (p < thr) a += p;
        else b += std::sqrt(p);
    }
    b /= std::sqrt(static_cast<double>(t));
    return {a, b};
}

double mixture_error_derivative(const Categorical& p, std::size_t k, double pi, uint64_t t) {
    if (pi < 0.0 || pi > 1.0)
        throw std::invalid_argument("mixture_error_derivative: pi must be in [0, 1]");
    if (k > p.support_size())
        throw std::invalid_argument("mixture_error_derivative: k out of range");
    if (t == 0) return 0.0;
    double s = 0.0;
    const double tm1 = static_cast<double>(t) - 1.0;
    for (std::size_t i = k; i < p.support_size(); ++i) {
        double x = pi * p[i];
        if (x >= 1.0) continue;
        s += p[i] * p[i] * std::exp(tm1 * std::log1p(-x));
    }
    return -static_cast<double>(t) * s;
}

namespace predict {

namespace {
void require_beta(double beta) {
    if (!(beta > 1.0)) throw std::invalid_argument("predict: beta must be > 1");
}
} // namespace

AsymptotePrediction simple(double beta, double k) {
    require_beta(beta);
    AsymptotePrediction out;
    out.exponent_t = (beta - 1.0) / beta;
    out.plateau_level = std::pow(k, -(beta - 1.0));
    out.crossover_t = std::pow(k, beta);
    out.description = "tail-cut double scaling";
    return out;
}

AsymptotePrediction finite_t0(double beta, double t0) {
    require_beta(beta);
    AsymptotePrediction out;
    double c = 1.0 - 1.0 / beta;
    out.exponent_t = c;
    out.plateau_level = std::pow(t0, -c);
    out.crossover_t = t0;
    out.description = "finite generator sample";
    return out;
}

AsymptotePrediction narrow(double beta, double beta_prime) {
    require_beta(beta);
    if (!(beta_prime > 1.0)) throw std::invalid_argument("predict::narrow: beta' must be > 1");
    AsymptotePrediction out;
    out.exponent_t = (beta - 1.0) / beta_prime;
    out.description = "narrowed-tail exponent";
    return out;
}

AsymptotePrediction n_fold(double beta, double n, double t, double t0) {
    require_beta(beta);
    if (n < 0.0) throw std::invalid_argument("predict::n_fold: n must be >= 0");
    AsymptotePrediction out;
    double c = 1.0 - 1.0 / beta;
    out.exponent_t = c;
    out.plateau_level = std::pow(t, -c) * (n * std::pow(t / t0, c) + 1.0);
    out.description = "n-fold generation level at (T, T0)";
    return out;
}

AsymptotePrediction grokk(double beta, double k, double pi) {
    require_beta(beta);
    if (!(pi > 0.0) || pi > 1.0) throw std::invalid_argument("predict::grokk: pi must be in (0, 1]");
    AsymptotePrediction out;
    double c = 1.0 - 1.0 / beta;
    out.exponent_t = c;
    out.plateau_level = std::pow(k, -(beta - 1.0));
    out.crossover_t = std::pow(k, beta) / pi;
    out.description = "grokking plateau, late amplitude pi^-c";
    return out;
}

AsymptotePrediction grokk_narrow(double beta, double beta_prime, double pi) {
    require_beta(beta);
    if (!(beta_prime > 1.0)) throw std::invalid_argument("predict::grokk_narrow: beta' must be > 1");
    if (!(pi > 0.0) || pi >= 1.0)
        throw std::invalid_argument("predict::grokk_narrow: pi must be in (0, 1)");
    double s = beta / beta_prime;
    if (s == 1.0) throw std::invalid_argument("predict::grokk_narrow: beta == beta' has no crossover");
    double a = s / (1.0 - s);
    AsymptotePrediction out;
    out.exponent_t = (beta - 1.0) / beta;
    out.crossover_t = std::pow(pi / (1.0 - pi), -a);
    out.description = "tail-narrowing grokking crossover";
    return out;
}

AsymptotePrediction annealed(double beta, double k, double n_start) {
    require_beta(beta);
    if (!(n_start >= k + 1.0))
        throw std::invalid_argument("predict::annealed: requires N >= k + 1");
    AsymptotePrediction out;
    double c = 1.0 - 1.0 / beta;
    double alpha = beta - 1.0;
    out.exponent_t = c;
    double ratio = n_start / k;
    // C = lim N/k: C = 1 anneals; C > 1 leaves the middle-mass plateau
    double mid = (std::pow(ratio, alpha) - 1.0) * std::pow(n_start, -alpha);
    if (mid > 0.0) out.plateau_level = mid;
    out.description = "annealed-tail mixture";
    return out;
}

AsymptotePrediction bigram(double beta, double k) {
    require_beta(beta);
    if (beta == 2.0)
        throw std::invalid_argument(
            "predict::bigram: beta = 2 excluded (rate stated for beta in (1,inf)\\{2})");
    AsymptotePrediction out;
    double c = std::min(1.0 - 1.0 / beta, 0.5);
    out.exponent_t = c;
    out.plateau_level = std::pow(k, -beta * c);
    out.crossover_t = std::pow(k, beta);
    out.description = "bigram TV double scaling";
    return out;
}

AsymptotePrediction triplet(double beta, MemoryRule rule) {
    require_beta(beta);
    AsymptotePrediction out;
    out.exponent_t = 1.0 - 1.0 / beta;
    double cq = rule == MemoryRule::counting ? (1.0 - 1.0 / beta) / 2.0 : beta - 1.0;
    out.description = "triplet law: d-exponent " + std::to_string(cq) +
                      ", k-exponent " + std::to_string(beta - 1.0);
    return out;
}

AsymptotePrediction marginal_tv(double beta) {
    require_beta(beta);
    if (beta == 2.0)
        throw std::invalid_argument(
            "predict::marginal_tv: beta = 2 excluded (rate stated for beta in (1,inf)\\{2})");
    AsymptotePrediction out;
    out.exponent_t = beta < 2.0 ? 1.0 - 1.0 / beta : 0.5;
    out.description = "marginal empirical TV rate";
    return out;
}

} // namespace predict

} // namespace collapse
