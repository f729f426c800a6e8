// collapse: reproducible experiment runner for heavy-tailed model-collapse
// simulations. Subcommands: predict | hutter | bigram | memory | chain | fit.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "collapse/analytic.hpp"
#include "collapse/bigram.hpp"
#include "collapse/categorical.hpp"
#include "collapse/csv.hpp"
#include "collapse/fitting.hpp"
#include "collapse/generations.hpp"
#include "collapse/hutter.hpp"
#include "collapse/memory.hpp"
#include "collapse/parallel.hpp"

namespace {

using namespace collapse;

struct GlobalOpts {
    uint64_t seed = 1;
    int trials = 10;
    int workers = 0; // 0 = auto (COLLAPSE_WORKERS env, then hardware)
    std::string out;
    bool timing = false; // wall_time_ms column stays 0 unless enabled, so
                         // identical configs produce byte-identical CSVs
    bool emit_asymptotes = false;
};

std::vector<uint64_t> parse_grid(const std::string& spec, int points_per_decade) {
    auto pos = spec.find("..");
    if (pos == std::string::npos) {
        double v = std::stod(spec);
        return {static_cast<uint64_t>(std::llround(v))};
    }
    double lo = std::stod(spec.substr(0, pos));
    double hi = std::stod(spec.substr(pos + 2));
    if (!(lo > 0.0) || !(hi > lo)) throw CLI::ValidationError("grid", "need 0 < lo < hi");
    int points = static_cast<int>(std::lround(std::log10(hi / lo) * points_per_decade)) + 1;
    points = std::max(points, 2);
    return geometric_grid_u64(lo, hi, points);
}

std::vector<TailTransform> parse_transforms(const std::string& spec) {
    std::vector<TailTransform> out;
    if (spec.empty()) return out;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
        auto colon = item.find(':');
        if (colon == std::string::npos)
            throw CLI::ValidationError("transforms", "expected kind:value, got '" + item + "'");
        std::string kind = item.substr(0, colon);
        double value = std::stod(item.substr(colon + 1));
        if (kind == "truncate") out.push_back(Truncate{static_cast<std::size_t>(value)});
        else if (kind == "narrow") out.push_back(Narrow{value});
        else if (kind == "temperature") out.push_back(Temperature{value});
        else if (kind == "top-p") out.push_back(TopP{value});
        else throw CLI::ValidationError("transforms", "unknown transform '" + kind + "'");
    }
    return out;
}

struct BudgetExceeded : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void emit_or_print(const CsvWriter& csv, const GlobalOpts& g) {
    if (g.out.empty()) std::cout << csv.to_string();
    else csv.write(g.out);
}

int64_t elapsed_ms(std::chrono::steady_clock::time_point start, bool timing) {
    if (!timing) return 0;
    return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() -
                                                                 start)
        .count();
}

// collects constraint violations; run aborts when any exist
struct Diagnostics {
    std::vector<std::string> items;
    void require(bool ok, const std::string& message) {
        if (!ok) items.push_back(message);
    }
    bool fail(const char* what) const {
        if (items.empty()) return false;
        std::cerr << what << ": invalid configuration\n";
        for (const auto& m : items) std::cerr << "  - " << m << "\n";
        return true;
    }
};

void add_curve_rows(CsvWriter& csv, const ScalingCurve& curve, ResultRow base, int64_t wall_ms) {
    base.wall_time_ms = wall_ms;
    for (const auto& pt : curve.points) {
        base.x = pt.x;
        base.error_mean = pt.y_mean;
        base.error_stderr = pt.y_stderr;
        csv.add(base);
    }
}

void add_asymptote_rows(CsvWriter& csv, const ScalingCurve& curve, const ResultRow& base,
                        double exponent, std::optional<double> plateau) {
    if (curve.points.empty()) return;
    // diagonal guide anchored at the first measured point, plus the
    // horizontal plateau guide when the theory predicts one
    double x0 = curve.points.front().x;
    double y0 = curve.points.front().y_mean;
    ResultRow row = base;
    row.trials = 0;
    row.error_stderr.reset();
    for (const auto& pt : curve.points) {
        row.metric = "asymptote:power";
        row.x = pt.x;
        row.error_mean = y0 * std::pow(pt.x / x0, -exponent);
        csv.add(row);
    }
    if (plateau) {
        for (const auto& pt : curve.points) {
            row.metric = "asymptote:plateau";
            row.x = pt.x;
            row.error_mean = *plateau;
            csv.add(row);
        }
    }
}

int cmd_predict(const std::string& theorem, double beta, double beta_prime, double k, double pi,
                double n, double t, double t0, double n_start, const std::string& rule_name,
                const GlobalOpts& g) {
    AsymptotePrediction pred;
    try {
        if (theorem == "simple") pred = predict::simple(beta, k);
        else if (theorem == "finite-t0") pred = predict::finite_t0(beta, t0);
        else if (theorem == "narrow") pred = predict::narrow(beta, beta_prime);
        else if (theorem == "n-fold") pred = predict::n_fold(beta, n, t, t0);
        else if (theorem == "grokk") pred = predict::grokk(beta, k, pi);
        else if (theorem == "grokk-narrow") pred = predict::grokk_narrow(beta, beta_prime, pi);
        else if (theorem == "annealed") pred = predict::annealed(beta, k, n_start);
        else if (theorem == "bigram") pred = predict::bigram(beta, k);
        else if (theorem == "triplet")
            pred = predict::triplet(beta, rule_name == "thresholded"
                                              ? predict::MemoryRule::thresholded
                                              : predict::MemoryRule::counting);
        else if (theorem == "marginal-tv") pred = predict::marginal_tv(beta);
        else {
            std::cerr << "predict: unknown theorem tag '" << theorem << "'\n";
            return 1;
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "predict: " << e.what() << "\n";
        return 1;
    }
    std::ostringstream out;
    out << "theorem,params,exponent,plateau,crossover,description\n";
    out << theorem << "," << "beta=" << format_g9(beta);
    if (theorem == "narrow" || theorem == "grokk-narrow") out << ";beta_prime=" << format_g9(beta_prime);
    if (theorem == "simple" || theorem == "grokk" || theorem == "annealed" || theorem == "bigram")
        out << ";k=" << format_g9(k);
    if (theorem == "grokk" || theorem == "grokk-narrow") out << ";pi=" << format_g9(pi);
    if (theorem == "n-fold") out << ";n=" << format_g9(n) << ";T=" << format_g9(t) << ";T0=" << format_g9(t0);
    if (theorem == "finite-t0") out << ";T0=" << format_g9(t0);
    if (theorem == "annealed") out << ";N=" << format_g9(n_start);
    if (theorem == "triplet") out << ";rule=" << rule_name;
    out << "," << format_g9(pred.exponent_t) << ","
        << (pred.plateau_level ? format_g9(*pred.plateau_level) : "") << ","
        << (pred.crossover_t ? format_g9(*pred.crossover_t) : "") << "," << pred.description
        << "\n";
    if (g.out.empty()) {
        std::cout << out.str();
    } else {
        std::ofstream f(g.out + ".tmp", std::ios::binary | std::ios::trunc);
        f << out.str();
        f.close();
        std::filesystem::rename(g.out + ".tmp", g.out);
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"model-collapse scaling-law simulation lab"};
    app.set_config("--config", "", "config file (ini/toml style); flags override file values");

    GlobalOpts g;
    app.add_option("--seed", g.seed, "master seed")->capture_default_str();
    app.add_option("--trials", g.trials, "Monte Carlo trials (0 = exact where available)")
        ->capture_default_str();
    app.add_option("--workers", g.workers, "worker count (0 = auto, env COLLAPSE_WORKERS)")
        ->capture_default_str();
    app.add_option("--out", g.out, "output CSV path (stdout when empty)");
    app.add_flag("--timing", g.timing, "record wall time in the wall_time_ms column");
    app.add_flag("--emit-asymptotes", g.emit_asymptotes,
                 "add predicted broken-line rows alongside measured rows");
    double budget_seconds = 0.0;
    app.add_option("--budget-seconds", budget_seconds,
                   "abort with nonzero status (and no CSV) when the run exceeds this budget");

    // ---- predict ----
    auto* predict_cmd = app.add_subcommand("predict", "evaluate a scaling-law prediction");
    std::string theorem = "simple", pr_rule = "counting";
    double pr_beta = 2.0, pr_beta_prime = 1.5, pr_k = 10, pr_pi = 0.01, pr_n = 1, pr_t = 1e4,
           pr_t0 = 1e4, pr_nstart = 100;
    predict_cmd->add_option("--theorem", theorem,
                            "simple|finite-t0|narrow|n-fold|grokk|grokk-narrow|annealed|bigram|"
                            "triplet|marginal-tv")
        ->required();
    predict_cmd->add_option("--beta", pr_beta);
    predict_cmd->add_option("--beta-prime", pr_beta_prime);
    predict_cmd->add_option("--k", pr_k);
    predict_cmd->add_option("--pi", pr_pi);
    predict_cmd->add_option("--n", pr_n);
    predict_cmd->add_option("--T", pr_t);
    predict_cmd->add_option("--T0", pr_t0);
    predict_cmd->add_option("--n-start", pr_nstart);
    predict_cmd->add_option("--rule", pr_rule, "counting|thresholded");

    // ---- hutter ----
    auto* hutter_cmd = app.add_subcommand("hutter", "infinite-memory learner experiments");
    std::string h_exp = "scaling", h_grid = "1e2..1e6";
    double h_beta = 1.5, h_pi = 0.0, h_beta_prime = 2.0;
    std::size_t h_support = 1000000, h_k = 0, h_nstart = 0;
    uint64_t h_tai = 0;
    int h_ppd = 3;
    hutter_cmd->add_option("--experiment", h_exp, "scaling|grokking|annealed|fixed-budget|narrow")
        ->capture_default_str();
    hutter_cmd->add_option("--beta", h_beta)->capture_default_str();
    hutter_cmd->add_option("--support", h_support, "finite support N")->capture_default_str();
    hutter_cmd->add_option("--k", h_k, "tail cutoff (0 = no cut)");
    hutter_cmd->add_option("--pi", h_pi, "clean fraction for grokking");
    hutter_cmd->add_option("--beta-prime", h_beta_prime, "training exponent for narrow");
    hutter_cmd->add_option("--n-start", h_nstart, "acquired-tail start for annealed");
    hutter_cmd->add_option("--t-ai", h_tai, "frozen synthetic sample count for fixed-budget");
    hutter_cmd->add_option("--T", h_grid, "T grid, e.g. 1e2..1e6")->capture_default_str();
    hutter_cmd->add_option("--points-per-decade", h_ppd)->capture_default_str();

    // ---- bigram ----
    auto* bigram_cmd = app.add_subcommand("bigram", "Hutter++ bigram experiments");
    std::string b_exp = "scaling", b_grid = "1e2..1e5", b_perm = "identity";
    double b_beta = 1.4, b_topp = 1.0, b_tau = 1.0;
    std::size_t b_vocab = 10000, b_nctx = 100, b_k = 0;
    uint64_t b_perm_seed = 7;
    std::size_t b_count = 100, b_length = 100;
    int b_ppd = 2;
    bigram_cmd->add_option("--experiment", b_exp, "scaling|cutoff|sequences|perplexity|marginal-tv")
        ->capture_default_str();
    bigram_cmd->add_option("--beta", b_beta)->capture_default_str();
    bigram_cmd->add_option("--vocab", b_vocab)->capture_default_str();
    bigram_cmd->add_option("--n-ctx", b_nctx)->capture_default_str();
    bigram_cmd->add_option("--k", b_k, "conditional head cut (0 = none)");
    bigram_cmd->add_option("--perm", b_perm, "identity|random")->capture_default_str();
    bigram_cmd->add_option("--perm-seed", b_perm_seed)->capture_default_str();
    bool b_index_cut = false;
    bigram_cmd->add_flag("--index-cut", b_index_cut,
                         "cut conditionals by token index j <= k instead of by rank");
    bigram_cmd->add_option("--T", b_grid)->capture_default_str();
    bigram_cmd->add_option("--points-per-decade", b_ppd)->capture_default_str();
    bigram_cmd->add_option("--count", b_count, "sequences to sample")->capture_default_str();
    bigram_cmd->add_option("--length", b_length, "sequence length")->capture_default_str();
    bigram_cmd->add_option("--top-p", b_topp, "inference nucleus mass")->capture_default_str();
    bigram_cmd->add_option("--temperature", b_tau, "inference temperature")->capture_default_str();

    // ---- memory ----
    auto* memory_cmd = app.add_subcommand("memory", "capacity-limited associative memory sweeps");
    std::string m_axis = "T", m_rule = "counting", m_grid = "1e1..1e5", m_readout = "bilinear";
    double m_beta = 2.0;
    std::size_t m_support = 10000, m_k = 0;
    int m_m = 32, m_d = 2048, m_ppd = 2;
    uint64_t m_t = 100000;
    bool m_capacity_matched = false;
    double m_capacity_factor = 1.0;
    memory_cmd->add_option("--axis", m_axis, "T|d|k")->capture_default_str();
    memory_cmd->add_option("--rule", m_rule, "counting|thresholded")->capture_default_str();
    memory_cmd->add_option("--beta", m_beta)->capture_default_str();
    memory_cmd->add_option("--support", m_support, "context count N")->capture_default_str();
    memory_cmd->add_option("--m", m_m, "class count")->capture_default_str();
    memory_cmd->add_option("--d", m_d, "embedding dimension (fixed axes)")->capture_default_str();
    memory_cmd->add_option("--k", m_k, "training truncation (0 = none)");
    memory_cmd->add_option("--T", m_t, "sample size (fixed axes)")->capture_default_str();
    memory_cmd->add_option("--grid", m_grid, "swept-axis grid")->capture_default_str();
    memory_cmd->add_option("--points-per-decade", m_ppd)->capture_default_str();
    memory_cmd->add_option("--readout", m_readout, "bilinear|seen-rule")->capture_default_str();
    memory_cmd->add_flag("--capacity-matched-t", m_capacity_matched,
                         "d axis: use T(d) = factor * d^beta instead of fixed T");
    memory_cmd->add_option("--capacity-factor", m_capacity_factor)->capture_default_str();

    // ---- chain ----
    auto* chain_cmd = app.add_subcommand("chain", "multi-generation regeneration chains");
    std::string c_learner = "hutter", c_grid = "1e3..1e5", c_transforms;
    double c_beta = 1.5, c_cond_beta = 1.5;
    std::size_t c_support = 100000, c_vocab = 50, c_nctx = 50;
    int c_gens = 5, c_ppd = 2, c_tv_trials = 8;
    uint64_t c_t0 = 10000;
    bool c_propagate = false;
    chain_cmd->add_option("--learner", c_learner, "hutter|bigram")->capture_default_str();
    chain_cmd->add_option("--generations", c_gens)->capture_default_str();
    chain_cmd->add_option("--t0", c_t0, "samples per regeneration arrow")->capture_default_str();
    chain_cmd->add_option("--beta", c_beta)->capture_default_str();
    chain_cmd->add_option("--support", c_support)->capture_default_str();
    chain_cmd->add_option("--transforms", c_transforms,
                          "comma list, e.g. truncate:100,top-p:0.9,temperature:1.2");
    chain_cmd->add_option("--T", c_grid)->capture_default_str();
    chain_cmd->add_option("--points-per-decade", c_ppd)->capture_default_str();
    chain_cmd->add_option("--cond-beta", c_cond_beta)->capture_default_str();
    chain_cmd->add_option("--vocab", c_vocab)->capture_default_str();
    chain_cmd->add_option("--n-ctx", c_nctx)->capture_default_str();
    chain_cmd->add_option("--tv-trials", c_tv_trials)->capture_default_str();
    chain_cmd->add_flag("--propagate-marginal", c_propagate,
                        "propagate the fitted marginal instead of re-imposing the truth");

    // ---- fit ----
    auto* fit_cmd = app.add_subcommand("fit", "fit exponents/plateaus/crossovers from a results CSV");
    std::string f_in, f_window;
    double f_tail_fraction = 0.25;
    fit_cmd->add_option("--in", f_in, "results CSV produced by an experiment subcommand")
        ->required();
    fit_cmd->add_option("--window", f_window, "fit window lo..hi (default: trim half-decades)");
    fit_cmd->add_option("--tail-fraction", f_tail_fraction)->capture_default_str();

    app.require_subcommand(1);
    for (auto* sub : app.get_subcommands({})) sub->fallthrough();
    CLI11_PARSE(app, argc, argv);

    auto start = std::chrono::steady_clock::now();
    auto ensure_budget = [&] {
        if (budget_seconds <= 0.0) return;
        double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (elapsed > budget_seconds)
            throw BudgetExceeded("runtime budget exceeded (" + format_g9(elapsed) + " s > " +
                                 format_g9(budget_seconds) + " s); no output written");
    };

    try {
        if (*predict_cmd)
            return cmd_predict(theorem, pr_beta, pr_beta_prime, pr_k, pr_pi, pr_n, pr_t, pr_t0,
                               pr_nstart, pr_rule, g);

        if (*hutter_cmd) {
            // exact-formula mode is the default for Hutter curves; Monte
            // Carlo only on explicit request
            int h_trials = app.count("--trials") > 0 ? g.trials : 0;
            Diagnostics diag;
            diag.require(h_beta > 1.0, "beta must be > 1 (got " + format_g9(h_beta) + ")");
            diag.require(h_support >= 1, "support must be >= 1");
            diag.require(h_k <= h_support, "k exceeds the support");
            diag.require(h_nstart == 0 || h_nstart <= h_support, "n-start exceeds the support");
            diag.require(h_pi >= 0.0 && h_pi <= 1.0, "pi must lie in [0, 1]");
            if (h_exp == "narrow")
                diag.require(h_beta_prime > 1.0, "beta-prime must be > 1");
            if (h_exp == "annealed") {
                diag.require(h_k >= 1, "annealed requires k >= 1");
                diag.require(h_nstart >= h_k + 1, "annealed requires n-start >= k + 1");
            }
            std::vector<uint64_t> grid = parse_grid(h_grid, h_ppd);
            diag.require(!grid.empty(), "empty T grid");
            if (diag.fail("hutter")) return 1;

            Categorical p = zipf_pmf({h_beta, h_support});
            ScalingCurve curve;
            ResultRow base;
            base.metric = "error";
            base.beta = h_beta;
            base.support = static_cast<double>(h_support);
            base.x_kind = "T";
            base.trials = h_trials;
            base.master_seed = g.seed;
            std::optional<double> plateau_guide;
            double exponent_guide = (h_beta - 1.0) / h_beta;
            if (h_exp == "scaling") {
                Categorical q = h_k == 0 ? p : truncate_tail(p, h_k);
                curve = hutter_exact_curve(p, q, grid, g.workers);
                curve.tag = "hutter-scaling";
                base.experiment = curve.tag;
                if (h_k > 0) {
                    base.k = static_cast<double>(h_k);
                    auto pred = predict::simple(h_beta, static_cast<double>(h_k));
                    plateau_guide = pred.plateau_level;
                }
            } else if (h_exp == "grokking") {
                diag.require(h_k >= 1, "grokking requires k >= 1");
                if (diag.fail("hutter")) return 1;
                curve = grokking_curve(p, h_k, h_pi, grid, h_trials, g.seed, g.workers);
                base.experiment = "hutter-grokking";
                base.k = static_cast<double>(h_k);
                base.pi = h_pi;
                if (h_pi > 0.0) plateau_guide = predict::grokk(h_beta, static_cast<double>(h_k), h_pi).plateau_level;
            } else if (h_exp == "annealed") {
                curve = annealed_curve(p, {h_beta, h_support}, h_k, h_nstart, grid, h_trials,
                                       g.seed, 0.5, g.workers);
                base.experiment = "hutter-annealed";
                base.k = static_cast<double>(h_k);
                base.n_start = static_cast<double>(h_nstart);
            } else if (h_exp == "fixed-budget") {
                diag.require(h_k >= 1, "fixed-budget requires k >= 1");
                if (diag.fail("hutter")) return 1;
                curve = fixed_budget_curve(p, h_k, h_tai, grid, h_trials, g.seed, g.workers);
                base.experiment = "hutter-fixed-budget";
                base.k = static_cast<double>(h_k);
                base.t_ai = static_cast<double>(h_tai);
            } else if (h_exp == "narrow") {
                curve = narrow_curve(p, h_beta_prime, grid, g.workers);
                base.experiment = "hutter-narrow";
                base.beta_prime = h_beta_prime;
                exponent_guide = (h_beta - 1.0) / h_beta_prime;
            } else {
                std::cerr << "hutter: unknown experiment '" << h_exp << "'\n";
                return 1;
            }
            CsvWriter csv;
            add_curve_rows(csv, curve, base, elapsed_ms(start, g.timing));
            if (g.emit_asymptotes) add_asymptote_rows(csv, curve, base, exponent_guide, plateau_guide);
            ensure_budget();
            emit_or_print(csv, g);
            return 0;
        }

        if (*bigram_cmd) {
            Diagnostics diag;
            diag.require(b_beta > 1.0, "beta must be > 1");
            diag.require(b_vocab >= 1, "vocab must be >= 1");
            diag.require(b_nctx >= 1, "n-ctx must be >= 1");
            diag.require(b_k <= b_vocab, "k exceeds the vocabulary");
            diag.require(b_topp > 0.0 && b_topp <= 1.0, "top-p must lie in (0, 1]");
            diag.require(b_tau > 0.0, "temperature must be > 0");
            if (b_exp == "sequences" || b_exp == "perplexity")
                diag.require(b_nctx == b_vocab, "sequence mode requires n-ctx == vocab");
            std::vector<uint64_t> grid = parse_grid(b_grid, b_ppd);
            diag.require(!grid.empty(), "empty T grid");
            diag.require(g.trials >= 2 || b_exp == "sequences", "bigram experiments need trials >= 2");
            if (diag.fail("bigram")) return 1;

            ResultRow base;
            base.beta = b_beta;
            base.vocab = static_cast<double>(b_vocab);
            base.n_ctx = static_cast<double>(b_nctx);
            base.x_kind = "T";
            base.trials = g.trials;
            base.master_seed = g.seed;
            CsvWriter csv;

            if (b_exp == "marginal-tv") {
                Categorical p = zipf_pmf({b_beta, b_nctx});
                ScalingCurve curve = marginal_tv_curve(p, grid, g.trials, g.seed, g.workers);
                base.experiment = "bigram-marginal-tv";
                base.metric = "tv";
                base.vocab.reset(); // marginal-only experiment
                add_curve_rows(csv, curve, base, elapsed_ms(start, g.timing));
                if (g.emit_asymptotes) {
                    double c = b_beta < 2.0 ? 1.0 - 1.0 / b_beta : 0.5;
                    add_asymptote_rows(csv, curve, base, c, std::nullopt);
                }
                ensure_budget();
                emit_or_print(csv, g);
                return 0;
            }

            PermutationMode mode = b_perm == "random" ? PermutationMode::seeded_random
                                                      : PermutationMode::identity;
            std::optional<uint32_t> cut;
            if (b_k > 0) cut = static_cast<uint32_t>(b_k);
            ConditionalFamily family(zipf_pmf({b_beta, b_nctx}), b_beta,
                                     static_cast<uint32_t>(b_vocab), mode, b_perm_seed, cut,
                                     b_index_cut);

            if (b_exp == "scaling" || b_exp == "cutoff") {
                // cutoff mode: sample from the head-cut world, score against
                // the uncut truth
                ScalingCurve curve;
                if (b_exp == "cutoff" && cut) {
                    ConditionalFamily truth(zipf_pmf({b_beta, b_nctx}), b_beta,
                                            static_cast<uint32_t>(b_vocab), mode, b_perm_seed);
                    curve = expected_tv_curve(truth, grid, g.trials, g.seed,
                                              UnseenContextRule::assign_two, g.workers, &family);
                } else {
                    curve = expected_tv_curve(family, grid, g.trials, g.seed,
                                              UnseenContextRule::assign_two, g.workers);
                }
                base.experiment = b_exp == "cutoff" ? "bigram-cutoff" : "bigram-scaling";
                base.metric = "tv";
                if (cut) base.k = static_cast<double>(*cut);
                add_curve_rows(csv, curve, base, elapsed_ms(start, g.timing));
                ensure_budget();
                emit_or_print(csv, g);
                return 0;
            }
            if (b_exp == "sequences") {
                RngStream rng(g.seed, 0);
                std::vector<TailTransform> inference;
                if (b_topp < 1.0) inference.push_back(TopP{b_topp});
                if (b_tau != 1.0) inference.push_back(Temperature{b_tau});
                auto seqs = sample_sequences(family, b_count, b_length, rng, inference);
                // sequences go to stdout/file as one whitespace-separated line each
                std::ostringstream out;
                for (const auto& s : seqs) {
                    for (std::size_t i = 0; i < s.size(); ++i)
                        out << (i ? " " : "") << (s[i] + 1);
                    out << "\n";
                }
                if (g.out.empty()) std::cout << out.str();
                else {
                    std::ofstream f(g.out + ".tmp", std::ios::binary | std::ios::trunc);
                    f << out.str();
                    f.close();
                    std::filesystem::rename(g.out + ".tmp", g.out);
                }
                return 0;
            }
            if (b_exp == "perplexity") {
                // train on T pairs, score held-out sequences from the truth
                std::vector<TailTransform> inference;
                if (b_topp < 1.0) inference.push_back(TopP{b_topp});
                if (b_tau != 1.0) inference.push_back(Temperature{b_tau});
                base.experiment = "bigram-perplexity";
                base.metric = "perplexity";
                for (std::size_t pi = 0; pi < grid.size(); ++pi) {
                    std::vector<double> vals(static_cast<std::size_t>(g.trials));
                    for (int trial = 0; trial < g.trials; ++trial) {
                        RngStream rng(g.seed, stream_index(pi, static_cast<uint64_t>(trial)));
                        PairCounts counts = sample_pairs(family, grid[pi], rng);
                        BigramModel model = fit_bigram(counts);
                        auto seqs = sample_sequences(family, b_count, b_length, rng, inference);
                        vals[static_cast<std::size_t>(trial)] = perplexity(model, seqs);
                    }
                    auto ms = summarize(vals);
                    ResultRow row = base;
                    row.x = static_cast<double>(grid[pi]);
                    row.error_mean = ms.mean;
                    row.error_stderr = ms.stderr_;
                    row.wall_time_ms = elapsed_ms(start, g.timing);
                    csv.add(row);
                }
                ensure_budget();
                emit_or_print(csv, g);
                return 0;
            }
            std::cerr << "bigram: unknown experiment '" << b_exp << "'\n";
            return 1;
        }

        if (*memory_cmd) {
            Diagnostics diag;
            diag.require(m_beta > 1.0, "beta must be > 1");
            diag.require(m_m >= 1, "m must be >= 1");
            diag.require(m_k <= m_support, "k exceeds the support");
            diag.require(m_axis == "T" || m_axis == "d" || m_axis == "k", "axis must be T, d or k");
            diag.require(m_rule == "counting" || m_rule == "thresholded",
                         "rule must be counting or thresholded");
            diag.require(g.trials >= 2, "memory sweeps need trials >= 2");
            std::vector<uint64_t> grid_u = parse_grid(m_grid, m_ppd);
            diag.require(!grid_u.empty(), "empty sweep grid");
            if (diag.fail("memory")) return 1;

            TripletConfig cfg;
            cfg.beta = m_beta;
            cfg.support = m_support;
            cfg.m = m_m;
            cfg.rule = m_rule == "thresholded" ? UpdateRule::thresholded : UpdateRule::counting;
            cfg.readout = m_readout == "seen-rule" ? Readout::seen_rule : Readout::bilinear;
            cfg.d = m_d;
            cfg.k = m_k;
            cfg.t = m_t;
            cfg.capacity_matched_t = m_capacity_matched;
            cfg.capacity_t_factor = m_capacity_factor;
            cfg.trials = g.trials;
            cfg.seed = g.seed;
            cfg.workers = g.workers;
            SweepAxis axis = m_axis == "T"   ? SweepAxis::sample_size
                             : m_axis == "d" ? SweepAxis::dimension
                                             : SweepAxis::cutoff;
            std::vector<double> grid(grid_u.begin(), grid_u.end());
            ScalingCurve curve = triplet_sweep(cfg, axis, grid);

            ResultRow base;
            base.experiment = "memory-" + m_axis + "-sweep";
            base.metric = "error";
            base.beta = m_beta;
            base.support = static_cast<double>(m_support);
            base.m = m_m;
            base.rule = m_rule;
            base.x_kind = m_axis;
            base.trials = g.trials;
            base.master_seed = g.seed;
            if (m_axis != "d") base.d = m_d;
            if (m_axis != "k" && m_k > 0) base.k = static_cast<double>(m_k);
            if (m_axis != "T" && !m_capacity_matched) base.t0 = static_cast<double>(m_t);
            CsvWriter csv;
            add_curve_rows(csv, curve, base, elapsed_ms(start, g.timing));
            ensure_budget();
            emit_or_print(csv, g);
            return 0;
        }

        if (*chain_cmd) {
            Diagnostics diag;
            diag.require(c_beta > 1.0, "beta must be > 1");
            diag.require(c_gens >= 0, "generations must be >= 0");
            diag.require(c_t0 >= 1, "t0 must be >= 1");
            std::vector<uint64_t> grid = parse_grid(c_grid, c_ppd);
            diag.require(!grid.empty(), "empty T grid");
            if (c_learner == "bigram") {
                diag.require(c_cond_beta > 1.0, "cond-beta must be > 1");
                diag.require(c_vocab >= 1 && c_nctx >= 1, "vocab and n-ctx must be >= 1");
            }
            if (diag.fail("chain")) return 1;

            ChainConfig cfg;
            cfg.generations = c_gens;
            cfg.t0_schedule = {c_t0};
            cfg.transforms = parse_transforms(c_transforms);
            cfg.final_t_grid = grid;
            cfg.trials = g.trials;
            cfg.seed = g.seed;
            cfg.workers = g.workers;
            cfg.tv_trials = c_tv_trials;
            cfg.propagate_fitted_marginal = c_propagate;

            ChainResult result;
            ResultRow base;
            base.metric = c_learner == "bigram" ? "tv" : "error";
            base.beta = c_beta;
            base.t0 = static_cast<double>(c_t0);
            base.x_kind = "T";
            base.trials = g.trials;
            base.master_seed = g.seed;
            if (c_learner == "bigram") {
                cfg.learner = ChainLearner::bigram;
                cfg.cond_beta = c_cond_beta;
                cfg.vocab = static_cast<uint32_t>(c_vocab);
                ConditionalFamily truth(zipf_pmf({c_beta, c_nctx}), c_cond_beta,
                                        static_cast<uint32_t>(c_vocab),
                                        PermutationMode::identity);
                result = run_chain_bigram(truth, cfg);
                base.experiment = "chain-bigram";
                base.vocab = static_cast<double>(c_vocab);
                base.n_ctx = static_cast<double>(c_nctx);
            } else {
                Categorical p = zipf_pmf({c_beta, c_support});
                result = run_chain(p, cfg);
                base.experiment = "chain-hutter";
                base.support = static_cast<double>(c_support);
            }
            CsvWriter csv;
            int64_t wall = elapsed_ms(start, g.timing);
            for (std::size_t gen = 0; gen < result.per_generation.size(); ++gen) {
                ResultRow row = base;
                row.generation = static_cast<int>(gen);
                add_curve_rows(csv, result.per_generation[gen], row, wall);
            }
            ensure_budget();
            emit_or_print(csv, g);
            return 0;
        }

        if (*fit_cmd) {
            auto rows = read_csv(f_in);
            // group measured rows into curves by their identifying columns
            std::map<std::string, ScalingCurve> curves;
            for (auto& row : rows) {
                if (row["metric"].rfind("asymptote", 0) == 0) continue;
                std::string key = row["experiment"] + "|" + row["metric"] + "|" + row["beta"] + "|" +
                                  row["beta_prime"] + "|" + row["k"] + "|" + row["pi"] + "|" +
                                  row["n_start"] + "|" + row["t0"] + "|" + row["t_ai"] + "|" +
                                  row["d"] + "|" + row["rule"] + "|" + row["generation"];
                auto& curve = curves[key];
                curve.tag = key;
                CurvePoint pt;
                pt.x = std::stod(row["x"]);
                pt.y_mean = std::stod(row["error_mean"]);
                pt.y_stderr = row["error_stderr"].empty() ? 0.0 : std::stod(row["error_stderr"]);
                curve.points.push_back(pt);
            }
            std::ostringstream out;
            out << "tag,n_points,exponent,log_amplitude,r_squared,window_lo,window_hi,plateau,"
                   "tail_slope,crossover_x,late_exponent\n";
            for (auto& [key, curve] : curves) {
                std::sort(curve.points.begin(), curve.points.end(),
                          [](const CurvePoint& a, const CurvePoint& b) { return a.x < b.x; });
                Window window{0, 0};
                bool have_window = false;
                if (!f_window.empty()) {
                    auto pos = f_window.find("..");
                    if (pos == std::string::npos)
                        throw std::runtime_error("fit: --window expects lo..hi");
                    window = {std::stod(f_window.substr(0, pos)), std::stod(f_window.substr(pos + 2))};
                    have_window = true;
                }
                out << key << "," << curve.points.size() << ",";
                try {
                    PowerFit fit = have_window ? loglog_fit(curve, window) : loglog_fit(curve);
                    out << format_g9(fit.exponent) << "," << format_g9(fit.log_amplitude) << ","
                        << format_g9(fit.r_squared) << "," << format_g9(fit.window.x_lo) << ","
                        << format_g9(fit.window.x_hi) << ",";
                } catch (const std::exception&) {
                    out << ",,,,,";
                }
                try {
                    PlateauEstimate pl = plateau_level(curve, f_tail_fraction);
                    out << format_g9(pl.level) << "," << format_g9(pl.tail_slope) << ",";
                } catch (const std::exception&) {
                    out << ",,";
                }
                auto cx = crossover_detect(curve);
                if (cx)
                    out << format_g9(cx->crossover_x) << "," << format_g9(cx->late_exponent);
                else
                    out << ",";
                out << "\n";
            }
            if (g.out.empty()) {
                std::cout << out.str();
            } else {
                std::ofstream f(g.out + ".tmp", std::ios::binary | std::ios::trunc);
                f << out.str();
                f.close();
                std::filesystem::rename(g.out + ".tmp", g.out);
            }
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
