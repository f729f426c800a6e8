#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <map>
#include <set>

#include "collapse/bigram.hpp"
#include "collapse/rng.hpp"

using namespace collapse;

namespace {

ConditionalFamily identity_family(double beta, uint32_t n_ctx, uint32_t vocab,
                                  std::optional<uint32_t> cut = std::nullopt) {
    return ConditionalFamily(zipf_pmf({beta, n_ctx}), beta, vocab, PermutationMode::identity, 0,
                             cut);
}

} // namespace

TEST_CASE("conditional pmf matches the marginal Zipf arithmetic") {
    ConditionalFamily fam = identity_family(2.0, 4, 3);
    for (uint32_t i = 0; i < 4; ++i) {
        const Categorical& c = fam.conditional(i);
        CHECK(c[0] == doctest::Approx(36.0 / 49.0).epsilon(1e-12));
        CHECK(c[1] == doctest::Approx(9.0 / 49.0).epsilon(1e-12));
        CHECK(c[2] == doctest::Approx(4.0 / 49.0).epsilon(1e-12));
    }
    CHECK_THROWS_AS(fam.conditional(4), std::invalid_argument);

    ConditionalFamily cut = identity_family(2.0, 2, 3, 2u);
    CHECK(cut.conditional(0)[0] == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(cut.conditional(0)[1] == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(cut.conditional(0)[2] == 0.0);
}

TEST_CASE("seeded permutations preserve the probability multiset and differ by context") {
    ConditionalFamily fam(zipf_pmf({1.5, 6}), 2.0, 16, PermutationMode::seeded_random, 123);
    ConditionalFamily id = identity_family(2.0, 6, 16);
    std::multiset<double> want;
    for (uint32_t j = 0; j < 16; ++j) want.insert(id.conditional(0)[j]);
    bool any_shuffled = false;
    for (uint32_t i = 0; i < 6; ++i) {
        std::multiset<double> got;
        for (uint32_t j = 0; j < 16; ++j) got.insert(fam.conditional(i)[j]);
        CHECK(got.size() == want.size());
        auto a = got.begin();
        auto b = want.begin();
        for (; a != got.end(); ++a, ++b) CHECK(*a == doctest::Approx(*b).epsilon(1e-12));
        if (fam.conditional(i)[0] != id.conditional(0)[0]) any_shuffled = true;
    }
    CHECK(any_shuffled);

    // permutation is a bijection
    std::vector<bool> hit(16, false);
    for (uint32_t j = 0; j < 16; ++j) {
        uint32_t r = fam.rank(2, j);
        CHECK(r >= 1);
        CHECK(r <= 16);
        CHECK(!hit[r - 1]);
        hit[r - 1] = true;
    }
}

TEST_CASE("head cut by rank vs literal index cut") {
    // under identity permutations the two coincide
    ConditionalFamily rank_cut(zipf_pmf({2.0, 3}), 2.0, 8, PermutationMode::identity, 0, 3u, false);
    ConditionalFamily index_cut(zipf_pmf({2.0, 3}), 2.0, 8, PermutationMode::identity, 0, 3u, true);
    for (uint32_t j = 0; j < 8; ++j)
        CHECK(rank_cut.conditional(0)[j] == doctest::Approx(index_cut.conditional(0)[j]));

    // under a random permutation the rank cut keeps the k most probable tokens
    ConditionalFamily rcut(zipf_pmf({2.0, 3}), 2.0, 8, PermutationMode::seeded_random, 5, 3u, false);
    const Categorical& c = rcut.conditional(1);
    int kept = 0;
    for (uint32_t j = 0; j < 8; ++j)
        if (c[j] > 0.0) ++kept;
    CHECK(kept == 3);
    for (uint32_t j = 0; j < 8; ++j)
        if (c[j] > 0.0) CHECK(rcut.rank(1, j) <= 3);
}

TEST_CASE("sample_pairs respects the marginal and conditional structure") {
    RngStream rng(21, 0);
    // marginal point mass routes every pair through context 0
    ConditionalFamily pm =
        ConditionalFamily(Categorical::from_weights({1.0, 0.0}), 2.0, 4, PermutationMode::identity);
    PairCounts c = sample_pairs(pm, 50, rng);
    CHECK(c.context_counts[0] == 50);
    CHECK(c.context_counts[1] == 0);

    // head_cut 1 makes every draw the rank-1 token
    ConditionalFamily deg = identity_family(2.0, 3, 5, 1u);
    PairCounts d = sample_pairs(deg, 40, rng);
    for (const auto& [key, n] : d.joint) CHECK(key % 5 == 0);

    // joint frequencies approach p_i * p(j|i): binomial 3-sigma check
    ConditionalFamily fam = identity_family(2.0, 2, 2);
    PairCounts f = sample_pairs(fam, 100000, rng);
    double freq = 0.0;
    for (uint32_t i = 0; i < 2; ++i) {
        auto it = f.joint.find(static_cast<uint64_t>(i) * 2);
        double nij = it == f.joint.end() ? 0.0 : static_cast<double>(it->second);
        double ni = static_cast<double>(f.context_counts[i]);
        if (ni > 0) freq = nij / ni;
        CHECK(std::abs(freq - 0.8) < 0.012);
    }
    // invariant: joint row sums equal context counts
    std::vector<uint64_t> row(2, 0);
    for (const auto& [key, n] : f.joint) row[key / 2] += n;
    CHECK(row[0] == f.context_counts[0]);
    CHECK(row[1] == f.context_counts[1]);
}

TEST_CASE("fit stores exact count ratios") {
    PairCounts c;
    c.vocab = 2;
    c.context_counts = {4, 0, 1};
    c.total = 5;
    c.joint[0 * 2 + 0] = 3;
    c.joint[0 * 2 + 1] = 1;
    c.joint[2 * 2 + 1] = 1;
    BigramModel m = fit_bigram(c);
    CHECK(m.q(0, 0) == doctest::Approx(0.75));
    CHECK(m.q(0, 1) == doctest::Approx(0.25));
    CHECK_FALSE(m.context_seen(1));
    CHECK(m.q(2, 1) == doctest::Approx(1.0));
    // each stored conditional sums to one
    double sum = 0.0;
    for (const auto& e : m.conditionals[0]) sum += e.q;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("tv is the L1 metric with range [0, 2]") {
    Categorical a = Categorical::from_weights({0.75, 0.25});
    Categorical b = Categorical::from_weights({0.8, 0.2});
    CHECK(tv(a, a) == doctest::Approx(0.0));
    CHECK(tv(a, b) == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(tv(Categorical::from_weights({1.0, 0.0}), Categorical::from_weights({0.0, 1.0})) ==
          doctest::Approx(2.0));
    CHECK_THROWS_AS(tv(a, zipf_pmf({2.0, 3})), std::invalid_argument);

    // symmetry and triangle inequality on random triples
    RngStream rng(31, 0);
    for (int rep = 0; rep < 30; ++rep) {
        auto rand_dist = [&] {
            std::vector<double> w(5);
            for (auto& v : w) v = rng.next_double() + 1e-6;
            return Categorical::from_weights(std::move(w));
        };
        Categorical x = rand_dist(), y = rand_dist(), z = rand_dist();
        CHECK(tv(x, y) == doctest::Approx(tv(y, x)).epsilon(1e-12));
        CHECK(tv(x, z) <= tv(x, y) + tv(y, z) + 1e-12);
        CHECK(tv(x, y) >= 0.0);
        CHECK(tv(x, y) <= 2.0);
    }
}

TEST_CASE("expected TV brute force: hand-computed single-context instance") {
    // single context, p(.|1) = [0.8, 0.2], T = 1:
    // dataset j=1 w.p. 0.8 -> TV = |1-0.8| + 0.2 = 0.4
    // dataset j=2 w.p. 0.2 -> TV = 0.8 + |1-0.2| = 1.6
    ConditionalFamily fam(Categorical::from_weights({1.0}), 2.0, 2, PermutationMode::identity);
    // beta=2 on 2 tokens gives exactly [0.8, 0.2]
    double exact = expected_tv_bruteforce(fam, 1);
    CHECK(exact == doctest::Approx(0.8 * 0.4 + 0.2 * 1.6).epsilon(1e-12));

    // T = 0 edge handled by MC convention instead: every context unseen -> 2
    // uniform conditional over V=2, T=1: TV = 1 either way
    ConditionalFamily uni = ConditionalFamily::from_conditionals(
        Categorical::from_weights({1.0}), {Categorical::from_weights({0.5, 0.5})});
    CHECK(expected_tv_bruteforce(uni, 1) == doctest::Approx(1.0).epsilon(1e-12));

    CHECK_THROWS_AS(expected_tv_bruteforce(identity_family(2.0, 10, 10), 20),
                    std::invalid_argument);
}

TEST_CASE("deterministic conditionals reduce to the classical identity") {
    // point-mass conditionals: E_test = 2 sum_i p_i (1-p_i)^T exactly
    Categorical marg = zipf_pmf({2.0, 3});
    std::vector<Categorical> conds;
    for (int i = 0; i < 3; ++i) {
        std::vector<double> w(3, 0.0);
        w[static_cast<std::size_t>((i * 2) % 3)] = 1.0;
        conds.push_back(Categorical::from_weights(std::move(w)));
    }
    ConditionalFamily fam = ConditionalFamily::from_conditionals(marg, std::move(conds));
    for (uint64_t t : {1ul, 2ul, 3ul, 4ul}) {
        double want = 0.0;
        for (int i = 0; i < 3; ++i) want += 2.0 * marg[i] * std::pow(1.0 - marg[i], t);
        CHECK(expected_tv_bruteforce(fam, t) == doctest::Approx(want).epsilon(1e-12));
    }
}

TEST_CASE("expected_tv_mc agrees with brute force on small instances") {
    ConditionalFamily fam = identity_family(1.5, 2, 3);
    for (uint64_t t : {1ul, 3ul}) {
        double exact = expected_tv_bruteforce(fam, t);
        auto ms = expected_tv_mc(fam, t, 3000, 17);
        CHECK(std::abs(ms.mean - exact) <= 3.0 * ms.stderr_);
    }
}

TEST_CASE("permutation invariance of the aggregate TV error") {
    ConditionalFamily id = identity_family(1.5, 3, 8);
    ConditionalFamily perm(zipf_pmf({1.5, 3}), 1.5, 8, PermutationMode::seeded_random, 77);
    auto a = expected_tv_mc(id, 50, 600, 5);
    auto b = expected_tv_mc(perm, 50, 600, 6);
    double sd = std::sqrt(a.stderr_ * a.stderr_ + b.stderr_ * b.stderr_);
    CHECK(std::abs(a.mean - b.mean) <= 3.0 * sd);
}

TEST_CASE("unseen-context conventions") {
    ConditionalFamily fam = identity_family(2.0, 3, 3);
    // T=1: exactly one context seen per dataset
    auto two = expected_tv_mc(fam, 1, 400, 9, UnseenContextRule::assign_two);
    auto skip = expected_tv_mc(fam, 1, 400, 9, UnseenContextRule::skip_and_renormalize);
    CHECK(two.mean > skip.mean); // the assign-two convention upper-bounds

    // T=0 edge: every context unseen, the convention assigns 2 everywhere
    auto empty = expected_tv_mc(fam, 0, 4, 9, UnseenContextRule::assign_two);
    CHECK(empty.mean == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("training on a head-cut world, scored against the truth, plateaus at 2x the cut mass") {
    ConditionalFamily truth = identity_family(1.5, 4, 50);
    ConditionalFamily cut(zipf_pmf({1.5, 4}), 1.5, 50, PermutationMode::identity, 0, 5u);
    double cut_mass = 0.0;
    for (uint32_t j = 5; j < 50; ++j) cut_mass += truth.conditional(0)[j];
    auto ms = expected_tv_mc(truth, 200000, 20, 12, UnseenContextRule::assign_two, 0, &cut);
    CHECK(ms.mean == doctest::Approx(2.0 * cut_mass).epsilon(0.05));
}

TEST_CASE("berend conditional terms count the boundary on both sides") {
    ConditionalFamily fam = identity_family(2.0, 2, 2); // p(.|i) = [0.8, 0.2]
    auto [a, b] = berend_conditional_terms(fam, 0, 4);
    CHECK(a == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(b == doctest::Approx(0.5 * std::sqrt(0.8)).epsilon(1e-12));

    // n = 1: threshold 1, so every atom lands in a; only unit atoms reach b
    auto [a1, b1] = berend_conditional_terms(fam, 0, 1);
    CHECK(a1 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(b1 == doctest::Approx(0.0));

    // a point-mass conditional sits on the boundary and is counted in both
    ConditionalFamily pm = ConditionalFamily::from_conditionals(
        Categorical::from_weights({1.0}), {Categorical::from_weights({1.0, 0.0})});
    auto [ap, bp] = berend_conditional_terms(pm, 0, 1);
    CHECK(ap == doctest::Approx(1.0));
    CHECK(bp == doctest::Approx(1.0));

    // invariant under the permutation mode for fixed context
    ConditionalFamily perm(zipf_pmf({2.0, 4}), 2.0, 16, PermutationMode::seeded_random, 3);
    ConditionalFamily id = identity_family(2.0, 4, 16);
    for (uint64_t n : {1ul, 5ul, 50ul}) {
        auto [pa, pb] = berend_conditional_terms(perm, 2, n);
        auto [ia, ib] = berend_conditional_terms(id, 2, n);
        CHECK(pa == doctest::Approx(ia).epsilon(1e-12));
        CHECK(pb == doctest::Approx(ib).epsilon(1e-12));
    }
}

TEST_CASE("sequences: shape, chain-rule frequencies, degenerate top-p") {
    ConditionalFamily fam = identity_family(2.0, 6, 6);
    RngStream rng(41, 0);

    auto seqs = sample_sequences(fam, 20, 1, rng);
    CHECK(seqs.size() == 20);
    for (const auto& s : seqs) CHECK(s.size() == 1);

    // top-p small enough keeps only the top token: deterministic continuation
    std::vector<TailTransform> det{TopP{0.1}};
    auto chains = sample_sequences(fam, 5, 4, rng, det);
    for (const auto& s : chains)
        for (std::size_t i = 1; i < s.size(); ++i) CHECK(s[i] == 0);

    // adjacent-pair frequencies match marginal x conditional within noise
    auto big = sample_sequences(fam, 2000, 30, rng);
    std::map<std::pair<uint32_t, uint32_t>, double> pair_freq;
    double total = 0.0;
    for (const auto& s : big)
        for (std::size_t i = 1; i < s.size(); ++i) {
            pair_freq[{s[i - 1], s[i]}] += 1.0;
            total += 1.0;
        }
    // stationary distribution of this chain is the conditional row (all rows
    // equal under identity permutations), so pair (i, j) ~ row_i * row_j
    const Categorical& row = fam.conditional(0);
    for (uint32_t i = 0; i < 3; ++i)
        for (uint32_t j = 0; j < 3; ++j) {
            double want = row[i] * row[j];
            double got = pair_freq[{i, j}] / total;
            CHECK(std::abs(got - want) < 4.0 * std::sqrt(want / total) + 1e-3);
        }

    // mismatched context/vocab sizes are rejected in sequence mode
    ConditionalFamily bad = identity_family(2.0, 3, 5);
    CHECK_THROWS_AS(sample_sequences(bad, 2, 3, rng), std::invalid_argument);
}

TEST_CASE("perplexity: exact model on uniform world approaches the entropy") {
    // two tokens, uniform conditionals and marginal: perplexity -> 2
    std::vector<Categorical> conds(2, Categorical::from_weights({0.5, 0.5}));
    ConditionalFamily world =
        ConditionalFamily::from_conditionals(Categorical::from_weights({0.5, 0.5}), conds);
    RngStream rng(51, 0);
    PairCounts counts = sample_pairs(world, 200000, rng);
    BigramModel model = fit_bigram(counts);
    auto seqs = sample_sequences(world, 200, 50, rng);
    CHECK(perplexity(model, seqs) == doctest::Approx(2.0).epsilon(0.02));

    // point-mass world scored by a matching model: perplexity 1
    std::vector<Categorical> pm_conds;
    pm_conds.push_back(Categorical::from_weights({1.0, 0.0}));
    pm_conds.push_back(Categorical::from_weights({1.0, 0.0}));
    ConditionalFamily pm_world =
        ConditionalFamily::from_conditionals(Categorical::from_weights({1.0, 0.0}), pm_conds);
    PairCounts pmc = sample_pairs(pm_world, 100, rng);
    BigramModel pmm = fit_bigram(pmc);
    auto pms = sample_sequences(pm_world, 10, 20, rng);
    CHECK(perplexity(pmm, pms) == doctest::Approx(1.0).epsilon(1e-9));

    // unseen transitions hit the smoothing floor, keeping the score finite
    BigramModel empty;
    empty.vocab = 2;
    empty.context_counts = {0, 0};
    empty.conditionals = {{}, {}};
    empty.total = 0;
    double pp = perplexity(empty, pms, 1e-8);
    CHECK(std::isfinite(pp));
    CHECK(pp == doctest::Approx(1e8).epsilon(1e-6));

    CHECK_THROWS_AS(perplexity(pmm, {}, 1e-8), std::invalid_argument);
    CHECK_THROWS_AS(perplexity(pmm, pms, 0.0), std::invalid_argument);
}

TEST_CASE("marginal TV curve decreases and stays in range") {
    Categorical p = zipf_pmf({3.0, 1000});
    auto curve = marginal_tv_curve(p, {100, 1000, 10000}, 30, 7);
    CHECK(curve.points.size() == 3);
    double prev = 2.0;
    for (const auto& pt : curve.points) {
        CHECK(pt.y_mean > 0.0);
        CHECK(pt.y_mean < prev);
        prev = pt.y_mean;
    }
}
