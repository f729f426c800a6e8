#include "collapse/memory.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <stdexcept>

#include "collapse/parallel.hpp"
#include "collapse/rng.hpp"

namespace collapse {

EmbeddingSet make_embeddings(int n, int m, int d, EmbeddingMode mode, uint64_t seed, int workers) {
    if (d < 1) throw std::invalid_argument("make_embeddings: d must be >= 1");
    if (mode == EmbeddingMode::orthonormal && d < std::max(n, m))
        throw std::invalid_argument("make_embeddings: orthonormal mode requires d >= max(N, m)");
    EmbeddingSet set;
    set.n_inputs = n;
    set.n_outputs = m;
    set.dim = d;
    set.mode = mode;
    set.input_vectors.assign(static_cast<std::size_t>(n) * d, 0.0);
    set.output_vectors.assign(static_cast<std::size_t>(m) * d, 0.0);

    if (mode == EmbeddingMode::orthonormal) {
        for (int i = 0; i < n; ++i) set.input_vectors[static_cast<std::size_t>(i) * d + i] = 1.0;
        for (int y = 0; y < m; ++y) set.output_vectors[static_cast<std::size_t>(y) * d + y] = 1.0;
        return set;
    }

    auto fill_row = [d](double* row, RngStream rng) {
        double norm2 = 0.0;
        for (int c = 0; c < d; ++c) {
            row[c] = rng.next_gaussian();
            norm2 += row[c] * row[c];
        }
        if (norm2 <= 0.0) { row[0] = 1.0; norm2 = 1.0; }
        double inv = 1.0 / std::sqrt(norm2);
        for (int c = 0; c < d; ++c) row[c] *= inv;
    };
    parallel_for(n, workers, [&](int64_t i) {
        fill_row(set.input_vectors.data() + i * d, RngStream(seed, stream_index(1, i)));
    });
    parallel_for(m, workers, [&](int64_t y) {
        fill_row(set.output_vectors.data() + y * d, RngStream(seed, stream_index(2, y)));
    });
    return set;
}

GroundTruth GroundTruth::modulo(int n, int m) {
    GroundTruth truth;
    truth.m = m;
    truth.labels.resize(n);
    for (int i = 0; i < n; ++i) truth.labels[i] = i % m;
    return truth;
}

std::vector<double> rule_weights(const SampleCounts& counts, UpdateRule rule) {
    std::vector<double> q(counts.counts.size(), 0.0);
    if (rule == UpdateRule::counting) {
        if (counts.total == 0) return q;
        for (std::size_t i = 0; i < q.size(); ++i)
            q[i] = static_cast<double>(counts.counts[i]) / static_cast<double>(counts.total);
        return q;
    }
    uint64_t seen = 0;
    for (uint64_t c : counts.counts)
        if (c >= 1) ++seen;
    if (seen == 0) return q;
    for (std::size_t i = 0; i < q.size(); ++i)
        if (counts.counts[i] >= 1) q[i] = 1.0 / static_cast<double>(seen);
    return q;
}

std::vector<double> rule_weights_from_seen(const std::vector<uint8_t>& seen,
                                           const Categorical& train, UpdateRule rule) {
    std::vector<double> q(seen.size(), 0.0);
    if (rule == UpdateRule::thresholded) {
        uint64_t count = 0;
        for (uint8_t s : seen)
            if (s) ++count;
        if (count == 0) return q;
        for (std::size_t i = 0; i < q.size(); ++i)
            if (seen[i]) q[i] = 1.0 / static_cast<double>(count);
        return q;
    }
    double mass = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i)
        if (seen[i]) mass += train[i];
    if (mass <= 0.0) return q;
    for (std::size_t i = 0; i < q.size(); ++i)
        if (seen[i]) q[i] = train[i] / mass;
    return q;
}

MemoryModel train_memory_weights(std::vector<double> weights, const GroundTruth& truth,
                                 const EmbeddingSet& emb, UpdateRule rule) {
    if (static_cast<int>(weights.size()) != emb.n_inputs)
        throw std::invalid_argument("train_memory: weights/embedding size mismatch");
    if (static_cast<int>(truth.labels.size()) != emb.n_inputs)
        throw std::invalid_argument("train_memory: truth/embedding size mismatch");
    MemoryModel model;
    model.rule = rule;
    model.emb = &emb;
    model.truth = &truth;
    model.weights = std::move(weights);

    const int d = emb.dim;
    const int m = emb.n_outputs;
    model.class_vecs.assign(static_cast<std::size_t>(m) * d, 0.0);
    for (int i = 0; i < emb.n_inputs; ++i) {
        double q = model.weights[i];
        if (q == 0.0) continue;
        double* v = model.class_vecs.data() + static_cast<std::size_t>(truth.labels[i]) * d;
        const double* e = emb.e(i);
        for (int c = 0; c < d; ++c) v[c] += q * e[c];
    }
    model.gram.assign(static_cast<std::size_t>(m) * m, 0.0);
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) {
            double s = 0.0;
            const double* ua = emb.u(a);
            const double* ub = emb.u(b);
            for (int c = 0; c < d; ++c) s += ua[c] * ub[c];
            model.gram[static_cast<std::size_t>(a) * m + b] = s;
        }
    return model;
}

MemoryModel train_memory(const SampleCounts& counts, const GroundTruth& truth,
                         const EmbeddingSet& emb, UpdateRule rule) {
    return train_memory_weights(rule_weights(counts, rule), truth, emb, rule);
}

std::vector<double> MemoryModel::materialize() const {
    const int d = emb->dim;
    const int m = emb->n_outputs;
    std::vector<double> matrix(static_cast<std::size_t>(d) * d, 0.0);
    for (int y = 0; y < m; ++y) {
        const double* v = class_vecs.data() + static_cast<std::size_t>(y) * d;
        const double* u = emb->u(y);
        for (int r = 0; r < d; ++r) {
            if (v[r] == 0.0) continue;
            double* row = matrix.data() + static_cast<std::size_t>(r) * d;
            for (int c = 0; c < d; ++c) row[c] += v[r] * u[c];
        }
    }
    return matrix;
}

namespace {

// scores for one context through the factored form:
// H(i, y') = sum_y (e_i . V_y) * (u_y . u_y')
int argmax_label(const MemoryModel& model, const double* e) {
    const int d = model.emb->dim;
    const int m = model.emb->n_outputs;
    double a[512];
    if (m > 512) throw std::invalid_argument("memory_predict: more than 512 classes unsupported");
    for (int y = 0; y < m; ++y) {
        const double* v = model.class_vecs.data() + static_cast<std::size_t>(y) * d;
        double s = 0.0;
        for (int c = 0; c < d; ++c) s += e[c] * v[c];
        a[y] = s;
    }
    int best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (int yp = 0; yp < m; ++yp) {
        double h = 0.0;
        const double* g = model.gram.data() + static_cast<std::size_t>(yp); // column yp, stride m
        for (int y = 0; y < m; ++y) h += a[y] * g[static_cast<std::size_t>(y) * m];
        if (h > best_score) { // strict: ties keep the lowest label
            best_score = h;
            best = yp;
        }
    }
    return best;
}

} // namespace

int memory_predict(const MemoryModel& model, int i) {
    return argmax_label(model, model.emb->e(i));
}

double population_error(const MemoryModel& model, const Categorical& p, const GroundTruth& truth,
                        int workers) {
    if (p.support_size() != static_cast<std::size_t>(model.emb->n_inputs))
        throw std::invalid_argument("population_error: support mismatch");
    auto n = static_cast<int64_t>(p.support_size());
    std::vector<uint8_t> wrong(static_cast<std::size_t>(n), 0);
    parallel_for(n, workers, [&](int64_t i) {
        wrong[static_cast<std::size_t>(i)] =
            argmax_label(model, model.emb->e(static_cast<int>(i))) != truth.labels[i] ? 1 : 0;
    });
    double err = 0.0;
    for (int64_t i = 0; i < n; ++i)
        if (wrong[static_cast<std::size_t>(i)]) err += p[static_cast<std::size_t>(i)];
    return err;
}

namespace {

double seen_rule_error(const std::vector<uint8_t>& seen, const Categorical& p,
                       const GroundTruth& truth) {
    double err = 0.0;
    for (std::size_t i = 0; i < seen.size(); ++i) {
        int pred = seen[i] ? truth.labels[i] : 0; // zero matrix ties to label 0
        if (pred != truth.labels[i]) err += p[i];
    }
    return err;
}

} // namespace

ScalingCurve triplet_sweep(const TripletConfig& cfg, SweepAxis axis,
                           const std::vector<double>& grid) {
    const auto n = static_cast<int>(cfg.support);
    Categorical p = zipf_pmf({cfg.beta, cfg.support});
    GroundTruth truth = GroundTruth::modulo(n, cfg.m);
    int workers = resolve_workers(cfg.workers);

    ScalingCurve curve;
    curve.tag = "triplet";
    for (std::size_t point = 0; point < grid.size(); ++point) {
        uint64_t t = cfg.t;
        int d = cfg.d;
        std::size_t k = cfg.k == 0 ? cfg.support : cfg.k;
        switch (axis) {
            case SweepAxis::sample_size: t = static_cast<uint64_t>(grid[point]); break;
            case SweepAxis::dimension: d = static_cast<int>(grid[point]); break;
            case SweepAxis::cutoff: k = static_cast<std::size_t>(grid[point]); break;
        }
        if (axis == SweepAxis::dimension && cfg.capacity_matched_t)
            t = static_cast<uint64_t>(cfg.capacity_t_factor *
                                      std::pow(static_cast<double>(d), cfg.beta));
        Categorical train = k >= cfg.support ? p : truncate_tail(p, k);
        AliasTable train_alias(train);

        std::vector<double> errs(static_cast<std::size_t>(cfg.trials));
        for (int trial = 0; trial < cfg.trials; ++trial) {
            RngStream count_rng(cfg.seed, stream_index(point, static_cast<uint64_t>(trial), 3));
            std::vector<uint8_t> seen;
            SampleCounts counts;
            bool shortcut = t > cfg.count_sampling_limit;
            if (shortcut) {
                seen = sample_seen_mask(train, static_cast<double>(t), count_rng);
            } else {
                counts = sample_counts(train_alias, t, count_rng);
            }

            if (cfg.readout == Readout::seen_rule) {
                if (!shortcut) {
                    seen.assign(counts.counts.size(), 0);
                    for (std::size_t i = 0; i < counts.counts.size(); ++i)
                        seen[i] = counts.counts[i] >= 1;
                }
                errs[static_cast<std::size_t>(trial)] = seen_rule_error(seen, p, truth);
                continue;
            }

            // embeddings keyed by (trial, d): shared across the grid when
            // the dimension is fixed, fresh per point when d is swept
            uint64_t emb_seed = RngStream::mix64(cfg.seed ^ stream_index(
                                    static_cast<uint64_t>(d), static_cast<uint64_t>(trial), 4));
            EmbeddingSet emb = make_embeddings(n, cfg.m, d, EmbeddingMode::random_sphere, emb_seed,
                                               workers);
            std::vector<double> q = shortcut ? rule_weights_from_seen(seen, train, cfg.rule)
                                             : rule_weights(counts, cfg.rule);
            MemoryModel model = train_memory_weights(std::move(q), truth, emb, cfg.rule);
            errs[static_cast<std::size_t>(trial)] = population_error(model, p, truth, workers);
        }
        auto ms = summarize(errs);
        curve.points.push_back({grid[point], ms.mean, ms.stderr_});
    }
    return curve;
}

} // namespace collapse
