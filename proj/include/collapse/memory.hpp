#ifndef COLLAPSE_MEMORY_HPP
#define COLLAPSE_MEMORY_HPP

#include <cstdint>
#include <vector>

#include "collapse/categorical.hpp"
#include "collapse/fitting.hpp"
#include "collapse/sampling.hpp"

namespace collapse {

enum class EmbeddingMode { random_sphere, orthonormal };

// Unit input/output embeddings in R^d. random_sphere draws isotropic
// Gaussians row-wise (deterministic per (seed, row)) and normalizes;
// orthonormal uses basis vectors and needs d >= max(N, m).
struct EmbeddingSet {
    int n_inputs = 0;
    int n_outputs = 0;
    int dim = 0;
    EmbeddingMode mode = EmbeddingMode::random_sphere;
    std::vector<double> input_vectors;  // n_inputs x dim, row-major
    std::vector<double> output_vectors; // n_outputs x dim, row-major

    const double* e(int i) const { return input_vectors.data() + static_cast<std::size_t>(i) * dim; }
    const double* u(int y) const { return output_vectors.data() + static_cast<std::size_t>(y) * dim; }
};

EmbeddingSet make_embeddings(int n, int m, int d, EmbeddingMode mode, uint64_t seed,
                             int workers = 0);

struct GroundTruth {
    int m = 0;
    std::vector<int32_t> labels; // f*(i) in [0, m)
    static GroundTruth modulo(int n, int m);
};

enum class UpdateRule { counting, thresholded };

// Outer-product associative memory M = sum_i q_i e_i u_{f*(i)}^T with the
// argmax readout. Stored in class-aggregated factored form
// (V_y = sum_{f*(i)=y} q_i e_i, G = U U^T); materialize() rebuilds the
// dense matrix for small-d checks.
struct MemoryModel {
    UpdateRule rule = UpdateRule::counting;
    const EmbeddingSet* emb = nullptr;
    const GroundTruth* truth = nullptr;
    std::vector<double> weights;      // q_T(i)
    std::vector<double> class_vecs;   // m x dim
    std::vector<double> gram;         // m x m, U U^T

    std::vector<double> materialize() const; // dim x dim
};

// q from counts: counting n/T; thresholded normalized seen-indicator
std::vector<double> rule_weights(const SampleCounts& counts, UpdateRule rule);
// seen-set shortcut weights: training probabilities restricted to the
// realized seen set, renormalized (thresholded rule is exact under this)
std::vector<double> rule_weights_from_seen(const std::vector<uint8_t>& seen,
                                           const Categorical& train, UpdateRule rule);

MemoryModel train_memory(const SampleCounts& counts, const GroundTruth& truth,
                         const EmbeddingSet& emb, UpdateRule rule);
MemoryModel train_memory_weights(std::vector<double> weights, const GroundTruth& truth,
                                 const EmbeddingSet& emb, UpdateRule rule);

// argmax_y e_i^T M u_y, ties broken by the lowest label
int memory_predict(const MemoryModel& model, int i);

// exact population error sum_i p_i 1[predict(i) != f*(i)]
double population_error(const MemoryModel& model, const Categorical& p, const GroundTruth& truth,
                        int workers = 0);

enum class Readout {
    bilinear, // the real model: scored through the memory matrix
    seen_rule // d -> infinity limit: seen contexts exact, unseen default label 0
};

struct TripletConfig {
    double beta = 2.0;
    std::size_t support = 10000; // N
    int m = 32;
    UpdateRule rule = UpdateRule::counting;
    Readout readout = Readout::bilinear;
    // fixed values for the non-swept axes
    int d = 2048;
    std::size_t k = 0; // 0 means no cut (k = N)
    uint64_t t = 0;
    // d-axis option: capacity-matched samples T(d) = factor * d^beta
    // instead of fixed T (the thresholded rule degrades past T ~ d^beta)
    bool capacity_matched_t = false;
    double capacity_t_factor = 1.0;
    uint64_t count_sampling_limit = 2000000; // above this T use the seen-set shortcut
    int trials = 20;
    uint64_t seed = 1;
    int workers = 0;
};

enum class SweepAxis { sample_size, dimension, cutoff };

ScalingCurve triplet_sweep(const TripletConfig& cfg, SweepAxis axis,
                           const std::vector<double>& grid);

} // namespace collapse

#endif
