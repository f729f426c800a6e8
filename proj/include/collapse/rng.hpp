#ifndef COLLAPSE_RNG_HPP
#define COLLAPSE_RNG_HPP

#include <cmath>
#include <cstdint>

namespace collapse {

// Counter-based splittable generator. Every stream is keyed by
// (master_seed, stream_index) and the n-th draw depends only on that key
// and n, so parallel trials are reproducible and order-independent.
// Core mixer is splitmix64 (Steele et al.), sequence offset per stream.
class RngStream {
public:
    RngStream(uint64_t master_seed, uint64_t stream_index)
        : base_(mix64(master_seed ^ mix64(stream_index ^ 0x7f4a7c15f39cac26ULL))) {}

    uint64_t next_u64() { return at_u64(counter_++); }

    // uniform in [0, 1), 53-bit resolution
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // standard normal via Box-Muller, pairs cached
    double next_gaussian() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = next_double();
        double u2 = next_double();
        if (u1 < 1e-300) u1 = 1e-300;
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    // random access without disturbing the cursor
    uint64_t at_u64(uint64_t draw_index) const {
        return mix64(base_ + draw_index * kGamma);
    }

    void skip(uint64_t n) { counter_ += n; }

    static uint64_t mix64(uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

private:
    static constexpr uint64_t kGamma = 0x9e3779b97f4a7c15ULL;
    uint64_t base_;
    uint64_t counter_ = 0;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

// Composes a stream index out of experiment coordinates so that each
// (point, trial, phase) cell owns a private stream.
inline uint64_t stream_index(uint64_t point, uint64_t trial, uint64_t phase = 0) {
    return RngStream::mix64(point * 0x100000001b3ULL + trial) ^ (phase << 56);
}

} // namespace collapse

#endif
