#pragma once

#include <cstdint>
#include <vector>

namespace ctsynth {

// Deterministic splitmix64 stream. The entire project draws randomness from
// this generator so results are reproducible across platforms and standard
// library versions; std:: distributions are implementation-defined and are
// not used anywhere.
class DetRng {
public:
    explicit DetRng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1) with 53 bits of mantissa.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Unbiased integer in [0, n); rejection sampling.
    std::uint64_t next_below(std::uint64_t n);

    // Box-Muller; draws two uniforms per call.
    double normal(double mean = 0.0, double stddev = 1.0);

    // Poisson(lambda); inversion for small rates, transformed rejection
    // (Hormann PTRS) for large ones. lambda == 0 returns 0 without consuming
    // any stream state.
    std::uint64_t poisson(double lambda);

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(next_below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    std::uint64_t state() const { return state_; }
    void set_state(std::uint64_t s) { state_ = s; }

private:
    std::uint64_t state_;
};

// Order-sensitive mix of a seed with index words; used to derive independent
// per-(volume, transform, block) streams so parallel schedules cannot change
// results.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a);
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b);
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c);

} // namespace ctsynth
