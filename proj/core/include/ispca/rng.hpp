#pragma once

#include <cmath>
#include <cstdint>

namespace ispca {

// Counter-based random streams. Every stream is keyed by up to three
// 64-bit values (e.g. seed, replicate, block) and produces the same
// sequence regardless of which thread consumes it, so fan-out over
// replicates cannot change simulation output.

namespace detail {

// SplitMix64 finalizer (Steele, Lea, Flood 2014).
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace detail

inline std::uint64_t stream_key(std::uint64_t seed, std::uint64_t a = 0,
                                std::uint64_t b = 0) {
    std::uint64_t h = detail::mix64(seed);
    h = detail::mix64(h ^ (a + 0x632be59bd9b4e019ULL));
    h = detail::mix64(h ^ (b + 0x2545f4914f6cdd1dULL));
    return h;
}

class CounterRng {
public:
    explicit CounterRng(std::uint64_t key) : key_(key) {}

    CounterRng(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0)
        : key_(stream_key(seed, a, b)) {}

    std::uint64_t next_u64() { return detail::mix64(key_ ^ detail::mix64(counter_++)); }

    // Uniform on [0, 1).
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double next_uniform(double lo, double hi) {
        return lo + (hi - lo) * next_double();
    }

    // Standard normal via Box-Muller; pairs are cached.
    double next_gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        // u1 in (0, 1] so the log is finite.
        double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
        double u2 = next_double();
        double r = std::sqrt(-2.0 * std::log(u1));
        double theta = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

    // Uniform integer in [0, n).
    std::uint64_t next_index(std::uint64_t n) { return next_u64() % n; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace ispca
