#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

namespace swallowsense {

// SplitMix64 (Steele, Lea & Flood, 2014). Used instead of std::mt19937 so the
// stream is fixed by these few lines and reproduces identically on every
// platform and in other languages.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1) from the top 53 bits.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform integer in [0, n), n > 0. Modulo reduction: the bias is < 2^-40
    // for every n used in this project and determinism is what matters.
    std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    // Inclusive bounds.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        return lo + static_cast<std::int64_t>(next_below(static_cast<std::uint64_t>(hi - lo + 1)));
    }

    // Fisher-Yates.
    template <class T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(next_below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::uint64_t state_;
};

// Independent child stream for (seed, stream). One extra mixing step keeps
// adjacent stream indices uncorrelated; results are order-independent, which
// is what makes parallel tree training and grid evaluation deterministic.
inline SplitMix64 derive_stream(std::uint64_t seed, std::uint64_t stream) {
    SplitMix64 mixer(seed ^ (0x9E3779B97F4A7C15ULL * (stream + 1)));
    return SplitMix64(mixer.next_u64());
}

}  // namespace swallowsense
