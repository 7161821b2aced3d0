#ifndef SIZENET_RNG_HPP
#define SIZENET_RNG_HPP

#include <cmath>
#include <cstdint>
#include <span>
#include <utility>

namespace sizenet {

/// splitmix64 finalizer (Vigna / Steele et al.). Fixed by the dataset
/// format: any implementation that wants to regenerate identical synthetic
/// datasets must use exactly this mixer and the stream rule below.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Per-row stream seed: chained mix of (seed, class, split, row).
/// Splits are numbered train=0, test=1.
constexpr std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t class_index,
                                    std::uint64_t split, std::uint64_t row) {
    std::uint64_t h = mix64(seed);
    h = mix64(h ^ mix64(class_index));
    h = mix64(h ^ mix64(split));
    h = mix64(h ^ mix64(row));
    return h;
}

/// splitmix64 sequence generator. Small state, portable, and every draw
/// below is defined in terms of raw 64-bit outputs so streams are
/// reproducible across platforms and languages.
class SplitMix64 {
public:
    explicit constexpr SplitMix64(std::uint64_t seed) : state_(seed) {}

    constexpr std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1): top 53 bits scaled by 2^-53.
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform in (0, 1]; used where log() must not see zero.
    double next_unit_pos() {
        return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    }

    /// Box-Muller pair of standard normals. Consumes exactly two u64 draws.
    std::pair<double, double> next_normal_pair() {
        constexpr double two_pi = 6.283185307179586476925286766559;
        double u1 = next_unit_pos();
        double u2 = next_unit();
        double r = std::sqrt(-2.0 * std::log(u1));
        return {r * std::cos(two_pi * u2), r * std::sin(two_pi * u2)};
    }

    /// Fills out with standard normals, drawing ceil(n/2) pairs and
    /// discarding the unused half for odd n. Consumption is therefore a
    /// function of n alone, which keeps row streams aligned.
    void fill_normals(std::span<double> out) {
        std::size_t i = 0;
        while (i + 1 < out.size()) {
            auto [a, b] = next_normal_pair();
            out[i++] = a;
            out[i++] = b;
        }
        if (i < out.size()) out[i] = next_normal_pair().first;
    }

    /// Unbiased integer in [0, n) by rejection on the top of the range.
    std::uint64_t next_below(std::uint64_t n) {
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n + 1) % n;
        std::uint64_t v = next_u64();
        while (v > limit) v = next_u64();
        return v % n;
    }

private:
    std::uint64_t state_;
};

} // namespace sizenet

#endif
