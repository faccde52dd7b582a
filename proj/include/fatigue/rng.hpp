#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace fatigue {

/// splitmix64 finalizer. Used to derive independent stream seeds from a
/// base seed so that parallel work units never share generator state.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

/// Seed for stream `stream`, element `index`, derived from `base`.
/// Pure function of its arguments; identical on every platform.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream,
                                    std::uint64_t index) {
    return splitmix64(splitmix64(base ^ 0x53a3f2d9a0b1c8e5ull) ^
                      splitmix64(stream * 0x9e3779b97f4a7c15ull + index));
}

/// Deterministic RNG: mt19937_64 plus fixed uniform/shuffle mappings.
/// std::uniform_real_distribution and std::shuffle are avoided because the
/// standard does not pin their output; these mappings are part of the
/// reproducibility contract.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next() { return gen_(); }

    /// Uniform double in [lo, hi). 53-bit mantissa mapping.
    double uniform(double lo, double hi) {
        const double u = static_cast<double>(gen_() >> 11) * 0x1.0p-53;
        return lo + u * (hi - lo);
    }

    /// Unbiased integer in [0, n). n must be nonzero.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t threshold = (-n) % n;
        for (;;) {
            const std::uint64_t r = gen_();
            if (r >= threshold) {
                return r % n;
            }
        }
    }

    /// Fisher-Yates shuffle, descending index order.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        if (v.size() < 2) {
            return;
        }
        for (std::size_t i = v.size() - 1; i > 0; --i) {
            const std::size_t j = static_cast<std::size_t>(below(i + 1));
            std::swap(v[i], v[j]);
        }
    }

private:
    std::mt19937_64 gen_;
};

} // namespace fatigue
