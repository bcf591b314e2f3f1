#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <random>
#include <utility>
#include <vector>

namespace icqd {

// splitmix64 finalizer; good avalanche, used to spread structured
// (seed, generation, slot) triples into independent stream seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0) {
    return splitmix64(splitmix64(splitmix64(base) ^ a) ^ b);
}

// mt19937_64 with hand-rolled distributions. The engine's output sequence is
// fixed by the C++ standard but the std:: distributions are not, and golden
// prompt files plus serial/parallel equivalence both need sampling that is
// byte-stable across compilers.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // uniform double in [0, 1), 53 random bits
    double uniform01() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + uniform01() * (hi - lo); }

    // unbiased integer in [0, n) via Lemire's multiply-with-rejection
    std::size_t index(std::size_t n) {
        const std::uint64_t range = static_cast<std::uint64_t>(n);
        std::uint64_t x = next_u64();
        __uint128_t m = static_cast<__uint128_t>(x) * range;
        auto low = static_cast<std::uint64_t>(m);
        if (low < range) {
            const std::uint64_t threshold = (0 - range) % range;
            while (low < threshold) {
                x = next_u64();
                m = static_cast<__uint128_t>(x) * range;
                low = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::size_t>(m >> 64);
    }

    // standard normal via Box-Muller; consumes exactly two uniforms per call
    double normal() {
        const double u1 = 1.0 - uniform01();  // (0, 1], keeps the log finite
        const double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    // Fisher-Yates
    template <class T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i)
            std::swap(v[i - 1], v[index(i)]);
    }

    // first k entries of a uniform random permutation of {0, ..., n-1}
    std::vector<std::size_t> pick(std::size_t n, std::size_t k) {
        std::vector<std::size_t> idx(n);
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        if (k > n) k = n;
        for (std::size_t i = 0; i < k; ++i)
            std::swap(idx[i], idx[i + index(n - i)]);
        idx.resize(k);
        return idx;
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace icqd
