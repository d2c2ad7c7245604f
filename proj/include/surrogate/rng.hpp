#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>

namespace surrogate {

// Seeded generator with portable derived distributions. std::mt19937_64 is
// fully specified by the standard, but the <random> distributions are not, so
// everything downstream of the raw engine is computed here.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    // Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    // Uniform on (0, 1).
    double uniform_open() {
        double u;
        do {
            u = uniform();
        } while (u == 0.0);
        return u;
    }

    // Unbiased integer in [0, n).
    std::uint64_t below(std::uint64_t n);

    bool bernoulli(double p) { return uniform() < p; }

    double normal(double mean, double stddev);
    double laplace(double location, double scale);
    double exponential() { return -std::log(uniform_open()); }

    // Index drawn with probability proportional to `weights`.
    std::size_t categorical(std::span<const double> weights);

private:
    std::mt19937_64 engine_;
};

// Independent child seed for stream `stream` of a run seeded with `seed`
// (splitmix64 finalizer).
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace surrogate
