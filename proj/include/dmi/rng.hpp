#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

namespace dmi
{

// Counter-based 64-bit generator.
//
// Output n of a stream is mix64(key + (n + 1) * 0x9E3779B97F4A7C15) where
// key = mix64(seed ^ mix64(stream + 0xD1B54A32D192ED03)) and mix64 is the
// SplitMix64 finalizer. Any value can be recomputed from (seed, stream, n)
// alone, so sequences are reproducible across platforms and languages.
//
// uniform() takes the top 53 bits: u = (x >> 11) * 2^-53, in [0, 1).
// normal() is Box-Muller on two consecutive uniforms (u1 mapped to (0, 1]),
// returning the cosine branch first and the sine branch on the next call.
class CounterRng
{
public:
    static constexpr std::uint64_t golden = 0x9E3779B97F4A7C15ULL;

    explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
        : key_(mix64(seed ^ mix64(stream + 0xD1B54A32D192ED03ULL)))
    {
    }

    static constexpr std::uint64_t mix64(std::uint64_t z)
    {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    std::uint64_t at(std::uint64_t n) const { return mix64(key_ + (n + 1) * golden); }

    std::uint64_t next() { return at(counter_++); }

    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double normal()
    {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    // Unbiased integer in [0, n) by rejection.
    std::uint64_t below(std::uint64_t n)
    {
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
        std::uint64_t x = next();
        while (x >= limit) {
            x = next();
        }
        return x % n;
    }

    std::uint64_t counter() const { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

// First n entries of a seeded Fisher-Yates shuffle of 0..size-1.
std::vector<std::size_t> sample_without_replacement(std::size_t size, std::size_t n, std::uint64_t seed,
                                                    std::uint64_t stream = 0);

} // namespace dmi
