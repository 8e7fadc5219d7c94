#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace nlab {

/// Counter-based generator: output i of stream s is a pure function of
/// (seed, stream, i), so draws can be addressed directly and split across
/// workers without shared state. Mixing is the SplitMix64 finalizer.
class CounterRng {
public:
    using result_type = std::uint64_t;

    constexpr CounterRng(std::uint64_t seed, std::uint64_t stream = 0) : seed_(seed), stream_(stream) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    static constexpr std::uint64_t mix(std::uint64_t z)
    {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Random access draw; does not move the counter.
    constexpr std::uint64_t at(std::uint64_t index) const
    {
        return mix(mix(seed_ ^ mix(stream_ + 0x9e3779b97f4a7c15ULL)) + index * 0x9e3779b97f4a7c15ULL);
    }

    result_type operator()() { return at(counter_++); }

    /// Uniform integer in [0, bound) by rejection; bound > 0.
    std::uint64_t below(std::uint64_t bound)
    {
        const std::uint64_t limit = max() - max() % bound;
        for (;;) {
            const auto v = (*this)();
            if (v < limit) return v % bound;
        }
    }

    /// Uniform integer in [lo, hi].
    std::int64_t between(std::int64_t lo, std::int64_t hi)
    {
        return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo) + 1));
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double unit() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    /// Exponential with the given mean.
    double exponential(double mean) { return -mean * std::log1p(-unit()); }

    /// Derives an independent generator for a sub-stream.
    CounterRng fork(std::uint64_t stream) const { return CounterRng(at(~stream), stream); }

    std::uint64_t counter() const { return counter_; }
    void advance_to(std::uint64_t counter) { counter_ = counter; }

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t counter_ = 0;
};

} // namespace nlab
