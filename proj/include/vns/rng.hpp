#pragma once

#include <cmath>
#include <cstdint>

namespace vns {

/// Counter-based deterministic generator.
///
/// Each draw is a pure function of (seed, stream, counter): the 192 bits are
/// mixed through two rounds of the splitmix64 finalizer. There is no hidden
/// state, so any particle/cell/axis can be sampled independently and the
/// result is reproducible regardless of evaluation order.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

    std::uint64_t bits(std::uint64_t stream, std::uint64_t counter) const {
        std::uint64_t z = mix(seed_ ^ mix(stream ^ 0x9e3779b97f4a7c15ULL));
        z = mix(z ^ counter);
        return z;
    }

    /// Uniform in [0, 1).
    double uniform(std::uint64_t stream, std::uint64_t counter) const {
        return static_cast<double>(bits(stream, counter) >> 11) * 0x1.0p-53;
    }

    /// Standard normal via Box-Muller; `which` in {0,1} selects the pair member.
    double normal(std::uint64_t stream, std::uint64_t counter, int which = 0) const {
        double u1 = uniform(stream, 2 * counter);
        double u2 = uniform(stream, 2 * counter + 1);
        if (u1 < 1e-300) u1 = 1e-300;
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double phi = 6.283185307179586476925286766559 * u2;
        return which == 0 ? r * std::cos(phi) : r * std::sin(phi);
    }

    std::uint64_t seed() const { return seed_; }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t seed_;
};

} // namespace vns
