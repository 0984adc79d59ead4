#pragma once

#include <cmath>
#include <cstdint>

namespace advkit {

// Deterministic counter-based generator (SplitMix64). The same seed produces
// the same stream on every platform and compiler, which is what makes seeded
// attack runs reproducible byte for byte. Not cryptographic.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1) with 53-bit resolution.
    double next_unit() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform in [lo, hi). With lo == hi this returns exactly lo.
    double uniform(double lo, double hi) {
        return lo + next_unit() * (hi - lo);
    }

    // Standard normal via Box-Muller; consumes two uniforms per pair.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        // 1 - u keeps the log argument in (0, 1].
        double u1 = 1.0 - next_unit();
        double u2 = next_unit();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 2.0 * 3.141592653589793238462643383279502884 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    // Independent per-example stream: seed XOR example index. Used by the
    // evaluation harness so results do not depend on scheduling order.
    static std::uint64_t derive(std::uint64_t base, std::uint64_t index) {
        return base ^ index;
    }

    // One SplitMix64 scramble of x. Chained to fold cell coordinates
    // (attack, model, epsilon) into a base seed.
    static std::uint64_t mix(std::uint64_t x) {
        x += 0x9e3779b97f4a7c15ull;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
        return x ^ (x >> 31);
    }

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace advkit
