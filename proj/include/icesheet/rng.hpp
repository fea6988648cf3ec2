#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace icesheet {

/// Standard-normal stream keyed by (seed, stream index). The n-th draw of a
/// stream depends only on (seed, index, n), so paths can be generated in any
/// order or on any thread with bit-identical results.
///
/// Engine and seeding (mt19937_64 + seed_seq) are fully specified by the
/// standard; the normal transform is done here rather than with
/// std::normal_distribution, whose algorithm is implementation-defined.
class NormalStream {
public:
    NormalStream(std::uint64_t seed, std::uint64_t index) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(index),
                          static_cast<std::uint32_t>(index >> 32), 0x1ce5eedu};
        engine_.seed(seq);
    }

    double operator()() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        // Box-Muller on two 53-bit uniforms; u1 in (0, 1] keeps log finite.
        const double u1 = 1.0 - uniform53();
        const double u2 = uniform53();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

private:
    double uniform53() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace icesheet
