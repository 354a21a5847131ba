#include "core/rng.hpp"

#include <cmath>
#include <numbers>

namespace rms {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t replication,
                          Stream stream) noexcept {
    std::uint64_t h = splitmix64(master_seed);
    h = splitmix64(h ^ (replication + 0x632BE59BD9B4E019ULL));
    return splitmix64(h ^ static_cast<std::uint64_t>(stream));
}

double Rng::uniform_open() {
    for (;;) {
        const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
        if (u > 0.0) return u;
    }
}

double Rng::uniform(double lo, double hi) {
    const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
}

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    // Box-Muller
    const double u1 = uniform_open();
    const double u2 = uniform_open();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
}

std::uint64_t Rng::below(std::uint64_t bound) {
    // Rejection keeps the result free of modulo bias.
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    for (;;) {
        const std::uint64_t v = engine_();
        if (v < limit) return v % bound;
    }
}

void Rng::on_sphere(std::span<double> out) {
    for (;;) {
        double norm2 = 0.0;
        for (double& v : out) {
            v = normal();
            norm2 += v * v;
        }
        if (norm2 > 1e-20) {
            const double inv = 1.0 / std::sqrt(norm2);
            for (double& v : out) v *= inv;
            return;
        }
    }
}

}  // namespace rms
