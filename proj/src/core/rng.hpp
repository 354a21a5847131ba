#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace rms {

// Sub-stream tags. Each replication owns one stream per purpose so that
// changing e.g. the number of optimizer starts never perturbs the data.
enum class Stream : std::uint64_t {
    Data = 1,
    FirstStage = 2,
    Optimizer = 3,
    Joint = 4,
    Quadrature = 5,
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

// Seed for (master_seed, replication, stream); pure function of its inputs.
std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t replication,
                          Stream stream) noexcept;

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

    // Uniform on the open interval (0,1); never returns an endpoint.
    double uniform_open();
    // Uniform on [lo, hi).
    double uniform(double lo, double hi);
    double normal();
    std::uint64_t next() { return engine_(); }
    // Uniform integer in [0, bound).
    std::uint64_t below(std::uint64_t bound);

    // Uniform direction on the unit sphere, written into out.
    void on_sphere(std::span<double> out);

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace rms
