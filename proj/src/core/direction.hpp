#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace rms {

// A point on the unit sphere S^{d-1}. Construction goes through normalize(),
// so every Direction has unit Euclidean norm up to rounding.
class Direction {
public:
    Direction() = default;

    std::size_t dim() const noexcept { return v_.size(); }
    std::span<const double> values() const noexcept { return v_; }
    double operator[](std::size_t k) const { return v_[k]; }
    const std::vector<double>& vec() const noexcept { return v_; }

    Direction operator-() const;

    friend Direction normalize(std::span<const double> v);

private:
    explicit Direction(std::vector<double> v) : v_(std::move(v)) {}
    std::vector<double> v_;
};

// v / ||v||. Throws NumericalError when ||v|| <= 1e-12.
Direction normalize(std::span<const double> v);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> v);

// 1 - cos(angle(a, b)) for unit vectors.
double angular_error(const Direction& estimate, const Direction& truth);

}  // namespace rms
