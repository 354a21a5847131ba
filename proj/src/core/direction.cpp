#include "core/direction.hpp"

#include <cmath>
#include <sstream>

#include "core/error.hpp"

namespace rms {

Direction normalize(std::span<const double> v) {
    if (v.empty()) throw ConfigError("cannot normalize an empty vector");
    const double n = norm2(v);
    if (!(n > 1e-12) || !std::isfinite(n)) {
        std::ostringstream msg;
        msg << "cannot normalize vector with norm " << n;
        throw NumericalError(msg.str());
    }
    std::vector<double> out(v.begin(), v.end());
    for (double& x : out) x /= n;
    return Direction(std::move(out));
}

Direction Direction::operator-() const {
    std::vector<double> out(v_);
    for (double& x : out) x = -x;
    return Direction(std::move(out));
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
    return s;
}

double norm2(std::span<const double> v) { return std::sqrt(dot(v, v)); }

double angular_error(const Direction& estimate, const Direction& truth) {
    if (estimate.dim() != truth.dim()) throw ConfigError("angular_error: dimension mismatch");
    return 1.0 - dot(estimate.values(), truth.values());
}

}  // namespace rms
