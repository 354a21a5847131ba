#pragma once

#include <cstddef>
#include <vector>

namespace rms {

struct GaussRule {
    std::vector<double> nodes;    // on [-1, 1]
    std::vector<double> weights;
};

// n-point Gauss-Legendre rule; results are cached per n.
const GaussRule& gauss_legendre(std::size_t n);

}  // namespace rms
