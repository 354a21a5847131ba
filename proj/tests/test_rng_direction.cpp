#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "core/direction.hpp"
#include "core/error.hpp"
#include "core/rng.hpp"

using namespace rms;

TEST_CASE("normalize scales to unit length") {
    const std::vector<double> v{3.0, 4.0, 0.0};
    const Direction d = normalize(v);
    CHECK(d[0] == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(d[1] == doctest::Approx(0.8).epsilon(1e-15));
    CHECK(d[2] == 0.0);
}

TEST_CASE("normalize leaves a unit vector unchanged") {
    const double r = 1.0 / std::sqrt(2.0);
    const std::vector<double> v{r, 0.0, -r};
    const Direction d = normalize(v);
    for (std::size_t k = 0; k < 3; ++k) CHECK(std::abs(d[k] - v[k]) <= 2e-16);
}

TEST_CASE("normalize rejects a vanishing vector") {
    const std::vector<double> v{1e-15, 1e-15, 1e-15};
    CHECK_THROWS_AS(normalize(v), NumericalError);
}

TEST_CASE("angular error of antipodes is 2") {
    const Direction t = normalize(std::vector<double>{1.0, -1.0, 1.0});
    CHECK(angular_error(-t, t) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(angular_error(t, t) == doctest::Approx(0.0));
}

TEST_CASE("seed derivation separates replications and streams") {
    std::set<std::uint64_t> seen;
    for (std::uint64_t r = 0; r < 200; ++r)
        for (Stream s : {Stream::Data, Stream::FirstStage, Stream::Optimizer, Stream::Joint, Stream::Quadrature})
            seen.insert(derive_seed(42, r, s));
    CHECK(seen.size() == 1000);
    CHECK(derive_seed(42, 7, Stream::Data) == derive_seed(42, 7, Stream::Data));
    CHECK(derive_seed(42, 7, Stream::Data) != derive_seed(43, 7, Stream::Data));
}

TEST_CASE("uniform_open stays inside (0,1) and has the right moments") {
    Rng rng(1);
    double s = 0.0, s2 = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform_open();
        REQUIRE(u > 0.0);
        REQUIRE(u < 1.0);
        s += u;
        s2 += u * u;
    }
    const double mean = s / n, var = s2 / n - mean * mean;
    CHECK(std::abs(mean - 0.5) < 4.0 * std::sqrt(1.0 / 12.0 / n));
    CHECK(var == doctest::Approx(1.0 / 12.0).epsilon(0.01));
}

TEST_CASE("normal draws have unit variance") {
    Rng rng(2);
    double s = 0.0, s2 = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double z = rng.normal();
        s += z;
        s2 += z * z;
    }
    CHECK(std::abs(s / n) < 4.0 / std::sqrt(double(n)));
    CHECK(s2 / n == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("below is unbiased over a small range") {
    Rng rng(3);
    std::vector<int> counts(7, 0);
    const int n = 70000;
    for (int i = 0; i < n; ++i) ++counts[rng.below(7)];
    for (int c : counts) CHECK(std::abs(c - 10000) < 5 * std::sqrt(10000.0));
}

TEST_CASE("on_sphere draws are unit and centered") {
    Rng rng(4);
    std::vector<double> v(3), mean(3, 0.0);
    const int n = 50000;
    for (int i = 0; i < n; ++i) {
        rng.on_sphere(v);
        REQUIRE(std::abs(norm2(v) - 1.0) < 1e-14);
        for (int k = 0; k < 3; ++k) mean[k] += v[k] / n;
    }
    // Each coordinate has variance 1/3 on S^2.
    for (double m : mean) CHECK(std::abs(m) < 4.0 * std::sqrt(1.0 / 3.0 / n));
}

TEST_CASE("equal seeds replay the same stream") {
    Rng a(99), b(99);
    for (int i = 0; i < 1000; ++i) REQUIRE(a.next() == b.next());
}
