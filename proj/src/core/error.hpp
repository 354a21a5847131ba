#pragma once

#include <stdexcept>
#include <string>

namespace rms {

// Invalid or inconsistent user configuration (bad dimensions, non-positive
// bandwidth, unknown enum tag, ...).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A numerical procedure could not produce a finite answer.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Design matrix of a series fit lost rank.
class RankDeficientError : public NumericalError {
public:
    RankDeficientError(const std::string& what, std::size_t deficient)
        : NumericalError(what), deficient_(deficient) {}
    std::size_t deficient_columns() const noexcept { return deficient_; }

private:
    std::size_t deficient_;
};

// Too many replications failed for the experiment to be reported.
class ExperimentError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace rms
