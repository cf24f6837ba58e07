#pragma once
#include <stdexcept>
#include <string>

namespace fbse {

// CLI exit-code mapping: ConfigError -> 2, NumericalError -> 3, PreconditionError -> 4.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct ParseError : ConfigError {
    explicit ParseError(const std::string& msg) : ConfigError(msg) {}
};

struct PreconditionError : std::runtime_error {
    explicit PreconditionError(const std::string& msg) : std::runtime_error(msg) {}
};

struct NumericalError : std::runtime_error {
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

// Thrown when a numerical null space does not have the expected dimension
// (special parameter loci, or float-indistinguishable pseudo-null directions).
struct DegeneracyAnomalyError : NumericalError {
    DegeneracyAnomalyError(const std::string& msg, int expected, int got)
        : NumericalError(msg), expected_dim(expected), got_dim(got) {}
    int expected_dim;
    int got_dim;
};

// Left/right zero modes self-orthogonal: at or too near an exceptional point.
struct SelfOrthogonalityError : PreconditionError {
    explicit SelfOrthogonalityError(const std::string& msg) : PreconditionError(msg) {}
};

} // namespace fbse
