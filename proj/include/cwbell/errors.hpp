#pragma once

#include <stdexcept>
#include <string>

namespace cwbell {

struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

// mu too large for the configured Poisson cutoff
struct ModelOutOfRange : std::range_error {
    using std::range_error::range_error;
};

struct EstimationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InfeasibleBudget : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct LengthMismatch : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct SourceExhausted : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ParameterInfeasible : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct NoViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace cwbell

namespace cwbell {

// interval sampler exceeded its bit cap
struct SamplingAborted : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace cwbell
