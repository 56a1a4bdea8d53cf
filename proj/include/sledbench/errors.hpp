// errors.hpp: exception types shared across the solver suite

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace sledbench {

// Invalid input parameters (spec validation, grid bounds, shapes).
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A numerical procedure failed to reach its stated tolerance.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Energy levels closer than the degeneracy tolerance.
class DegenerateSpectrum : public NumericalError {
public:
    using NumericalError::NumericalError;
};

// A stochastic trajectory produced NaN/Inf.
class TrajectoryFailure : public NumericalError {
public:
    TrajectoryFailure(std::size_t index, const std::string& what)
        : NumericalError(what), trajectory_index(index) {}
    std::size_t trajectory_index;
};

// An optimizer objective returned a non-finite value.
class NonFiniteObjective : public NumericalError {
public:
    NonFiniteObjective(std::vector<double> x, const std::string& what)
        : NumericalError(what), parameters(std::move(x)) {}
    std::vector<double> parameters;
};

} // namespace sledbench
