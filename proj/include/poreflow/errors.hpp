#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace poreflow {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raw file length does not match the supplied dimensions.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// A voxel byte outside [0, 100].
class InvalidPorosityError : public Error {
public:
    InvalidPorosityError(std::size_t index, int value)
        : Error("invalid porosity value " + std::to_string(value) + " at linear index " +
                std::to_string(index)),
          index_(index) {}

    std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

/// Argument outside the mathematical domain of a function.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Incompatible model, boundary condition, or solver settings.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Precondition of an operation violated by the caller (length mismatch, solid face, ...).
class ContractViolation : public Error {
public:
    using Error::Error;
};

/// Input that makes the requested quantity undefined (e.g. zero pressure drop).
class DegenerateInputError : public Error {
public:
    using Error::Error;
};

/// Krylov iteration hit a direction with non-positive curvature.
class IndefiniteOperatorError : public Error {
public:
    IndefiniteOperatorError(int iteration, double curvature)
        : Error("non-positive curvature " + std::to_string(curvature) + " at iteration " +
                std::to_string(iteration)),
          iteration_(iteration) {}

    int iteration() const noexcept { return iteration_; }

private:
    int iteration_;
};

/// Iteration limit reached before the tolerance. Carries the residual history.
class NonConvergenceError : public Error {
public:
    NonConvergenceError(const std::string& what, std::vector<double> history)
        : Error(what), history_(std::move(history)) {}

    const std::vector<double>& history() const noexcept { return history_; }

private:
    std::vector<double> history_;
};

/// Image has no inlet-to-outlet path, so no flow problem can be posed.
class NonPercolatingError : public Error {
public:
    using Error::Error;
};

}  // namespace poreflow
