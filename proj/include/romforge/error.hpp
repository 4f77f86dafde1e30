#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace romforge {

/// Base of every error thrown by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad argument: out-of-range rank, dimension mismatch, unsupported option.
class ArgumentError : public Error {
public:
    using Error::Error;
};

/// Non-finite or otherwise unusable numeric input.
class InvalidDataError : public Error {
public:
    using Error::Error;
};

/// Singular values that are all zero; no energy to distribute.
class DegenerateSpectrumError : public Error {
public:
    using Error::Error;
};

/// Kernel matrix that stays indefinite after the full jitter ladder.
class IllConditionedError : public Error {
public:
    using Error::Error;
};

/// Iterative solver that failed to reach its tolerance.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double final_residual, std::size_t iterations)
        : Error(what), final_residual_(final_residual), iterations_(iterations) {}

    double final_residual() const noexcept { return final_residual_; }
    std::size_t iterations() const noexcept { return iterations_; }

private:
    double final_residual_;
    std::size_t iterations_;
};

/// Network training that produced a non-finite loss or gradient.
class TrainingError : public Error {
public:
    using Error::Error;
};

/// Malformed file contents (bad magic, truncated payload, bad CSV row).
class FormatError : public Error {
public:
    using Error::Error;
};

/// Filesystem failure; the message names the path.
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace romforge
