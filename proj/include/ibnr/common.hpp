#pragma once

#include <stdexcept>
#include <string>

namespace ibnr {

/// Malformed input: files, flags, shape mismatches. CLI exit code 2.
class InputError : public std::runtime_error {
public:
    explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical failure: overflow, non-convergence, degenerate systems. CLI exit code 3.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// MCMC diagnostics failure (PSRF above threshold, degenerate chains). CLI exit code 4.
class ConvergenceError : public std::runtime_error {
public:
    explicit ConvergenceError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace ibnr
