#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mfrac {

/// Root of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// A configuration document violates its schema.
class ConfigError : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

/// Circulant embedding could not be made nonnegative.
class SimulationFailure : public Error {
public:
    using Error::Error;
};

/// Quadrature or factorization did not reach its target accuracy.
class NumericalFailure : public Error {
public:
    NumericalFailure(const std::string& what, double achieved = 0.0)
        : Error(what), achieved_(achieved) {}

    double achieved_tolerance() const noexcept { return achieved_; }

private:
    double achieved_;
};

class DegenerateNeighborhood : public Error {
public:
    using Error::Error;
};

/// V_{2n}(t0) (or V_n(t0)) vanished so the log-ratio is undefined.
class DegenerateVariation : public Error {
public:
    using Error::Error;
};

class DegenerateOscillation : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

} // namespace mfrac
