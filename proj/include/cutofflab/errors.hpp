#pragma once

#include <stdexcept>
#include <string>

namespace cutofflab {

// Base of every error raised by the library. Callers that only care about
// "something in the numerics went wrong" catch this one.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Precondition on an argument violated (bad epsilon, mismatched dimensions, ...).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

// t <= 0 on a point-started diffusion: the law is a Dirac mass there.
class DegenerateStartError : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

class QuadratureError : public Error {
public:
    QuadratureError(const std::string& what, double error_estimate)
        : Error(what), error_estimate_(error_estimate) {}
    double error_estimate() const noexcept { return error_estimate_; }

private:
    double error_estimate_;
};

// A sampled curve that is assumed monotone was not.
class MonotonicityError : public Error {
public:
    using Error::Error;
};

// Thresholds not crossed inside the sampled time range.
class BracketError : public Error {
public:
    using Error::Error;
};

class ConvexityError : public InvalidArgument {
public:
    ConvexityError(const std::string& what, std::size_t node, double x)
        : InvalidArgument(what), node_(node), x_(x) {}
    std::size_t node() const noexcept { return node_; }
    double x() const noexcept { return x_; }

private:
    std::size_t node_;
    double x_;
};

class SolverError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    ConfigError(const std::string& what, int line = -1)
        : Error(line >= 0 ? "line " + std::to_string(line + 1) + ": " + what : what),
          line_(line) {}
    // Zero-based; -1 when the error is not tied to a source line.
    int line() const noexcept { return line_; }

private:
    int line_;
};

}  // namespace cutofflab
