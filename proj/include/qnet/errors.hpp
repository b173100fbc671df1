#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace qnet {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

/// Singular Kronecker system in a Sylvester/Lyapunov solve.
class SolvabilityError : public Error {
public:
    SolvabilityError(const std::string& what, double smallest_singular_value)
        : Error(what), smallest_singular_value_(smallest_singular_value) {}
    double smallest_singular_value() const noexcept { return smallest_singular_value_; }

private:
    double smallest_singular_value_;
};

class NumericError : public Error {
public:
    using Error::Error;
};

/// A mode matrix failed the Hurwitz test at the carried frequency point.
class StabilityError : public Error {
public:
    StabilityError(const std::string& what, std::complex<double> z1, std::complex<double> z2 = {1.0, 0.0})
        : Error(what), z1_(z1), z2_(z2) {}
    std::complex<double> z() const noexcept { return z1_; }
    std::complex<double> z2() const noexcept { return z2_; }

private:
    std::complex<double> z1_;
    std::complex<double> z2_;
};

/// Adaptive numerics stopped at their cap without meeting the tolerance.
class InconclusiveError : public NumericError {
public:
    using NumericError::NumericError;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

class UnsupportedError : public Error {
public:
    using Error::Error;
};

/// Circular sampling would alias: fewer roots of unity than the Laurent span requires.
class AliasingError : public Error {
public:
    AliasingError(const std::string& what, int minimal_n) : Error(what), minimal_n_(minimal_n) {}
    int minimal_n() const noexcept { return minimal_n_; }

private:
    int minimal_n_;
};

class ResourceError : public Error {
public:
    using Error::Error;
};

class IntegrationError : public Error {
public:
    IntegrationError(const std::string& what, double last_good_time)
        : Error(what), last_good_time_(last_good_time) {}
    double last_good_time() const noexcept { return last_good_time_; }

private:
    double last_good_time_;
};

}  // namespace qnet
