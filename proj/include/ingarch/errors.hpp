#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace ingarch {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// A volatility value fell outside the admissible domain of the conditional
/// family (e.g. v >= n^2 for the binomial family).
class FamilyDomainError : public Error {
public:
    FamilyDomainError(std::string family, double v, std::int64_t t = -1)
        : Error(format(family, v, t)), family_(std::move(family)), v_(v), t_(t) {}

    const std::string& family() const noexcept { return family_; }
    double value() const noexcept { return v_; }
    /// Time index of the offending step, or -1 outside a simulation.
    std::int64_t time_index() const noexcept { return t_; }

private:
    static std::string format(const std::string& family, double v, std::int64_t t);
    std::string family_;
    double v_;
    std::int64_t t_;
};

/// Raised by the explosion detector when a simulated volatility crosses the
/// abort threshold.
class ExplosionError : public Error {
public:
    ExplosionError(std::int64_t t, double v);
    std::int64_t time_index() const noexcept { return t_; }
    double value() const noexcept { return v_; }

private:
    std::int64_t t_;
    double v_;
};

/// Lipschitz coefficient sum >= 1; the contraction construction is undefined.
class NotContractiveError : public Error {
public:
    explicit NotContractiveError(double total);
    double total() const noexcept { return total_; }

private:
    double total_;
};

/// Invalid or inconsistent configuration (bad field value, unknown key, ...).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Moment matrix too close to singular for the requested operation.
class SingularMatrixError : public Error {
public:
    using Error::Error;
};

/// Malformed input file (CSV parse failure etc.).
class IoError : public Error {
public:
    using Error::Error;
};

} // namespace ingarch
