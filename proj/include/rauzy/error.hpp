#pragma once

/**
 * @file error.hpp
 * @brief Exception hierarchy shared by every module.
 *
 * Each family maps to one CLI exit code: validation (2), not-found (3),
 * numeric (4).
 */

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace rauzy {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input or a violated precondition.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// A word whose junction letters fail the compatibility rule.
class IncompatibleWord : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// Not enough samples for an estimator to run.
class InsufficientData : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// A bounded search ran out of budget.
class NotFound : public Error {
public:
    using Error::Error;
};

/// Numeric failures carry the orbit step at which they happened, when known.
class NumericError : public Error {
public:
    explicit NumericError(const std::string& what, std::optional<std::size_t> step = std::nullopt)
        : Error(what), step_(step) {}

    [[nodiscard]] std::optional<std::size_t> step() const noexcept { return step_; }
    void set_step(std::size_t s) noexcept { step_ = s; }

private:
    std::optional<std::size_t> step_;
};

/// The point sits on the boundary lambda_m == lambda_{pi^-1 m}.
class NonGeneric : public NumericError {
public:
    using NumericError::NumericError;
};

/// A Zorich run needed more Rauzy-Veech steps than the configured cap.
class CapExceeded : public NumericError {
public:
    using NumericError::NumericError;
};

class DenominatorOverflow : public NumericError {
public:
    using NumericError::NumericError;
};

/// Rejection sampling gave up.
class SamplingError : public NumericError {
public:
    using NumericError::NumericError;
};

}  // namespace rauzy
