#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace stackcast {

// Base of every exception thrown by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad inputs, bad configs, violated preconditions. CLI exit code 1.
class ValidationError : public Error {
public:
    using Error::Error;
};

// Failures of the environment (I/O and friends). CLI exit code 2.
class RuntimeFailure : public Error {
public:
    using Error::Error;
};

// --- market_data ---

class MalformedHeader : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class MalformedRow : public ValidationError {
public:
    MalformedRow(std::size_t line, const std::string& what)
        : ValidationError("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

class ConflictingDuplicateDate : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class AllMissingField : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class EmptyInput : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class UnknownField : public ValidationError {
public:
    using ValidationError::ValidationError;
};

// --- preprocess ---

class DegenerateRange : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class ZeroVariance : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class SeriesTooShort : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class TooFewSamples : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class TooFewFolds : public ValidationError {
public:
    using ValidationError::ValidationError;
};

// --- nn_core / recurrent / models ---

class ShapeMismatch : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class LengthMismatch : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class InvalidRate : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class CacheMismatch : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class NonDeterministicLoss : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class EmptyDataset : public ValidationError {
public:
    using ValidationError::ValidationError;
};

// --- ensemble ---

class LeakageDetected : public ValidationError {
public:
    using ValidationError::ValidationError;
};

// --- harness ---

class InvalidSpec : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class IoError : public RuntimeFailure {
public:
    using RuntimeFailure::RuntimeFailure;
};

} // namespace stackcast
