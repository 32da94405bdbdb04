#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace enrichbench {

// Root of every error the library throws. Callers that only care about
// "something in the pipeline failed" can catch this.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

// A chat or embedding provider call failed. `status` is the HTTP status, or 0
// for transport-level failures (connect, timeout, malformed response).
class ProviderError : public Error {
public:
    ProviderError(int status, const std::string& message, bool retryable);

    int status() const noexcept { return status_; }
    bool retryable() const noexcept { return retryable_; }

private:
    int status_;
    bool retryable_;
};

class DimensionMismatch : public Error {
public:
    DimensionMismatch(std::size_t expected, std::size_t actual);

    std::size_t expected() const noexcept { return expected_; }
    std::size_t actual() const noexcept { return actual_; }

private:
    std::size_t expected_;
    std::size_t actual_;
};

class ZeroVector : public Error {
public:
    ZeroVector() : Error("zero vector has no direction") {}
};

// Metric undefined: all gold labels are identical.
class DegenerateLabels : public Error {
public:
    using Error::Error;
};

class SingleLabel : public Error {
public:
    using Error::Error;
};

// Line-oriented input errors carry the 1-based line number.
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& message);
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class SchemaError : public Error {
public:
    SchemaError(std::size_t line, const std::string& message);
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class EmptySplit : public Error {
public:
    using Error::Error;
};

// Aggregate of per-item failures from a batch operation.
class BatchError : public Error {
public:
    struct Failure {
        std::size_t index;
        std::string message;
        int status;  // provider status, or -1 when not a provider error
    };

    explicit BatchError(std::vector<Failure> failures);

    const std::vector<Failure>& failures() const noexcept { return failures_; }

private:
    std::vector<Failure> failures_;
};

}  // namespace enrichbench
