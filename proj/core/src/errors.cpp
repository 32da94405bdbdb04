#include "enrichbench/errors.hpp"

#include <sstream>
#include <utility>

namespace enrichbench {

namespace {

std::string with_status(int status, const std::string& message) {
    if (status == 0) return "provider transport error: " + message;
    return "provider error (HTTP " + std::to_string(status) + "): " + message;
}

std::string summarize(const std::vector<BatchError::Failure>& failures) {
    std::ostringstream out;
    out << failures.size() << " item(s) failed";
    if (!failures.empty()) {
        out << "; first at index " << failures.front().index << ": " << failures.front().message;
    }
    return out.str();
}

}  // namespace

ProviderError::ProviderError(int status, const std::string& message, bool retryable)
    : Error(with_status(status, message)), status_(status), retryable_(retryable) {}

DimensionMismatch::DimensionMismatch(std::size_t expected, std::size_t actual)
    : Error("dimension mismatch: expected " + std::to_string(expected) + ", got " +
            std::to_string(actual)),
      expected_(expected),
      actual_(actual) {}

ParseError::ParseError(std::size_t line, const std::string& message)
    : Error("line " + std::to_string(line) + ": " + message), line_(line) {}

SchemaError::SchemaError(std::size_t line, const std::string& message)
    : Error("line " + std::to_string(line) + ": " + message), line_(line) {}

BatchError::BatchError(std::vector<Failure> failures)
    : Error(summarize(failures)), failures_(std::move(failures)) {}

}  // namespace enrichbench
