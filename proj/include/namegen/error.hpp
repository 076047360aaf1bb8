#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace namegen {

enum class ErrorKind {
    validation,
    degenerate_preference,
    transport,
    auth,
    rate_limit,
    request,
    empty_response,
    scripted_miss,
    parse,
    predicate,
    dimension_mismatch,
    corpus,
    retrieval_empty,
    optimization_failed,
    input,
    config,
};

inline std::string_view to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::validation: return "validation";
    case ErrorKind::degenerate_preference: return "degenerate-preference";
    case ErrorKind::transport: return "transport";
    case ErrorKind::auth: return "auth";
    case ErrorKind::rate_limit: return "rate-limit";
    case ErrorKind::request: return "request";
    case ErrorKind::empty_response: return "empty-response";
    case ErrorKind::scripted_miss: return "scripted-miss";
    case ErrorKind::parse: return "parse";
    case ErrorKind::predicate: return "predicate";
    case ErrorKind::dimension_mismatch: return "dimension-mismatch";
    case ErrorKind::corpus: return "corpus";
    case ErrorKind::retrieval_empty: return "retrieval-empty";
    case ErrorKind::optimization_failed: return "optimization-failed";
    case ErrorKind::input: return "input";
    case ErrorKind::config: return "config";
    }
    return "unknown";
}

/// Single exception type for the library; the kind drives retry decisions and CLI exit codes.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

    bool retryable() const noexcept {
        return kind_ == ErrorKind::transport || kind_ == ErrorKind::rate_limit ||
               kind_ == ErrorKind::empty_response;
    }

private:
    ErrorKind kind_;
};

/// Exit codes: 0 success, 1 runtime failure, 2 input error, 3 config error.
inline int exit_code_for(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::input:
    case ErrorKind::validation:
    case ErrorKind::corpus:
    case ErrorKind::predicate:
        return 2;
    case ErrorKind::config:
        return 3;
    default:
        return 1;
    }
}

}  // namespace namegen
