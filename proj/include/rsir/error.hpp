#pragma once

#include <stdexcept>
#include <string>

namespace rsir {

/// Error classes surfaced by the library. The CLI maps each one to a distinct
/// process exit status.
enum class ErrorKind {
    Io,
    Format,
    Dimension,
    InsufficientData,
    Data,
    EmptyIndex,
    Evaluation,
    Construction,
    Usage,
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& message);

}  // namespace rsir
