#pragma once

#include <stdexcept>
#include <string>

namespace embcmp {

// Exception hierarchy. The CLI maps each category to an exit code:
// InvalidArgument -> 2, ComputeError -> 3, DataError -> 4.

struct InvalidArgument : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct ComputeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Raised when a long computation is stopped by its caller.
struct Cancelled : ComputeError {
    Cancelled() : ComputeError("cancelled") {}
};

struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ParseError : DataError {
    ParseError(const std::string& what, std::size_t line)
        : DataError("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

} // namespace embcmp
