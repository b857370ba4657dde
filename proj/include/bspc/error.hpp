#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace bspc {

enum class ErrorKind {
    InvalidArgument,
    ModelInvalid,
    SingularFit,
    InsufficientData,
    DegenerateReference,
    InsufficientReference,
    ShapeMismatch,
    Format,
    Parse,
    Config,
};

std::string_view to_string(ErrorKind kind) noexcept;

// Process exit code for a library error: 2 config, 3 data, 4 numeric/degenerate.
int exit_code(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace bspc
