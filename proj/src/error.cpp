#include "bspc/error.hpp"

namespace bspc {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::InvalidArgument: return "invalid-argument";
        case ErrorKind::ModelInvalid: return "model-invalid";
        case ErrorKind::SingularFit: return "singular-fit";
        case ErrorKind::InsufficientData: return "insufficient-data";
        case ErrorKind::DegenerateReference: return "degenerate-reference";
        case ErrorKind::InsufficientReference: return "insufficient-reference";
        case ErrorKind::ShapeMismatch: return "shape-mismatch";
        case ErrorKind::Format: return "format";
        case ErrorKind::Parse: return "parse";
        case ErrorKind::Config: return "config";
    }
    return "unknown";
}

int exit_code(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::Config:
        case ErrorKind::InvalidArgument: return 2;
        case ErrorKind::Format:
        case ErrorKind::Parse:
        case ErrorKind::InsufficientData:
        case ErrorKind::ShapeMismatch: return 3;
        case ErrorKind::ModelInvalid:
        case ErrorKind::SingularFit:
        case ErrorKind::DegenerateReference:
        case ErrorKind::InsufficientReference: return 4;
    }
    return 1;
}

}  // namespace bspc
