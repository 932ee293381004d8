#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace q1d {

enum class ErrorKind {
    RankDeficient,
    Overflow,
    LogUndefined,
    BadOrder,
    NotLorentz,
    BadLaw,
    DimensionMismatch,
    DegenerateTransmission,
    VerblunskyTooLarge,
    SingularBeta,
    SizeTooLarge,
    NotHyperbolic,
    EmptyGenerators,
    NotSymmetric,
    UnsupportedModel,
    NoInteriorModes,
    BoundaryContamination,
    PreconditionViolated,
    InvalidModel,
    ParseError,
    ValidationError,
    UnknownKey,
};

std::string_view to_string(ErrorKind kind);

/// Numerical failures map to exit code 2, configuration failures to exit code 1.
bool is_config_error(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what);
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& what);

}  // namespace q1d
