#include "q1d/errors.hpp"

namespace q1d {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::RankDeficient: return "RankDeficient";
    case ErrorKind::Overflow: return "Overflow";
    case ErrorKind::LogUndefined: return "LogUndefined";
    case ErrorKind::BadOrder: return "BadOrder";
    case ErrorKind::NotLorentz: return "NotLorentz";
    case ErrorKind::BadLaw: return "BadLaw";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::DegenerateTransmission: return "DegenerateTransmission";
    case ErrorKind::VerblunskyTooLarge: return "VerblunskyTooLarge";
    case ErrorKind::SingularBeta: return "SingularBeta";
    case ErrorKind::SizeTooLarge: return "SizeTooLarge";
    case ErrorKind::NotHyperbolic: return "NotHyperbolic";
    case ErrorKind::EmptyGenerators: return "EmptyGenerators";
    case ErrorKind::NotSymmetric: return "NotSymmetric";
    case ErrorKind::UnsupportedModel: return "UnsupportedModel";
    case ErrorKind::NoInteriorModes: return "NoInteriorModes";
    case ErrorKind::BoundaryContamination: return "BoundaryContamination";
    case ErrorKind::PreconditionViolated: return "PreconditionViolated";
    case ErrorKind::InvalidModel: return "InvalidModel";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::ValidationError: return "ValidationError";
    case ErrorKind::UnknownKey: return "UnknownKey";
    }
    return "Unknown";
}

bool is_config_error(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::ParseError:
    case ErrorKind::ValidationError:
    case ErrorKind::UnknownKey:
    case ErrorKind::InvalidModel:
    case ErrorKind::BadLaw:
    case ErrorKind::UnsupportedModel:
        return true;
    default:
        return false;
    }
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace q1d
