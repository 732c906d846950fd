#include "hsf/error.hpp"

namespace hsf {

std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::MalformedRow: return "MalformedRow";
    case ErrorCode::NonMonotoneTimestamps: return "NonMonotoneTimestamps";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::MissingLag: return "MissingLag";
    case ErrorCode::EmptyHistogram: return "EmptyHistogram";
    case ErrorCode::InvalidAlpha: return "InvalidAlpha";
    case ErrorCode::TooShort: return "TooShort";
    case ErrorCode::TooFewSamples: return "TooFewSamples";
    case ErrorCode::NonFiniteInput: return "NonFiniteInput";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::InputNotStandardized: return "InputNotStandardized";
    case ErrorCode::SlotTooSmall: return "SlotTooSmall";
    case ErrorCode::MissingContext: return "MissingContext";
    case ErrorCode::OutOfWindow: return "OutOfWindow";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::ZeroNormalizer: return "ZeroNormalizer";
    case ErrorCode::ZeroBaseline: return "ZeroBaseline";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::ModelNotFound: return "ModelNotFound";
    case ErrorCode::FormatError: return "FormatError";
    case ErrorCode::InputMismatch: return "InputMismatch";
    }
    return "Unknown";
}

namespace {

std::string compose(ErrorCode code, const std::string& detail, std::optional<long long> index) {
    std::string msg(to_string(code));
    if (index) msg += "(" + std::to_string(*index) + ")";
    if (!detail.empty()) msg += ": " + detail;
    return msg;
}

} // namespace

Error::Error(ErrorCode code, const std::string& detail, std::optional<long long> index)
    : std::runtime_error(compose(code, detail, index)), code_(code), index_(index) {}

} // namespace hsf
