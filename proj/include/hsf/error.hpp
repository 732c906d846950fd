#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace hsf {

/// Failure categories surfaced by the library. The CLI maps each one onto an
/// exit code (see cli.hpp).
enum class ErrorCode {
    // ingest
    EmptyInput,
    MalformedRow,
    NonMonotoneTimestamps,
    InvalidConfig,
    // solar
    MissingLag,
    // features
    EmptyHistogram,
    InvalidAlpha,
    TooShort,
    // learners / mmff
    TooFewSamples,
    NonFiniteInput,
    DimensionMismatch,
    InputNotStandardized,
    // hs
    SlotTooSmall,
    MissingContext,
    OutOfWindow,
    // evaluation
    LengthMismatch,
    ZeroNormalizer,
    ZeroBaseline,
    // plumbing
    IoFailure,
    ModelNotFound,
    FormatError,
    InputMismatch,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& detail, std::optional<long long> index = std::nullopt);

    ErrorCode code() const noexcept { return code_; }

    /// Row index for MalformedRow, hour for SlotTooSmall / OutOfWindow.
    std::optional<long long> index() const noexcept { return index_; }

private:
    ErrorCode code_;
    std::optional<long long> index_;
};

} // namespace hsf
