#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tsemos {

enum class ErrorCode {
    InvalidEnsemble,
    ImputationFailure,
    ParseError,
    InvalidConfig,
    DegenerateSeries,
    HistoryTooShort,
    InvalidInput,
    NumericalFailure,
    InvalidLevel,
    EmptyInput,
    InvalidReference,
    InvalidStart,
    InsufficientHistory,
    DegenerateDifferential,
    AlignmentError,
    InvalidPIT,
    IOError,
};

[[nodiscard]] std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above so the
/// command-line front end can map it onto an exit status.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace tsemos
