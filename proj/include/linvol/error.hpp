#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace linvol {

enum class ErrorCode {
    NotTwoToOne,
    EmptyRow,
    Reducible,
    BalanceViolated,
    NonPositiveLength,
    SingularPoint,
    Tie,
    UndefinedMove,
    NonComposable,
    TooFewBlocks,
    DegenerateQuotient,
    UnsupportedRepresentation,
    NonFiniteVariation,
    OrbitHitsSingularity,
    DiagnosticsFailed,
    NotConverged,
    EmptyPolytope,
    InvalidSubset,
    TieEncountered,
    IoError,
    InvalidInput,
    FieldMismatch,
};

inline std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::NotTwoToOne: return "NotTwoToOne";
    case ErrorCode::EmptyRow: return "EmptyRow";
    case ErrorCode::Reducible: return "Reducible";
    case ErrorCode::BalanceViolated: return "BalanceViolated";
    case ErrorCode::NonPositiveLength: return "NonPositiveLength";
    case ErrorCode::SingularPoint: return "SingularPoint";
    case ErrorCode::Tie: return "Tie";
    case ErrorCode::UndefinedMove: return "UndefinedMove";
    case ErrorCode::NonComposable: return "NonComposable";
    case ErrorCode::TooFewBlocks: return "TooFewBlocks";
    case ErrorCode::DegenerateQuotient: return "DegenerateQuotient";
    case ErrorCode::UnsupportedRepresentation: return "UnsupportedRepresentation";
    case ErrorCode::NonFiniteVariation: return "NonFiniteVariation";
    case ErrorCode::OrbitHitsSingularity: return "OrbitHitsSingularity";
    case ErrorCode::DiagnosticsFailed: return "DiagnosticsFailed";
    case ErrorCode::NotConverged: return "NotConverged";
    case ErrorCode::EmptyPolytope: return "EmptyPolytope";
    case ErrorCode::InvalidSubset: return "InvalidSubset";
    case ErrorCode::TieEncountered: return "TieEncountered";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::InvalidInput: return "InvalidInput";
    case ErrorCode::FieldMismatch: return "FieldMismatch";
    }
    return "Unknown";
}

/// Exception carrying a machine-readable code; the CLI maps these to
/// structured {code, message, context} records.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message, std::string context = {})
        : std::runtime_error(std::string(to_string(code)) + ": " + message),
          code_(code), message_(message), context_(std::move(context)) {}

    ErrorCode code() const noexcept { return code_; }
    const std::string& message() const noexcept { return message_; }
    const std::string& context() const noexcept { return context_; }

private:
    ErrorCode code_;
    std::string message_;
    std::string context_;
};

} // namespace linvol
