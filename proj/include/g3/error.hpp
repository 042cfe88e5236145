#pragma once

#include <stdexcept>
#include <string>

namespace g3 {

enum class ErrorCode {
    IsolatedNode,
    NotSymmetric,
    NegativeTime,
    NegativeEntries,
    DimensionMismatch,
    DimensionExceeded,
    EmptyBatch,
    MixedSizes,
    ShapeMismatch,
    EmptyDataset,
    EmptySample,
    NonFiniteLoss,
    NonFiniteState,
    DegenerateConfiguration,
    TooFewGraphs,
    TooLarge,
    InvalidGraph,
    InvalidArgument,
    IoError,
};

inline const char* to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::IsolatedNode: return "IsolatedNode";
        case ErrorCode::NotSymmetric: return "NotSymmetric";
        case ErrorCode::NegativeTime: return "NegativeTime";
        case ErrorCode::NegativeEntries: return "NegativeEntries";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::DimensionExceeded: return "DimensionExceeded";
        case ErrorCode::EmptyBatch: return "EmptyBatch";
        case ErrorCode::MixedSizes: return "MixedSizes";
        case ErrorCode::ShapeMismatch: return "ShapeMismatch";
        case ErrorCode::EmptyDataset: return "EmptyDataset";
        case ErrorCode::EmptySample: return "EmptySample";
        case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
        case ErrorCode::NonFiniteState: return "NonFiniteState";
        case ErrorCode::DegenerateConfiguration: return "DegenerateConfiguration";
        case ErrorCode::TooFewGraphs: return "TooFewGraphs";
        case ErrorCode::TooLarge: return "TooLarge";
        case ErrorCode::InvalidGraph: return "InvalidGraph";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

    // Numerical aborts map to process exit code 2, validation failures to 1.
    bool numerical_abort() const noexcept {
        return code_ == ErrorCode::NonFiniteLoss || code_ == ErrorCode::NonFiniteState;
    }

private:
    ErrorCode code_;
};

}  // namespace g3
