#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace salab {

enum class ErrorKind {
    InvalidArgument,
    NearSingular,
    ContourTooClose,
    NoConvergence,
    GapViolation,
    DimensionMismatch,
    StepUnderflow,
    NonFinite,
    OrderTooHigh,
    GapClosed,
    GridTooCoarse,
    InsufficientData,
    DegenerateData,
    PhaseOverflow,
    VerdictConflict,
    NotNilpotent,
    DegenerateParams,
    WrongSignParams,
    Config,
};

std::string_view to_string(ErrorKind kind);

// All library failures are reported through this type; `kind()` is the
// machine-readable tag the CLI maps onto exit codes.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
    throw Error(kind, message);
}

inline void require(bool condition, const std::string& message) {
    if (!condition) {
        fail(ErrorKind::InvalidArgument, message);
    }
}

} // namespace salab
