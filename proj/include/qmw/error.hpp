#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qmw {

enum class ErrorKind {
    AxiomViolation,
    DegenerateSpace,
    BadParams,
    BadDelta,
    OrderViolation,
    NonSquare,
    NotPositiveDefinite,
    NoConvergence,
    DimensionMismatch,
    RankDeficiency,
    ZeroBallMass,
    BadExponent,
    IncompleteSigns,
    TooLarge,
    DeltaTooLarge,
    MissingArtifact,
    BadFormat,
};

constexpr std::string_view to_string(ErrorKind kind) noexcept
{
    switch (kind) {
    case ErrorKind::AxiomViolation: return "AxiomViolation";
    case ErrorKind::DegenerateSpace: return "DegenerateSpace";
    case ErrorKind::BadParams: return "BadParams";
    case ErrorKind::BadDelta: return "BadDelta";
    case ErrorKind::OrderViolation: return "OrderViolation";
    case ErrorKind::NonSquare: return "NonSquare";
    case ErrorKind::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::RankDeficiency: return "RankDeficiency";
    case ErrorKind::ZeroBallMass: return "ZeroBallMass";
    case ErrorKind::BadExponent: return "BadExponent";
    case ErrorKind::IncompleteSigns: return "IncompleteSigns";
    case ErrorKind::TooLarge: return "TooLarge";
    case ErrorKind::DeltaTooLarge: return "DeltaTooLarge";
    case ErrorKind::MissingArtifact: return "MissingArtifact";
    case ErrorKind::BadFormat: return "BadFormat";
    }
    return "Unknown";
}

/// Library-wide exception; `kind()` identifies the failure class.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind)
    {
    }

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

} // namespace qmw
