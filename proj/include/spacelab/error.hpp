#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

#include "json.hpp"

namespace spacelab {

enum class ErrorKind {
    CycleDetected,
    DuplicateName,
    SizeCap,
    ShapeMismatch,
    NotMonotone,
    NotALattice,
    NotDistributive,
    NotDLatHom,
    NotPrincipal,
    NotInflationary,
    NotIdempotent,
    NotJoinHom,
    NotMeetHom,
    NotDeflationary,
    SplitObstruction,
    AxiomFailure,
    UnitLawFailure,
    AssocFailure,
    NotEquivariant,
    GroupRequired,
    ConditionFailure,
    NotFound,
    SyntaxError,
    UnresolvedReference,
    LawViolation,
};

inline std::string_view to_string(ErrorKind kind)
{
    switch (kind) {
    case ErrorKind::CycleDetected: return "CycleDetected";
    case ErrorKind::DuplicateName: return "DuplicateName";
    case ErrorKind::SizeCap: return "SizeCap";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::NotMonotone: return "NotMonotone";
    case ErrorKind::NotALattice: return "NotALattice";
    case ErrorKind::NotDistributive: return "NotDistributive";
    case ErrorKind::NotDLatHom: return "NotDLatHom";
    case ErrorKind::NotPrincipal: return "NotPrincipal";
    case ErrorKind::NotInflationary: return "NotInflationary";
    case ErrorKind::NotIdempotent: return "NotIdempotent";
    case ErrorKind::NotJoinHom: return "NotJoinHom";
    case ErrorKind::NotMeetHom: return "NotMeetHom";
    case ErrorKind::NotDeflationary: return "NotDeflationary";
    case ErrorKind::SplitObstruction: return "SplitObstruction";
    case ErrorKind::AxiomFailure: return "AxiomFailure";
    case ErrorKind::UnitLawFailure: return "UnitLawFailure";
    case ErrorKind::AssocFailure: return "AssocFailure";
    case ErrorKind::NotEquivariant: return "NotEquivariant";
    case ErrorKind::GroupRequired: return "GroupRequired";
    case ErrorKind::ConditionFailure: return "ConditionFailure";
    case ErrorKind::NotFound: return "NotFound";
    case ErrorKind::SyntaxError: return "SyntaxError";
    case ErrorKind::UnresolvedReference: return "UnresolvedReference";
    case ErrorKind::LawViolation: return "LawViolation";
    }
    return "Unknown";
}

/// Base error for every failure raised by the library. Carries a machine
/// readable kind and an optional JSON witness naming the offending elements.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message, nlohmann::json witness = {})
        : std::runtime_error(std::string(to_string(kind)) + ": " + message)
        , kind_(kind)
        , witness_(std::move(witness))
    {
    }

    ErrorKind kind() const noexcept { return kind_; }
    const nlohmann::json& witness() const noexcept { return witness_; }

private:
    ErrorKind kind_;
    nlohmann::json witness_;
};

/// A reproducible counterexample to a statement the axioms assert about the
/// finite-poset model. These are never swallowed by the verifiers.
class TheoremViolation : public Error {
public:
    using Error::Error;
};

} // namespace spacelab
