#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace epsctl {

enum class Errc {
    NonSquare,
    EigenFailure,
    DimensionMismatch,
    NonFinite,
    UnstableF,
    NonSymmetricW,
    AlphaOutOfRange,
    SingularLimit,
    NoStabilizingSolution,
    SingularInnerMatrix,
    UnstableSystem,
    FeedthroughNotSupported,
    DualityCheckFailed,
    AllInfeasible,
    BadInterval,
    StructuralAssumptionViolated,
    SeparationCheckFailed,
    NotPositiveDefinite,
    BadSpec,
    Overflow,
    BadPlane,
    ParseError,
};

std::string_view to_string(Errc code);

// Every failure raised by the library carries one of the codes above so
// callers (the CLI in particular) can map it to a stable exit status.
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what);

    [[nodiscard]] Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

// AlphaOutOfRange with the admissible open interval attached.
class AlphaRangeError : public Error {
public:
    AlphaRangeError(double alpha, double lo, double hi);

    [[nodiscard]] double alpha() const noexcept { return alpha_; }
    [[nodiscard]] double lower() const noexcept { return lo_; }
    [[nodiscard]] double upper() const noexcept { return hi_; }

private:
    double alpha_;
    double lo_;
    double hi_;
};

}  // namespace epsctl
