#include "epsctl/error.hpp"

#include <sstream>

namespace epsctl {

std::string_view to_string(Errc code) {
    switch (code) {
    case Errc::NonSquare: return "NonSquare";
    case Errc::EigenFailure: return "EigenFailure";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::NonFinite: return "NonFinite";
    case Errc::UnstableF: return "UnstableF";
    case Errc::NonSymmetricW: return "NonSymmetricW";
    case Errc::AlphaOutOfRange: return "AlphaOutOfRange";
    case Errc::SingularLimit: return "SingularLimit";
    case Errc::NoStabilizingSolution: return "NoStabilizingSolution";
    case Errc::SingularInnerMatrix: return "SingularInnerMatrix";
    case Errc::UnstableSystem: return "UnstableSystem";
    case Errc::FeedthroughNotSupported: return "FeedthroughNotSupported";
    case Errc::DualityCheckFailed: return "DualityCheckFailed";
    case Errc::AllInfeasible: return "AllInfeasible";
    case Errc::BadInterval: return "BadInterval";
    case Errc::StructuralAssumptionViolated: return "StructuralAssumptionViolated";
    case Errc::SeparationCheckFailed: return "SeparationCheckFailed";
    case Errc::NotPositiveDefinite: return "NotPositiveDefinite";
    case Errc::BadSpec: return "BadSpec";
    case Errc::Overflow: return "Overflow";
    case Errc::BadPlane: return "BadPlane";
    case Errc::ParseError: return "ParseError";
    }
    return "Unknown";
}

Error::Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}

namespace {
std::string alpha_message(double alpha, double lo, double hi) {
    std::ostringstream os;
    os.precision(17);
    os << "alpha " << alpha << " outside admissible interval (" << lo << ", " << hi << ")";
    return os.str();
}
}  // namespace

AlphaRangeError::AlphaRangeError(double alpha, double lo, double hi)
    : Error(Errc::AlphaOutOfRange, alpha_message(alpha, lo, hi)), alpha_(alpha), lo_(lo), hi_(hi) {}

}  // namespace epsctl
