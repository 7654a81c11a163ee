#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "epsctl/sysmodel.hpp"

namespace epsctl {

struct AlphaPoint {
    double alpha = 0.0;
    std::optional<double> value;  // empty when infeasible at this alpha

    [[nodiscard]] bool feasible() const { return value.has_value(); }
};

struct AlphaCurve {
    std::vector<AlphaPoint> points;
};

struct EpsNormResult {
    double value = 0.0;
    double alpha_star = 0.0;
    // Set when the minimum sits at a guard-band edge, i.e. the minimum over
    // the open interval is an infimum that is not attained.
    bool boundary_minimum = false;
    AlphaCurve curve;
};

// Returns std::nullopt (or throws epsctl::Error) when alpha is infeasible.
using AlphaObjective = std::function<std::optional<double>(double)>;

struct SweepOptions {
    int grid_points = 199;
    double refine_tol = 1e-6;
    // Worker threads for grid evaluation; values < 1 mean one.
    int threads = 1;
};

// Guard band kept between sweep grids and the ends of the admissible interval.
inline constexpr double kAlphaGuard = 1e-4;

// Relative disagreement between tr(C P_alpha C') and tr(B' Q_alpha B) above
// which eps_alpha_norm reports DualityCheckFailed.
inline constexpr double kDualityTolerance = 1e-6;

/// sqrt(tr(C P_alpha C')), with D = 0 and rho(A) < 1.
///
/// When neither output nor input dimension dominates (within a factor 4)
/// the value is cross-checked against sqrt(tr(B' Q_alpha B)); otherwise the
/// path with the smaller weight rank is evaluated alone.
double eps_alpha_norm(const LtiSystem& S, double alpha);

// Evaluates `objective` at `points` equally spaced alphas on [lo, hi]
// (both ends included). Errors from the objective mark the point
// infeasible instead of aborting.
AlphaCurve alpha_sweep(const AlphaObjective& objective, double lo, double hi, int points, int threads = 1);

// Grid scan over [lo, hi] followed by golden-section refinement around the
// best grid point until the bracket is narrower than refine_tol.
EpsNormResult minimize_over_alpha(const AlphaObjective& objective, double lo, double hi,
                                  const SweepOptions& options = {});

// Golden-section search for a minimum of f on [a, b].
struct ScalarMinimum {
    double x = 0.0;
    double value = 0.0;
};
ScalarMinimum golden_section_minimize(const std::function<double(double)>& f, double a, double b, double tol);

// min over alpha in (rho^2(A) + 1e-4, 1 - 1e-4) of eps_alpha_norm(S, alpha).
EpsNormResult eps_norm(const LtiSystem& S, const SweepOptions& options = {});

}  // namespace epsctl
