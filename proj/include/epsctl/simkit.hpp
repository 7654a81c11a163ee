#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "epsctl/sysmodel.hpp"

namespace epsctl {

// Name of the pseudo-random generator behind every disturbance sequence.
// Samples are built from its raw 64-bit output only, so sequences are
// reproducible wherever the standard library's mt19937_64 is.
inline constexpr std::string_view kRngName = "mt19937_64";

enum class DisturbanceKind {
    ExtremeSwitching,  // uniform on the unit sphere each step
    UniformBall,       // uniform in the unit ball
    Constant,          // e_1 every step
    WorstCaseGreedy,   // maximizes the next-state ellipsoid functional
};

struct DisturbanceSpec {
    DisturbanceKind kind = DisturbanceKind::UniformBall;
    std::uint64_t seed = 0;
    int steps = 0;
    int dim = 0;
};

using Sequence = std::vector<Vector>;

struct Trajectory {
    Sequence states;        // steps + 1 entries
    Sequence outputs;       // steps entries
    Sequence disturbances;  // steps entries
};

struct ContainmentStats {
    double max_quadratic = 0.0;
    int violations = 0;
};

// Every sample satisfies |w_k| <= 1. WorstCaseGreedy depends on the state
// and is only available through simulate_disturbed; asking for it here
// throws BadSpec.
Sequence gen_disturbance(const DisturbanceSpec& spec);

// x_{k+1} = A x_k + B w_k,  y_k = C x_k + D w_k. Throws Overflow once any
// state component exceeds 1e15 in magnitude.
Trajectory simulate(const LtiSystem& S, const Sequence& w, const Vector& x0);

// Simulates under any disturbance kind. WorstCaseGreedy needs a Reachable
// certificate and at each step picks the w_k in the unit ball maximizing
// x_{k+1}' P^-1 x_{k+1}. For scalar disturbances this is the sign of
// B' P^-1 A x_k.
Trajectory simulate_disturbed(const LtiSystem& S, const DisturbanceSpec& spec, const Vector& x0,
                              const std::optional<EllipsoidCert>& cert = std::nullopt);

// max_k x_k' P^-1 x_k over all states, and how many exceed 1 + 1e-6.
ContainmentStats containment_stats(const Trajectory& traj, const EllipsoidCert& cert);

/// Free-response output 1-norm sum_k |C A^k x0|.
///
/// The remaining tail after step k is bounded in the norm induced by
/// X = sum_i (A'/g)^i (A/g)^i with g = (1 + rho(A)) / 2, in which A
/// contracts by at least g per step:
///   sum_{j>=k} |C x_j| <= ||C X^{-1/2}|| ||x_k||_X / (1 - g).
/// Summation stops once that bound is below tail_tol, and the bound is
/// added to the partial sum, so the result is an upper bound on the exact
/// value and exceeds it by at most tail_tol.
double output_l1_norm(const LtiSystem& S, const Vector& x0, double tail_tol = 1e-12);

// Points on the boundary of the projection of the certificate ellipsoid onto
// coordinates (plane.first, plane.second).
std::vector<Eigen::Vector2d> ellipsoid_boundary_points(const EllipsoidCert& cert, std::pair<int, int> plane,
                                                       int count);

}  // namespace epsctl
