#pragma once

#include "epsctl/sysmodel.hpp"

namespace epsctl {

struct RiccatiSolution {
    Matrix X;
    double residual = 0.0;  // Frobenius norm of the equation residual
    int iterations = 0;
};

// Solves F X F' - X + W = 0 by squaring: X <- X + F_k X F_k', F_k <- F_k^2.
// Requires rho(F) < 1 - 1e-12 and W symmetric. The result equals the series
// sum_i F^i W (F')^i and is refined until the residual is at most
// 1e-10 * (1 + ||X||_F).
Matrix solve_stein(const Matrix& F, const Matrix& W);

double stein_residual(const Matrix& F, const Matrix& W, const Matrix& X);

// (1/alpha) A P A' - P + (1/(1-alpha)) B B' = 0, for alpha in
// (rho^2(A), 1). Throws AlphaRangeError outside the interval and
// SingularLimit within 1e-10 of either end.
Matrix p_alpha(const Matrix& A, const Matrix& B, double alpha);

// (1/alpha) A' Q A - Q + (1/(1-alpha)) C' C = 0, same admissible interval.
Matrix q_alpha(const Matrix& A, const Matrix& C, double alpha);

// Reachable-set certificate {x | x' P^-1 x <= 1}.
EllipsoidCert solve_p_alpha(const Matrix& A, const Matrix& B, double alpha);

// Hardly-observable-set certificate {x | x' Q x <= 1}.
EllipsoidCert solve_q_alpha(const Matrix& A, const Matrix& C, double alpha);

// Throws unless alpha lies inside (rho2 + 1e-10, 1 - 1e-10).
void check_lyapunov_alpha(double alpha, double rho2);

/// Control-type scaled Riccati equation
///
///   (1/a) A'QB (B'QB + a/(1-a) D'D)^-1 B'QA - (1/a) A'QA + Q - C'C/(1-a) = 0
///
/// It is reduced to a standard discrete Riccati equation with state matrix
/// A/sqrt(a), state weight C'C/(1-a) and input weight a/(1-a) D'D, which is
/// then solved by structure-preserving doubling. When the input weight is
/// singular or an inner inverse is ill conditioned the solver falls back to
/// the Riccati difference recursion, switching to Newton (Hewer) steps once
/// the recursion produces a stabilizing gain.
///
/// alpha must lie in (1e-6, 1 - 1e-6).
RiccatiSolution solve_dare_control(const Matrix& A, const Matrix& B, const Matrix& C, const Matrix& D, double alpha);

/// Filter-type equation
///
///   (1/a) APC' (CPC' + a/(1-a) DD')^-1 CPA' - (1/a) APA' + P - BB'/(1-a) = 0
///
/// solved as the control equation of the transposed data.
RiccatiSolution solve_dare_filter(const Matrix& A, const Matrix& B, const Matrix& C, const Matrix& D, double alpha);

Matrix dare_control_residual(const Matrix& X, const Matrix& A, const Matrix& B, const Matrix& C, const Matrix& D,
                             double alpha);
Matrix dare_filter_residual(const Matrix& X, const Matrix& A, const Matrix& B, const Matrix& C, const Matrix& D,
                            double alpha);

}  // namespace epsctl
