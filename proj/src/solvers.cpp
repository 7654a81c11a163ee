#include "epsctl/solvers.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include <Eigen/Eigenvalues>

#include "epsctl/error.hpp"

namespace epsctl {

namespace {

constexpr int kMaxDoublings = 200;
constexpr int kMaxRiccatiIterations = 10000;
constexpr int kMaxNewtonSteps = 60;
constexpr double kConditionLimit = 1e12;
constexpr double kRiccatiStepTol = 1e-13;
constexpr double kRiccatiResidualTol = 1e-9;

Matrix sym(const Matrix& X) {
    return 0.5 * (X + X.transpose());
}

// Partial sums of sum_i F^i W F'^i by repeated squaring.
Matrix stein_doubling(const Matrix& F, const Matrix& W) {
    Matrix X = W;
    Matrix Fk = F;
    for (int i = 0; i < kMaxDoublings; ++i) {
        const Matrix update = Fk * X * Fk.transpose();
        X = sym(X + update);
        if (update.norm() < 1e-14 * (1.0 + X.norm())) {
            break;
        }
        Fk = Fk * Fk;
    }
    return X;
}

double symmetric_condition(const Matrix& S) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(sym(S), Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) {
        return std::numeric_limits<double>::infinity();
    }
    const double lo = es.eigenvalues().minCoeff();
    const double hi = es.eigenvalues().maxCoeff();
    if (lo <= 0.0) {
        return std::numeric_limits<double>::infinity();
    }
    return hi / lo;
}

double general_condition(const Matrix& S) {
    Eigen::JacobiSVD<Matrix> svd(S);
    const auto& s = svd.singularValues();
    if (s.size() == 0) {
        return 1.0;
    }
    const double lo = s(s.size() - 1);
    return lo > 0.0 ? s(0) / lo : std::numeric_limits<double>::infinity();
}

// Standard-form data of the scaled control equation:
//   X = Ab' X Ab - Ab' X B (B' X B + R)^-1 B' X Ab + Q.
struct StandardDare {
    Matrix Ab;
    Matrix B;
    Matrix Q;
    Matrix R;

    [[nodiscard]] Matrix inner(const Matrix& X) const { return sym(B.transpose() * X * B + R); }

    [[nodiscard]] Matrix gain(const Matrix& X) const {
        return -inner(X).ldlt().solve(B.transpose() * X * Ab);
    }
};

struct Iterate {
    Matrix X;
    int iterations = 0;
};

std::optional<Iterate> structure_preserving_doubling(const StandardDare& p) {
    Eigen::LLT<Matrix> R_llt(p.R);
    if (p.R.size() == 0 || R_llt.info() != Eigen::Success || symmetric_condition(p.R) > kConditionLimit) {
        return std::nullopt;
    }
    const Eigen::Index n = p.Ab.rows();
    const Matrix I = Matrix::Identity(n, n);

    Matrix A_k = p.Ab;
    Matrix G_k = sym(p.B * R_llt.solve(p.B.transpose()));
    Matrix H_k = p.Q;
    for (int k = 1; k <= kMaxRiccatiIterations; ++k) {
        const Matrix W = I + G_k * H_k;
        Eigen::PartialPivLU<Matrix> W_lu(W);
        if (!(W_lu.rcond() * kConditionLimit >= 1.0)) {
            return std::nullopt;
        }
        const Matrix V1 = W_lu.solve(A_k);
        const Matrix V2 = W_lu.solve(G_k.transpose()).transpose();

        G_k = sym(G_k + A_k * V2 * A_k.transpose());
        const Matrix H_next = sym(H_k + V1.transpose() * H_k * A_k);
        A_k = A_k * V1;

        if (!H_next.allFinite() || !G_k.allFinite()) {
            return std::nullopt;
        }
        const double change = (H_next - H_k).norm();
        H_k = H_next;
        if (change < kRiccatiStepTol * (1.0 + H_k.norm())) {
            return Iterate{H_k, k};
        }
    }
    return std::nullopt;
}

// Hewer's iteration from a stabilizing gain; each step solves a closed-loop
// Stein equation.
Iterate newton_refine(const StandardDare& p, Matrix K, Matrix X, int iterations) {
    for (int step = 0; step < kMaxNewtonSteps; ++step) {
        const Matrix Acl = p.Ab + p.B * K;
        if (spectral_radius(Acl) >= 1.0 - 1e-12) {
            break;
        }
        const Matrix weight = sym(p.Q + K.transpose() * p.R * K);
        const Matrix X_next = solve_stein(Acl.transpose(), weight);
        ++iterations;
        const double change = (X_next - X).norm();
        X = X_next;
        K = p.gain(X);
        if (change < kRiccatiStepTol * (1.0 + X.norm())) {
            break;
        }
    }
    return {X, iterations};
}

Iterate riccati_recursion(const StandardDare& p) {
    const Eigen::Index n = p.Ab.rows();
    Matrix X = sym(p.Q + std::max(1.0, p.Q.norm()) * Matrix::Identity(n, n));
    for (int k = 1; k <= kMaxRiccatiIterations; ++k) {
        const Matrix S = p.inner(X);
        if (symmetric_condition(S) > kConditionLimit) {
            throw Error(Errc::SingularInnerMatrix, "B'XB + R is singular during the Riccati recursion");
        }
        const Matrix K = -S.ldlt().solve(p.B.transpose() * X * p.Ab);
        if (spectral_radius(p.Ab + p.B * K) < 1.0 - 1e-9) {
            return newton_refine(p, K, X, k);
        }
        const Matrix X_next = sym(p.Ab.transpose() * X * (p.Ab + p.B * K) + p.Q);
        if (!X_next.allFinite()) {
            throw Error(Errc::NoStabilizingSolution, "Riccati recursion diverged");
        }
        const double change = (X_next - X).norm();
        X = X_next;
        if (change < kRiccatiStepTol * (1.0 + X.norm())) {
            return {X, k};
        }
    }
    throw Error(Errc::NoStabilizingSolution, "Riccati recursion did not converge");
}

void check_riccati_alpha(double alpha) {
    constexpr double band = 1e-6;
    if (!(alpha > band && alpha < 1.0 - band)) {
        throw AlphaRangeError(alpha, band, 1.0 - band);
    }
}

void check_control_shapes(const Matrix& A, const Matrix& B, const Matrix& C, const Matrix& D) {
    if (A.rows() != A.cols() || A.rows() == 0 || B.rows() != A.rows() || C.cols() != A.rows() ||
        D.rows() != C.rows() || D.cols() != B.cols()) {
        throw Error(Errc::DimensionMismatch, "incompatible (A, B, C, D) dimensions for the Riccati equation");
    }
    require_finite(A, "A");
    require_finite(B, "B");
    require_finite(C, "C");
    require_finite(D, "D");
}

}  // namespace

double stein_residual(const Matrix& F, const Matrix& W, const Matrix& X) {
    return (F * X * F.transpose() - X + W).norm();
}

Matrix solve_stein(const Matrix& F, const Matrix& W) {
    if (F.rows() != F.cols() || W.rows() != F.rows() || W.cols() != F.cols()) {
        throw Error(Errc::DimensionMismatch, "Stein equation needs square F and W of equal size");
    }
    require_finite(F, "F");
    require_finite(W, "W");
    if ((W - W.transpose()).norm() > 1e-12 * std::max(1.0, W.norm())) {
        throw Error(Errc::NonSymmetricW, "Stein right-hand side is not symmetric");
    }
    const double rho = spectral_radius(F);
    if (rho >= 1.0 - 1e-12) {
        throw Error(Errc::UnstableF, "Stein equation needs rho(F) < 1, got " + std::to_string(rho));
    }

    Matrix X = stein_doubling(F, sym(W));
    // Iterative refinement on the residual equation.
    for (int pass = 0; pass < 3; ++pass) {
        const Matrix residual = sym(F * X * F.transpose() - X + W);
        if (residual.norm() <= 1e-13 * (1.0 + X.norm())) {
            break;
        }
        X = sym(X + stein_doubling(F, residual));
    }
    return X;
}

void check_lyapunov_alpha(double alpha, double rho2) {
    constexpr double band = 1e-10;
    if (!(alpha > rho2 && alpha < 1.0)) {
        throw AlphaRangeError(alpha, rho2, 1.0);
    }
    if (alpha <= rho2 + band || alpha >= 1.0 - band) {
        throw Error(Errc::SingularLimit, "alpha " + std::to_string(alpha) + " is within 1e-10 of the boundary of (" +
                                             std::to_string(rho2) + ", 1)");
    }
}

Matrix p_alpha(const Matrix& A, const Matrix& B, double alpha) {
    if (A.rows() != A.cols() || B.rows() != A.rows()) {
        throw Error(Errc::DimensionMismatch, "P_alpha needs A n x n and B n x m");
    }
    const double rho = spectral_radius(A);
    check_lyapunov_alpha(alpha, rho * rho);
    return solve_stein(A / std::sqrt(alpha), B * B.transpose() / (1.0 - alpha));
}

Matrix q_alpha(const Matrix& A, const Matrix& C, double alpha) {
    if (A.rows() != A.cols() || C.cols() != A.rows()) {
        throw Error(Errc::DimensionMismatch, "Q_alpha needs A n x n and C p x n");
    }
    return p_alpha(A.transpose(), C.transpose(), alpha);
}

EllipsoidCert solve_p_alpha(const Matrix& A, const Matrix& B, double alpha) {
    return {p_alpha(A, B, alpha), alpha, EllipsoidKind::Reachable};
}

EllipsoidCert solve_q_alpha(const Matrix& A, const Matrix& C, double alpha) {
    return {q_alpha(A, C, alpha), alpha, EllipsoidKind::Observable};
}

Matrix dare_control_residual(const Matrix& X, const Matrix& A, const Matrix& B, const Matrix& C, const Matrix& D,
                             double alpha) {
    const Matrix S = B.transpose() * X * B + (alpha / (1.0 - alpha)) * D.transpose() * D;
    const Matrix BXA = B.transpose() * X * A;
    return (BXA.transpose() * S.ldlt().solve(BXA) - A.transpose() * X * A) / alpha + X -
           C.transpose() * C / (1.0 - alpha);
}

Matrix dare_filter_residual(const Matrix& X, const Matrix& A, const Matrix& B, const Matrix& C, const Matrix& D,
                            double alpha) {
    return dare_control_residual(X.transpose(), A.transpose(), C.transpose(), B.transpose(), D.transpose(), alpha)
        .transpose();
}

RiccatiSolution solve_dare_control(const Matrix& A, const Matrix& B, const Matrix& C, const Matrix& D,
                                   double alpha) {
    check_control_shapes(A, B, C, D);
    check_riccati_alpha(alpha);

    StandardDare problem{A / std::sqrt(alpha), B, sym(C.transpose() * C / (1.0 - alpha)),
                         sym((alpha / (1.0 - alpha)) * D.transpose() * D)};

    std::optional<Iterate> result = structure_preserving_doubling(problem);
    if (!result) {
        result = riccati_recursion(problem);
    }
    Matrix X = result->X;
    int iterations = result->iterations;

    const Matrix S = problem.inner(X);
    if (general_condition(S) > kConditionLimit) {
        throw Error(Errc::SingularInnerMatrix, "B'QB + (a/(1-a)) D'D is singular at the solution");
    }
    Matrix K = problem.gain(X);
    if (spectral_radius(problem.Ab + problem.B * K) >= 1.0) {
        throw Error(Errc::NoStabilizingSolution, "Riccati iterate is not stabilizing");
    }

    double residual = dare_control_residual(X, A, B, C, D, alpha).norm();
    if (residual > 1e-11 * (1.0 + X.norm())) {
        auto polished = newton_refine(problem, K, X, iterations);
        const double polished_residual = dare_control_residual(polished.X, A, B, C, D, alpha).norm();
        if (polished_residual < residual) {
            X = polished.X;
            iterations = polished.iterations;
            residual = polished_residual;
        }
    }

    Eigen::SelfAdjointEigenSolver<Matrix> es(X, Eigen::EigenvaluesOnly);
    const double lambda_min = es.eigenvalues().minCoeff();
    const double lambda_max = es.eigenvalues().cwiseAbs().maxCoeff();
    if (es.info() != Eigen::Success || !(lambda_min > 1e-12 * lambda_max)) {
        throw Error(Errc::NoStabilizingSolution, "Riccati solution is not positive definite");
    }
    if (residual > kRiccatiResidualTol * (1.0 + X.norm())) {
        throw Error(Errc::NoStabilizingSolution, "Riccati residual " + std::to_string(residual) + " above tolerance");
    }
    return {X, residual, iterations};
}

RiccatiSolution solve_dare_filter(const Matrix& A, const Matrix& B, const Matrix& C, const Matrix& D,
                                  double alpha) {
    RiccatiSolution dual = solve_dare_control(A.transpose(), C.transpose(), B.transpose(), D.transpose(), alpha);
    dual.X.transposeInPlace();
    return dual;
}

}  // namespace epsctl
