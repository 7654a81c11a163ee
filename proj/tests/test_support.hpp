#pragma once

// Test-only oracles and random instance generators. Nothing here calls the
// doubling or Riccati solvers under test.

#include <cmath>
#include <functional>
#include <limits>
#include <random>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "epsctl/sysmodel.hpp"

namespace epsctl::testing {

inline double radius(const Matrix& M) {
    return Eigen::EigenSolver<Matrix>(M, false).eigenvalues().cwiseAbs().maxCoeff();
}

// sum_{i} alpha^-i / (1 - alpha) A^i B B' A'^i, stopped when the term norm
// drops below term_tol or after max_terms terms.
inline Matrix series_p_alpha(const Matrix& A, const Matrix& B, double alpha, int max_terms = 100000,
                             double term_tol = 1e-14) {
    const Matrix F = A / std::sqrt(alpha);
    Matrix term_left = B;
    Matrix sum = Matrix::Zero(A.rows(), A.rows());
    for (int i = 0; i < max_terms; ++i) {
        const Matrix term = term_left * term_left.transpose() / (1.0 - alpha);
        sum += term;
        if (term.norm() < term_tol) {
            break;
        }
        term_left = F * term_left;
    }
    return sum;
}

inline Matrix series_q_alpha(const Matrix& A, const Matrix& C, double alpha, int max_terms = 100000) {
    return series_p_alpha(A.transpose(), C.transpose(), alpha, max_terms);
}

// Riccati difference iteration for the control-type equation
//   Q = (1/a) A'QA - (1/a) A'QB (B'QB + a/(1-a) D'D)^-1 B'QA + C'C/(1-a),
// written in closed-loop form with As = A/sqrt(a) and started from C'C/(1-a) + I.
inline Matrix riccati_fixed_point(const Matrix& A, const Matrix& B, const Matrix& C, const Matrix& D, double alpha,
                                  int iterations = 100000) {
    const Eigen::Index n = A.rows();
    const Matrix weight = C.transpose() * C / (1.0 - alpha);
    const Matrix Rw = (alpha / (1.0 - alpha)) * D.transpose() * D;
    const Matrix As = A / std::sqrt(alpha);
    Matrix Q = weight + Matrix::Identity(n, n);
    for (int k = 0; k < iterations; ++k) {
        const Matrix inner = B.transpose() * Q * B + Rw;
        const Matrix K = -inner.completeOrthogonalDecomposition().solve(B.transpose() * Q * As);
        const Matrix Acl = As + B * K;
        Matrix next = Acl.transpose() * Q * Acl + K.transpose() * Rw * K + weight;
        next = 0.5 * (next + next.transpose());
        const double change = (next - Q).norm();
        Q = next;
        if (change < 1e-13 * (1.0 + Q.norm())) {
            break;
        }
    }
    return Q;
}

struct GridMinimum {
    double x = 0.0;
    double value = std::numeric_limits<double>::infinity();
};

inline GridMinimum dense_grid_minimum(const std::function<double(double)>& f, double lo, double hi, int points) {
    GridMinimum best;
    for (int i = 0; i < points; ++i) {
        const double x = lo + (hi - lo) * i / (points - 1);
        const double v = f(x);
        if (v < best.value) {
            best = {x, v};
        }
    }
    return best;
}

// eps(alpha)-norm by direct series summation of tr(C P C').
inline double series_eps_alpha(const LtiSystem& S, double alpha) {
    const Matrix P = series_p_alpha(S.A, S.B, alpha);
    return std::sqrt((S.C * P * S.C.transpose()).trace());
}

// Series connection S2 S1 (S1's output drives S2's input).
inline LtiSystem series(const LtiSystem& S1, const LtiSystem& S2) {
    const auto n1 = S1.states();
    const auto n2 = S2.states();
    LtiSystem s;
    s.A = Matrix::Zero(n1 + n2, n1 + n2);
    s.A.topLeftCorner(n1, n1) = S1.A;
    s.A.bottomLeftCorner(n2, n1) = S2.B * S1.C;
    s.A.bottomRightCorner(n2, n2) = S2.A;
    s.B = Matrix::Zero(n1 + n2, S1.inputs());
    s.B.topRows(n1) = S1.B;
    s.C.resize(S2.outputs(), n1 + n2);
    s.C.leftCols(n1) = S2.feedthrough() * S1.C;
    s.C.rightCols(n2) = S2.C;
    s.D = Matrix::Zero(S2.outputs(), S1.inputs());
    return s;
}

class Generator {
public:
    explicit Generator(std::uint64_t seed) : rng_(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

    Matrix gaussian(Eigen::Index rows, Eigen::Index cols) {
        std::normal_distribution<double> nd(0.0, 1.0);
        Matrix M(rows, cols);
        for (Eigen::Index i = 0; i < M.size(); ++i) {
            M.data()[i] = nd(rng_);
        }
        return M;
    }

    // Random A rescaled to the given spectral radius.
    Matrix with_radius(Eigen::Index n, double rho) {
        Matrix A = gaussian(n, n);
        const double r = radius(A);
        return r > 0.0 ? Matrix(A * (rho / r)) : A;
    }

    LtiSystem stable_system(Eigen::Index n, Eigen::Index m, Eigen::Index p, double rho) {
        return {with_radius(n, rho), gaussian(n, m), gaussian(p, n), Matrix()};
    }

    // C = [Ca; 0], D = [0; Db] so that C'D = 0 holds exactly.
    StateFeedbackPlant state_feedback_plant(Eigen::Index n, Eigen::Index m, Eigen::Index mw, Eigen::Index pc,
                                            double rho) {
        StateFeedbackPlant p;
        p.A = with_radius(n, rho);
        p.B = gaussian(n, m);
        p.Bw = gaussian(n, mw);
        p.C = Matrix::Zero(pc + m, n);
        p.C.topRows(pc) = gaussian(pc, n);
        p.D = Matrix::Zero(pc + m, m);
        p.D.bottomRows(m) = gaussian(m, m);
        return p;
    }

    // B = [Ba, 0], D = [0, Db] so that BD' = 0 holds exactly.
    FilterPlant filter_plant(Eigen::Index n, Eigen::Index mb, Eigen::Index p, Eigen::Index pz, double rho) {
        FilterPlant f;
        f.A = with_radius(n, rho);
        f.B = Matrix::Zero(n, mb + p);
        f.B.leftCols(mb) = gaussian(n, mb);
        f.C = gaussian(p, n);
        f.D = Matrix::Zero(p, mb + p);
        f.D.rightCols(p) = gaussian(p, p);
        f.Cz = gaussian(pz, n);
        return f;
    }

    // Disturbance channels split between process (B1) and sensor (D1) noise,
    // regulated output split between state (C2) and input (D2) penalties.
    // When singular_sensor is set, one measured channel is noise free so
    // D1 D1' is singular.
    OutputFeedbackPlant output_feedback_plant(Eigen::Index n, Eigen::Index m, Eigen::Index p, double rho,
                                              bool singular_sensor = false) {
        OutputFeedbackPlant o;
        const Eigen::Index mw = n;
        const Eigen::Index noisy = singular_sensor && p > 1 ? p - 1 : p;
        o.A = with_radius(n, rho);
        o.B1 = Matrix::Zero(n, mw + noisy);
        o.B1.leftCols(mw) = gaussian(n, mw);
        o.B2 = gaussian(n, m);
        o.C1 = gaussian(p, n);
        o.D1 = Matrix::Zero(p, mw + noisy);
        o.D1.bottomRightCorner(noisy, noisy) = gaussian(noisy, noisy);
        o.C2 = Matrix::Zero(n + m, n);
        o.C2.topRows(n) = gaussian(n, n);
        o.D2 = Matrix::Zero(n + m, m);
        o.D2.bottomRows(m) = gaussian(m, m);
        return o;
    }

    std::mt19937_64& engine() { return rng_; }

private:
    std::mt19937_64 rng_;
};

inline OutputFeedbackPlant example_plant() {
    OutputFeedbackPlant p;
    p.A.resize(2, 2);
    p.A << 0, 1, -1, 0;
    p.B1.resize(2, 2);
    p.B1 << 8, 0, 8, 0;
    p.B2.resize(2, 1);
    p.B2 << 4, 8;
    p.C1.resize(2, 2);
    p.C1 << 2, 0, -6, -2;
    p.D1.resize(2, 2);
    p.D1 << 0, 0, 0, 2;
    p.C2.resize(3, 2);
    p.C2 << 8, 6, 6, -4, 0, 0;
    p.D2.resize(3, 1);
    p.D2 << 0, 0, 4;
    return p;
}

inline Matrix scalar(double v) {
    return Matrix::Constant(1, 1, v);
}

}  // namespace epsctl::testing
