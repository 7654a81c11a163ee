#include "epsctl/simkit.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Eigenvalues>

#include "epsctl/error.hpp"
#include "epsctl/solvers.hpp"

namespace epsctl {

namespace {

constexpr double kOverflowLimit = 1e15;
constexpr double kContainmentTol = 1e-6;

class UnitSampler {
public:
    explicit UnitSampler(std::uint64_t seed) : engine_(seed) {}

    // Uniform on [0, 1) from the top 53 bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    // Box-Muller; drawn in pairs, the second value is cached.
    double normal() {
        if (cached_) {
            const double v = *cached_;
            cached_.reset();
            return v;
        }
        double u1 = 0.0;
        while (u1 == 0.0) {
            u1 = uniform();
        }
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        cached_ = r * std::sin(2.0 * std::numbers::pi * u2);
        return r * std::cos(2.0 * std::numbers::pi * u2);
    }

    Vector on_sphere(int dim) {
        Vector v(dim);
        double norm = 0.0;
        while (norm == 0.0) {
            for (int i = 0; i < dim; ++i) {
                v(i) = normal();
            }
            norm = v.norm();
        }
        return v / norm;
    }

    Vector in_ball(int dim) { return on_sphere(dim) * std::pow(uniform(), 1.0 / dim); }

private:
    std::mt19937_64 engine_;
    std::optional<double> cached_;
};

void check_spec(const DisturbanceSpec& spec) {
    if (spec.steps <= 0 || spec.dim <= 0) {
        throw Error(Errc::BadSpec, "disturbance spec needs positive steps and dim");
    }
}

// Maximizer of |A x + B w|^2_{P^-1} over |w| <= 1, i.e. of w'Hw + 2g'w with
// H = B'P^-1B and g = B'P^-1Ax. The maximum lies on the sphere at
// w = (lambda I - H)^-1 g for the lambda >= lambda_max(H) giving |w| = 1.
Vector greedy_step(const Matrix& B, const Eigen::LLT<Matrix>& P_llt, const Eigen::SelfAdjointEigenSolver<Matrix>& H_eig,
                   const Vector& Ax) {
    const Vector& h = H_eig.eigenvalues();
    const Matrix& V = H_eig.eigenvectors();
    const Eigen::Index m = h.size();
    const Vector c = V.transpose() * (B.transpose() * P_llt.solve(Ax));
    const double h_max = h(m - 1);
    const double gap = 1e-12 * std::max(1.0, std::abs(h_max));

    double top_weight = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
        if (h(i) >= h_max - gap) {
            top_weight += c(i) * c(i);
        }
    }
    const auto coords = [&](double lambda) {
        Vector y(m);
        for (Eigen::Index i = 0; i < m; ++i) {
            y(i) = h(i) >= h_max - gap ? 0.0 : c(i) / (lambda - h(i));
        }
        return y;
    };
    const double g_norm = c.norm();
    if (top_weight <= 1e-30 * std::max(1.0, g_norm * g_norm)) {
        Vector y = coords(h_max);
        const double rest = y.squaredNorm();
        if (rest <= 1.0) {
            y(m - 1) = std::sqrt(1.0 - rest);
            return V * y;
        }
    }

    // |w(lambda)| decreases from infinity at lambda_max(H) to at most 1 at lambda_max(H) + |g|.
    double lo = h_max;
    double hi = h_max + g_norm;
    const auto norm_at = [&](double lambda) { return (c.array() / (lambda - h.array())).matrix().norm(); };
    for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) {
            break;
        }
        if (norm_at(mid) > 1.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Vector y = (c.array() / (hi - h.array())).matrix();
    return V * (y / y.norm());
}

}  // namespace

Sequence gen_disturbance(const DisturbanceSpec& spec) {
    check_spec(spec);
    Sequence w;
    w.reserve(static_cast<std::size_t>(spec.steps));
    UnitSampler sampler(spec.seed);
    for (int k = 0; k < spec.steps; ++k) {
        switch (spec.kind) {
        case DisturbanceKind::ExtremeSwitching:
            w.push_back(sampler.on_sphere(spec.dim));
            break;
        case DisturbanceKind::UniformBall:
            w.push_back(sampler.in_ball(spec.dim));
            break;
        case DisturbanceKind::Constant:
            w.push_back(Vector::Unit(spec.dim, 0));
            break;
        case DisturbanceKind::WorstCaseGreedy:
            throw Error(Errc::BadSpec, "greedy disturbances depend on the state; use simulate_disturbed");
        }
    }
    return w;
}

Trajectory simulate(const LtiSystem& S, const Sequence& w, const Vector& x0) {
    S.validate();
    if (x0.size() != S.states()) {
        throw Error(Errc::DimensionMismatch, "initial state has the wrong dimension");
    }
    const Matrix D = S.feedthrough();
    Trajectory t;
    t.states.reserve(w.size() + 1);
    t.outputs.reserve(w.size());
    t.disturbances = w;
    t.states.push_back(x0);
    for (const Vector& wk : w) {
        if (wk.size() != S.inputs()) {
            throw Error(Errc::DimensionMismatch, "disturbance sample has the wrong dimension");
        }
        const Vector& x = t.states.back();
        t.outputs.push_back(S.C * x + D * wk);
        Vector next = S.A * x + S.B * wk;
        if (!next.allFinite() || next.cwiseAbs().maxCoeff() > kOverflowLimit) {
            throw Error(Errc::Overflow, "state magnitude exceeded 1e15");
        }
        t.states.push_back(std::move(next));
    }
    return t;
}

Trajectory simulate_disturbed(const LtiSystem& S, const DisturbanceSpec& spec, const Vector& x0,
                              const std::optional<EllipsoidCert>& cert) {
    if (spec.kind != DisturbanceKind::WorstCaseGreedy) {
        return simulate(S, gen_disturbance(spec), x0);
    }
    check_spec(spec);
    S.validate();
    if (!cert || cert->kind != EllipsoidKind::Reachable || cert->shape.rows() != S.states()) {
        throw Error(Errc::BadSpec, "greedy disturbances need a reachable-set certificate of matching size");
    }
    if (spec.dim != S.inputs() || x0.size() != S.states()) {
        throw Error(Errc::DimensionMismatch, "disturbance or initial state dimension mismatch");
    }
    Eigen::LLT<Matrix> P_llt(cert->shape);
    if (P_llt.info() != Eigen::Success) {
        throw Error(Errc::NotPositiveDefinite, "certificate shape is not positive definite");
    }
    const Matrix BtPinvB = S.B.transpose() * P_llt.solve(S.B);
    const Eigen::SelfAdjointEigenSolver<Matrix> H_eig(BtPinvB);

    const Matrix D = S.feedthrough();
    Trajectory t;
    t.states.push_back(x0);
    for (int k = 0; k < spec.steps; ++k) {
        const Vector& x = t.states.back();
        const Vector Ax = S.A * x;
        Vector wk = greedy_step(S.B, P_llt, H_eig, Ax);
        t.outputs.push_back(S.C * x + D * wk);
        Vector next = Ax + S.B * wk;
        if (!next.allFinite() || next.cwiseAbs().maxCoeff() > kOverflowLimit) {
            throw Error(Errc::Overflow, "state magnitude exceeded 1e15");
        }
        t.disturbances.push_back(std::move(wk));
        t.states.push_back(std::move(next));
    }
    return t;
}

ContainmentStats containment_stats(const Trajectory& traj, const EllipsoidCert& cert) {
    if (cert.kind != EllipsoidKind::Reachable) {
        throw Error(Errc::BadSpec, "containment needs a reachable-set certificate");
    }
    Eigen::LLT<Matrix> P_llt(cert.shape);
    if (P_llt.info() != Eigen::Success) {
        throw Error(Errc::NotPositiveDefinite, "certificate shape is not positive definite");
    }
    ContainmentStats stats;
    for (const Vector& x : traj.states) {
        if (x.size() != cert.shape.rows()) {
            throw Error(Errc::DimensionMismatch, "state and certificate dimensions differ");
        }
        const double q = x.dot(P_llt.solve(x));
        stats.max_quadratic = std::max(stats.max_quadratic, q);
        if (q > 1.0 + kContainmentTol) {
            ++stats.violations;
        }
    }
    return stats;
}

double output_l1_norm(const LtiSystem& S, const Vector& x0, double tail_tol) {
    S.validate();
    if (x0.size() != S.states()) {
        throw Error(Errc::DimensionMismatch, "initial state has the wrong dimension");
    }
    const double rho = spectral_radius(S.A);
    if (rho >= 1.0) {
        throw Error(Errc::UnstableSystem, "output 1-norm needs rho(A) < 1");
    }
    if (x0.isZero(0.0)) {
        return 0.0;
    }
    const double g = 0.5 * (1.0 + rho);
    const auto n = S.states();
    const Matrix X = solve_stein(S.A.transpose() / g, Matrix::Identity(n, n));
    Eigen::LLT<Matrix> X_llt(X);
    // ||C X^{-1/2}||_2 with X = L L': C L^{-T}.
    const Matrix CLinvT = X_llt.matrixL().solve(S.C.transpose()).transpose();
    const double gain = CLinvT.operatorNorm() / (1.0 - g);

    double sum = 0.0;
    Vector x = x0;
    for (;;) {
        const double tail = gain * std::sqrt(std::max(0.0, x.dot(X * x)));
        if (tail < tail_tol) {
            return sum + tail;
        }
        sum += (S.C * x).norm();
        x = S.A * x;
    }
}

std::vector<Eigen::Vector2d> ellipsoid_boundary_points(const EllipsoidCert& cert, std::pair<int, int> plane,
                                                       int count) {
    const auto n = static_cast<int>(cert.shape.rows());
    const auto [i, j] = plane;
    if (n < 2 || i == j || i < 0 || j < 0 || i >= n || j >= n) {
        throw Error(Errc::BadPlane, "invalid projection plane");
    }
    if (count <= 0) {
        throw Error(Errc::BadSpec, "point count must be positive");
    }
    // Shape matrix S of the set {x | x' S^-1 x <= 1}; projections keep the
    // corresponding 2x2 block.
    Matrix S = cert.shape;
    if (cert.kind == EllipsoidKind::Observable) {
        Eigen::LLT<Matrix> llt(cert.shape);
        if (llt.info() != Eigen::Success) {
            throw Error(Errc::NotPositiveDefinite, "certificate shape is not positive definite");
        }
        S = llt.solve(Matrix::Identity(n, n));
    }
    Eigen::Matrix2d block;
    block << S(i, i), S(i, j), S(j, i), S(j, j);
    block = 0.5 * (block + block.transpose()).eval();
    Eigen::LLT<Eigen::Matrix2d> llt(block);
    if (llt.info() != Eigen::Success) {
        throw Error(Errc::NotPositiveDefinite, "projected shape is not positive definite");
    }
    const Eigen::Matrix2d L = llt.matrixL();

    std::vector<Eigen::Vector2d> points;
    points.reserve(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k) {
        const double theta = 2.0 * std::numbers::pi * k / count;
        points.emplace_back(L * Eigen::Vector2d(std::cos(theta), std::sin(theta)));
    }
    return points;
}

}  // namespace epsctl
