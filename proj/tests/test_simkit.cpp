#include <cmath>

#include "doctest.h"
#include "epsctl/error.hpp"
#include "epsctl/simkit.hpp"
#include "epsctl/solvers.hpp"
#include "epsctl/synthesis.hpp"
#include "test_support.hpp"

using namespace epsctl;
using epsctl::testing::Generator;
using epsctl::testing::scalar;

namespace {

template<typename F>
Errc error_code(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an epsctl::Error");
    return Errc::ParseError;
}

LtiSystem scalar_system(double a, double b, double c) {
    return {scalar(a), scalar(b), scalar(c), Matrix()};
}

constexpr DisturbanceKind kRandomKinds[] = {DisturbanceKind::ExtremeSwitching, DisturbanceKind::UniformBall,
                                            DisturbanceKind::Constant};

}  // namespace

TEST_CASE("disturbance generators") {
    SUBCASE("constant is the first unit vector") {
        const Sequence w = gen_disturbance({DisturbanceKind::Constant, 7, 10, 2});
        REQUIRE(w.size() == 10);
        for (const auto& v : w) {
            CHECK(v(0) == 1.0);
            CHECK(v(1) == 0.0);
        }
    }
    SUBCASE("fixed seeds reproduce bit-identical sequences") {
        for (DisturbanceKind kind : kRandomKinds) {
            const Sequence a = gen_disturbance({kind, 42, 50, 3});
            const Sequence b = gen_disturbance({kind, 42, 50, 3});
            for (std::size_t k = 0; k < a.size(); ++k) {
                CHECK((a[k].array() == b[k].array()).all());
            }
        }
        const Sequence a = gen_disturbance({DisturbanceKind::UniformBall, 1, 5, 3});
        const Sequence b = gen_disturbance({DisturbanceKind::UniformBall, 2, 5, 3});
        CHECK((a[0] - b[0]).norm() > 0.0);
    }
    SUBCASE("samples stay in the unit ball") {
        for (int dim = 1; dim <= 4; ++dim) {
            for (const auto& v : gen_disturbance({DisturbanceKind::ExtremeSwitching, 3, 2000, dim})) {
                CHECK(std::abs(v.norm() - 1.0) <= 1e-15);
            }
            double largest = 0.0;
            double smallest = 2.0;
            for (const auto& v : gen_disturbance({DisturbanceKind::UniformBall, 3, 2000, dim})) {
                CHECK(v.norm() <= 1.0 + 1e-15);
                largest = std::max(largest, v.norm());
                smallest = std::min(smallest, v.norm());
            }
            CHECK(largest > 0.9);
            CHECK(smallest < 0.5);
        }
    }
    SUBCASE("uniform ball samples are centred") {
        Vector mean = Vector::Zero(2);
        const Sequence w = gen_disturbance({DisturbanceKind::UniformBall, 9, 20000, 2});
        for (const auto& v : w) {
            mean += v;
        }
        mean /= static_cast<double>(w.size());
        CHECK(mean.norm() < 0.02);
    }
    SUBCASE("bad specs") {
        CHECK(error_code([] { gen_disturbance({DisturbanceKind::UniformBall, 0, 0, 2}); }) == Errc::BadSpec);
        CHECK(error_code([] { gen_disturbance({DisturbanceKind::UniformBall, 0, 5, 0}); }) == Errc::BadSpec);
        CHECK(error_code([] { gen_disturbance({DisturbanceKind::WorstCaseGreedy, 0, 5, 1}); }) == Errc::BadSpec);
    }
}

TEST_CASE("simulation recursion") {
    const LtiSystem S = scalar_system(0.5, 1.0, 1.0);
    SUBCASE("constant input converges monotonically to the fixed point") {
        const Trajectory t = simulate(S, Sequence(60, Vector::Ones(1)), Vector::Zero(1));
        REQUIRE(t.states.size() == 61);
        REQUIRE(t.outputs.size() == 60);
        for (std::size_t k = 0; k + 1 < t.states.size(); ++k) {
            CHECK(t.states[k + 1](0) >= t.states[k](0));
            CHECK(t.states[k + 1](0) <= 2.0);
            CHECK(t.outputs[k](0) == t.states[k](0));
        }
        CHECK(t.states.back()(0) == doctest::Approx(2.0).epsilon(1e-15));
    }
    SUBCASE("zero input from the origin stays at zero") {
        const Trajectory t = simulate(S, Sequence(20, Vector::Zero(1)), Vector::Zero(1));
        for (const auto& x : t.states) {
            CHECK(x(0) == 0.0);
        }
    }
    SUBCASE("states follow the recursion exactly") {
        Generator gen(31);
        const LtiSystem R = gen.stable_system(3, 2, 2, 0.9);
        const Sequence w = gen_disturbance({DisturbanceKind::UniformBall, 5, 30, 2});
        const Trajectory t = simulate(R, w, Vector::Ones(3));
        for (std::size_t k = 0; k < w.size(); ++k) {
            const Vector next = R.A * t.states[k] + R.B * w[k];
            CHECK((next.array() == t.states[k + 1].array()).all());
        }
    }
    SUBCASE("errors") {
        CHECK(error_code([&] { simulate(scalar_system(2.0, 1.0, 1.0), Sequence(100, Vector::Ones(1)), Vector::Ones(1)); }) ==
              Errc::Overflow);
        CHECK(error_code([&] { simulate(S, Sequence(3, Vector::Ones(2)), Vector::Zero(1)); }) == Errc::DimensionMismatch);
        CHECK(error_code([&] { simulate(S, Sequence(3, Vector::Ones(1)), Vector::Zero(2)); }) == Errc::DimensionMismatch);
    }
}

TEST_CASE("containment statistics") {
    SUBCASE("zero trajectory") {
        const LtiSystem S = scalar_system(0.5, 1.0, 1.0);
        const Trajectory t = simulate(S, Sequence(10, Vector::Zero(1)), Vector::Zero(1));
        const ContainmentStats c = containment_stats(t, solve_p_alpha(S.A, S.B, 0.5));
        CHECK(c.max_quadratic == 0.0);
        CHECK(c.violations == 0);
    }
    SUBCASE("scalar tight case") {
        const LtiSystem S = scalar_system(0.5, 1.0, 1.0);
        const EllipsoidCert cert = solve_p_alpha(S.A, S.B, 0.5);
        const Trajectory t = simulate_disturbed(S, {DisturbanceKind::Constant, 0, 60, 1}, Vector::Zero(1));
        const ContainmentStats c = containment_stats(t, cert);
        CHECK(c.max_quadratic >= 0.999);
        CHECK(c.max_quadratic <= 1.0 + 1e-12);
        CHECK(c.violations == 0);
    }
    SUBCASE("random systems under every disturbance kind") {
        Generator gen(32);
        for (int trial = 0; trial < 10; ++trial) {
            const int n = gen.integer(1, 4);
            const int m = gen.integer(1, 2);
            const double rho = gen.uniform(0.2, 0.95);
            const LtiSystem S = gen.stable_system(n, m, 1, rho);
            const double alpha = gen.uniform(rho * rho + 0.01, 0.99);
            const EllipsoidCert cert = solve_p_alpha(S.A, S.B, alpha);
            for (DisturbanceKind kind : {DisturbanceKind::ExtremeSwitching, DisturbanceKind::UniformBall,
                                         DisturbanceKind::Constant, DisturbanceKind::WorstCaseGreedy}) {
                const DisturbanceSpec spec{kind, static_cast<std::uint64_t>(trial), 500, m};
                const Trajectory t = simulate_disturbed(S, spec, Vector::Zero(n), cert);
                CHECK(containment_stats(t, cert).violations == 0);
            }
        }
    }
    SUBCASE("certificate kind is checked") {
        const LtiSystem S = scalar_system(0.5, 1.0, 1.0);
        const Trajectory t = simulate(S, Sequence(3, Vector::Ones(1)), Vector::Zero(1));
        CHECK(error_code([&] { containment_stats(t, solve_q_alpha(S.A, S.C, 0.5)); }) == Errc::BadSpec);
    }
}

TEST_CASE("greedy disturbance maximizes the next-state functional at every step") {
    Generator gen(33);
    for (int trial = 0; trial < 10; ++trial) {
        const int n = gen.integer(1, 4);
        const int m = gen.integer(1, 3);
        const LtiSystem S = gen.stable_system(n, m, 1, 0.8);
        const EllipsoidCert cert = solve_p_alpha(S.A, S.B, 0.8);
        const Matrix Pinv = cert.shape.inverse();
        const auto functional = [&](const Vector& x) { return x.dot(Pinv * x); };
        const Vector x0 = gen.gaussian(n, 1);
        const Trajectory t = simulate_disturbed(S, {DisturbanceKind::WorstCaseGreedy, 0, 50, m}, x0, cert);
        const Sequence candidates = gen_disturbance({DisturbanceKind::UniformBall, 77, 40, m});
        for (std::size_t k = 0; k < t.disturbances.size(); ++k) {
            CHECK(t.disturbances[k].norm() == doctest::Approx(1.0).epsilon(1e-12));
            const double chosen = functional(t.states[k + 1]);
            const Vector Ax = S.A * t.states[k];
            for (const auto& w : candidates) {
                CHECK(chosen >= functional(Ax + S.B * w) - 1e-10 * (1.0 + chosen));
            }
            for (Eigen::Index j = 0; j < m; ++j) {
                for (double sign : {-1.0, 1.0}) {
                    CHECK(chosen >= functional(Ax + sign * S.B.col(j)) - 1e-10 * (1.0 + chosen));
                }
            }
        }
    }
}

TEST_CASE("greedy disturbance with a scalar input is the sign of the gradient") {
    const LtiSystem S{(Matrix(2, 2) << 0.5, 0.2, -0.1, 0.3).finished(), (Matrix(2, 1) << 1.0, 0.5).finished(),
                      Matrix::Identity(2, 2), Matrix()};
    const EllipsoidCert cert = solve_p_alpha(S.A, S.B, 0.6);
    const Trajectory t = simulate_disturbed(S, {DisturbanceKind::WorstCaseGreedy, 0, 30, 1},
                                            (Vector(2) << 0.3, -0.7).finished(), cert);
    const Matrix Pinv = cert.shape.inverse();
    for (std::size_t k = 0; k < t.disturbances.size(); ++k) {
        const double g = (S.B.transpose() * Pinv * S.A * t.states[k])(0);
        if (std::abs(g) > 1e-12) {
            CHECK(t.disturbances[k](0) == (g > 0.0 ? 1.0 : -1.0));
        }
    }
    CHECK(containment_stats(simulate_disturbed(S, {DisturbanceKind::WorstCaseGreedy, 0, 200, 1}, Vector::Zero(2), cert),
                            cert)
              .violations == 0);
    CHECK(error_code([&] { simulate_disturbed(S, {DisturbanceKind::WorstCaseGreedy, 0, 5, 1}, Vector::Zero(2)); }) ==
          Errc::BadSpec);
}

TEST_CASE("output 1-norm") {
    const LtiSystem S = scalar_system(0.5, 1.0, 1.0);
    const double two = output_l1_norm(S, Vector::Ones(1));
    CHECK(two >= 2.0);
    CHECK(two <= 2.0 + 1e-12 + 1e-15);
    CHECK(output_l1_norm(S, Vector::Zero(1)) == 0.0);

    const EllipsoidCert q = solve_q_alpha(S.A, S.C, 0.5);
    CHECK(q.shape(0, 0) == doctest::Approx(4.0).epsilon(1e-14));
    CHECK(std::abs(output_l1_norm(S, Vector::Constant(1, 0.5)) - 1.0) <= 1e-9);

    SUBCASE("matches long explicit sums on random systems") {
        Generator gen(34);
        for (int trial = 0; trial < 10; ++trial) {
            const LtiSystem R = gen.stable_system(gen.integer(1, 4), 1, gen.integer(1, 3), gen.uniform(0.0, 0.9));
            const Vector x0 = gen.gaussian(R.states(), 1);
            double explicit_sum = 0.0;
            Vector x = x0;
            for (int k = 0; k < 2000; ++k) {
                explicit_sum += (R.C * x).norm();
                x = R.A * x;
            }
            const double certified = output_l1_norm(R, x0);
            CHECK(certified >= explicit_sum - 1e-12 * (1.0 + explicit_sum));
            CHECK(certified <= explicit_sum + 1e-10 * (1.0 + explicit_sum));
        }
    }
    SUBCASE("hardly observable inner approximation") {
        Generator gen(35);
        for (int trial = 0; trial < 10; ++trial) {
            const int n = gen.integer(1, 4);
            const double rho = gen.uniform(0.1, 0.95);
            const LtiSystem R = gen.stable_system(n, 1, gen.integer(1, 3), rho);
            const double alpha = gen.uniform(rho * rho + 0.01, 0.99);
            const Matrix Q = solve_q_alpha(R.A, R.C, alpha).shape;
            for (int k = 0; k < 20; ++k) {
                Vector x0 = gen.gaussian(n, 1);
                x0 /= std::sqrt(x0.dot(Q * x0));
                if (k % 2 == 1) {
                    x0 *= gen.uniform(0.0, 1.0);
                }
                CHECK(output_l1_norm(R, x0) <= 1.0 + 1e-6);
            }
        }
    }
    CHECK(error_code([] { output_l1_norm(scalar_system(1.0, 1.0, 1.0), Vector::Ones(1)); }) == Errc::UnstableSystem);
}

TEST_CASE("ellipse boundary points") {
    SUBCASE("unit circle") {
        const EllipsoidCert cert{Matrix::Identity(2, 2), 0.5, EllipsoidKind::Reachable};
        const auto pts = ellipsoid_boundary_points(cert, {0, 1}, 64);
        REQUIRE(pts.size() == 64);
        for (const auto& p : pts) {
            CHECK(p.norm() == doctest::Approx(1.0).epsilon(1e-14));
        }
    }
    SUBCASE("axis-aligned ellipse") {
        Matrix shape = Matrix::Zero(2, 2);
        shape.diagonal() << 4.0, 1.0;
        const auto pts = ellipsoid_boundary_points({shape, 0.5, EllipsoidKind::Reachable}, {0, 1}, 400);
        double widest = 0.0;
        double tallest = 0.0;
        for (const auto& p : pts) {
            CHECK(p(0) * p(0) / 4.0 + p(1) * p(1) == doctest::Approx(1.0).epsilon(1e-13));
            widest = std::max(widest, std::abs(p(0)));
            tallest = std::max(tallest, std::abs(p(1)));
        }
        CHECK(widest == doctest::Approx(2.0).epsilon(1e-3));
        CHECK(tallest == doctest::Approx(1.0).epsilon(1e-3));

        const auto inner = ellipsoid_boundary_points({shape, 0.5, EllipsoidKind::Observable}, {0, 1}, 100);
        for (const auto& p : inner) {
            CHECK(4.0 * p(0) * p(0) + p(1) * p(1) == doctest::Approx(1.0).epsilon(1e-13));
        }
    }
    SUBCASE("projection of a three-dimensional ellipsoid") {
        Generator gen(36);
        const Matrix G = gen.gaussian(3, 3);
        const Matrix shape = G * G.transpose() + 0.1 * Matrix::Identity(3, 3);
        const Matrix sub = (Matrix(2, 2) << shape(0, 0), shape(0, 2), shape(2, 0), shape(2, 2)).finished();
        const Matrix sub_inv = sub.inverse();
        for (const auto& p : ellipsoid_boundary_points({shape, 0.5, EllipsoidKind::Reachable}, {0, 2}, 50)) {
            const Eigen::Vector2d v = p;
            CHECK(v.dot(sub_inv * v) == doctest::Approx(1.0).epsilon(1e-12));
        }
        CHECK(std::abs(ellipsoid_boundary_points({shape, 0.5, EllipsoidKind::Reachable}, {0, 2}, 200)
                           .front()(0)) <= std::sqrt(shape(0, 0)) + 1e-12);
    }
    SUBCASE("invalid requests") {
        const EllipsoidCert cert{Matrix::Identity(3, 3), 0.5, EllipsoidKind::Reachable};
        CHECK(error_code([&] { ellipsoid_boundary_points(cert, {0, 0}, 10); }) == Errc::BadPlane);
        CHECK(error_code([&] { ellipsoid_boundary_points(cert, {0, 3}, 10); }) == Errc::BadPlane);
        CHECK(error_code([&] { ellipsoid_boundary_points(cert, {-1, 1}, 10); }) == Errc::BadPlane);
        CHECK(error_code([&] { ellipsoid_boundary_points(cert, {0, 1}, 0); }) == Errc::BadSpec);
    }
}

TEST_CASE("example closed loop stays inside its certificate") {
    const OutputFeedbackPlant p = epsctl::testing::example_plant();
    const OutputFeedbackResult r = synth_output_feedback(p, 0.4337);
    const LtiSystem& S = r.result.closed_loop;
    const EllipsoidCert cert = solve_p_alpha(S.A, S.B, 0.4337);
    for (DisturbanceKind kind : {DisturbanceKind::ExtremeSwitching, DisturbanceKind::UniformBall,
                                 DisturbanceKind::Constant, DisturbanceKind::WorstCaseGreedy}) {
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            const Trajectory t = simulate_disturbed(S, {kind, seed, 2000, 2}, Vector::Zero(4), cert);
            CHECK(containment_stats(t, cert).violations == 0);
        }
    }
}
