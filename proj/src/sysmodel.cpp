#include "epsctl/sysmodel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "epsctl/error.hpp"

namespace epsctl {

namespace {

std::string shape_of(const Matrix& M) {
    return std::to_string(M.rows()) + "x" + std::to_string(M.cols());
}

void expect_shape(const Matrix& M, Eigen::Index rows, Eigen::Index cols, const char* name) {
    if (M.rows() != rows || M.cols() != cols) {
        throw Error(Errc::DimensionMismatch, std::string(name) + " is " + shape_of(M) + ", expected " +
                                                 std::to_string(rows) + "x" + std::to_string(cols));
    }
}

void expect_rows(const Matrix& M, Eigen::Index rows, const char* name) {
    if (M.rows() != rows) {
        throw Error(Errc::DimensionMismatch,
                    std::string(name) + " has " + std::to_string(M.rows()) + " rows, expected " + std::to_string(rows));
    }
}

void expect_square(const Matrix& M, const char* name) {
    if (M.rows() != M.cols() || M.rows() == 0) {
        throw Error(Errc::DimensionMismatch, std::string(name) + " must be square and nonempty, got " + shape_of(M));
    }
}

template<typename Mat>
Eigen::Index rank_with_tolerance(const Mat& M) {
    if (M.size() == 0) {
        return 0;
    }
    Eigen::JacobiSVD<Mat> svd(M);
    const auto& s = svd.singularValues();
    if (s.size() == 0 || s(0) == 0.0) {
        return 0;
    }
    const double tol = s(0) * static_cast<double>(std::max(M.rows(), M.cols())) *
                       std::numeric_limits<double>::epsilon() * 64.0;
    Eigen::Index r = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        if (s(i) > tol) {
            ++r;
        }
    }
    return r;
}

// Smallest of the first `count` singular values over the largest; 0 when
// rank deficient in the exact sense.
template<typename Mat>
double conditioning_residual(const Mat& M, Eigen::Index count) {
    Eigen::JacobiSVD<Mat> svd(M);
    const auto& s = svd.singularValues();
    if (s.size() < count || s(0) == 0.0) {
        return 0.0;
    }
    return s(count - 1) / s(0);
}

Matrix krylov(const Matrix& A, const Matrix& B) {
    const Eigen::Index n = A.rows();
    Matrix K(n, n * B.cols());
    Matrix block = B;
    for (Eigen::Index i = 0; i < n; ++i) {
        K.middleCols(i * B.cols(), B.cols()) = block;
        block = A * block;
    }
    return K;
}

// Marginal modes are treated as unstable so that eigenvalues computed as
// 1 - O(eps) still get tested.
constexpr double kUnitCircleSlack = 1e-10;

double min_pbh_residual(const Matrix& A, const Matrix& B, bool* full_rank) {
    const Eigen::Index n = A.rows();
    Eigen::EigenSolver<Matrix> es(A, false);
    if (es.info() != Eigen::Success) {
        throw Error(Errc::EigenFailure, "eigenvalue iteration did not converge");
    }
    *full_rank = true;
    double worst = 1.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const std::complex<double> lambda = es.eigenvalues()(i);
        if (std::abs(lambda) < 1.0 - kUnitCircleSlack) {
            continue;
        }
        Eigen::MatrixXcd pencil(n, n + B.cols());
        pencil.leftCols(n) = lambda * Eigen::MatrixXcd::Identity(n, n) - A.cast<std::complex<double>>();
        pencil.rightCols(B.cols()) = B.cast<std::complex<double>>();
        if (rank_with_tolerance(pencil) < n) {
            *full_rank = false;
        }
        worst = std::min(worst, conditioning_residual(pencil, n));
    }
    return worst;
}

StructureCheck orthogonality(const std::string& name, const Matrix& product, const Matrix& left,
                             const Matrix& right) {
    const double tol = 1e-12 * (left.norm() * right.norm() + 1.0);
    const double residual = product.norm();
    return {name, residual <= tol, residual};
}

StructureCheck controllability(const std::string& name, const Matrix& A, const Matrix& B) {
    const Matrix K = krylov(A, B);
    return {name, rank_with_tolerance(K) == A.rows(), conditioning_residual(K, A.rows())};
}

StructureCheck stabilizability(const std::string& name, const Matrix& A, const Matrix& B) {
    bool full = true;
    const double residual = min_pbh_residual(A, B, &full);
    return {name, full, residual};
}

}  // namespace

void require_finite(const Matrix& M, const char* name) {
    if (!M.allFinite()) {
        throw Error(Errc::NonFinite, std::string(name) + " contains NaN or Inf");
    }
}

Matrix LtiSystem::feedthrough() const {
    if (D.size() == 0) {
        return Matrix::Zero(C.rows(), B.cols());
    }
    return D;
}

bool LtiSystem::strictly_proper() const {
    return D.size() == 0 || D.isZero(0.0);
}

void LtiSystem::validate() const {
    expect_square(A, "A");
    expect_rows(B, A.rows(), "B");
    expect_shape(C, C.rows(), A.rows(), "C");
    if (D.size() != 0) {
        expect_shape(D, C.rows(), B.cols(), "D");
    }
    require_finite(A, "A");
    require_finite(B, "B");
    require_finite(C, "C");
    require_finite(D, "D");
}

void StateFeedbackPlant::validate() const {
    expect_square(A, "A");
    const auto n = A.rows();
    expect_rows(B, n, "B");
    expect_rows(Bw, n, "Bw");
    expect_shape(C, C.rows(), n, "C");
    expect_shape(D, C.rows(), B.cols(), "D");
    for (const auto& [M, name] : {std::pair{&A, "A"}, {&B, "B"}, {&Bw, "Bw"}, {&C, "C"}, {&D, "D"}}) {
        require_finite(*M, name);
    }
}

void FilterPlant::validate() const {
    expect_square(A, "A");
    const auto n = A.rows();
    expect_rows(B, n, "B");
    expect_shape(C, C.rows(), n, "C");
    expect_shape(D, C.rows(), B.cols(), "D");
    expect_shape(Cz, Cz.rows(), n, "Cz");
    for (const auto& [M, name] : {std::pair{&A, "A"}, {&B, "B"}, {&C, "C"}, {&D, "D"}, {&Cz, "Cz"}}) {
        require_finite(*M, name);
    }
}

void OutputFeedbackPlant::validate() const {
    expect_square(A, "A");
    const auto n = A.rows();
    expect_rows(B1, n, "B1");
    expect_rows(B2, n, "B2");
    expect_shape(C1, C1.rows(), n, "C1");
    expect_shape(D1, C1.rows(), B1.cols(), "D1");
    expect_shape(C2, C2.rows(), n, "C2");
    expect_shape(D2, C2.rows(), B2.cols(), "D2");
    for (const auto& [M, name] : {std::pair{&A, "A"}, {&B1, "B1"}, {&B2, "B2"}, {&C1, "C1"}, {&D1, "D1"},
                                  {&C2, "C2"}, {&D2, "D2"}}) {
        require_finite(*M, name);
    }
}

bool EllipsoidCert::is_valid() const {
    if (shape.rows() != shape.cols() || shape.size() == 0 || !shape.allFinite()) {
        return false;
    }
    const double scale = std::max(1.0, shape.norm());
    if ((shape - shape.transpose()).norm() > 1e-12 * scale) {
        return false;
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(shape, Eigen::EigenvaluesOnly);
    return es.info() == Eigen::Success && es.eigenvalues().minCoeff() > 0.0;
}

bool ValidationReport::ok() const {
    return std::all_of(checks.begin(), checks.end(), [](const StructureCheck& c) { return c.passed; });
}

std::string ValidationReport::failures() const {
    std::ostringstream os;
    bool first = true;
    for (const auto& c : checks) {
        if (!c.passed) {
            os << (first ? "" : ", ") << c.name;
            first = false;
        }
    }
    return os.str();
}

double spectral_radius(const Matrix& M) {
    if (M.rows() != M.cols()) {
        throw Error(Errc::NonSquare, "spectral radius of a " + shape_of(M) + " matrix");
    }
    if (M.size() == 0) {
        return 0.0;
    }
    require_finite(M, "matrix");
    Eigen::EigenSolver<Matrix> es(M, false);
    if (es.info() != Eigen::Success) {
        throw Error(Errc::EigenFailure, "eigenvalue iteration did not converge");
    }
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

Eigen::Index numerical_rank(const Matrix& M) {
    return rank_with_tolerance(M);
}

bool is_controllable(const Matrix& A, const Matrix& B) {
    return rank_with_tolerance(krylov(A, B)) == A.rows();
}

bool is_observable(const Matrix& C, const Matrix& A) {
    return is_controllable(A.transpose(), C.transpose());
}

bool is_stabilizable(const Matrix& A, const Matrix& B) {
    bool full = true;
    min_pbh_residual(A, B, &full);
    return full;
}

bool is_detectable(const Matrix& C, const Matrix& A) {
    return is_stabilizable(A.transpose(), C.transpose());
}

ValidationReport validate_structure(const StateFeedbackPlant& plant) {
    plant.validate();
    const auto& [A, B, Bw, C, D] = plant;
    ValidationReport report;
    report.checks.push_back(orthogonality("C'D = 0", C.transpose() * D, C, D));
    report.checks.push_back(stabilizability("(A,B) stabilizable", A, B));
    report.checks.push_back(controllability("(C,A) observable", A.transpose(), C.transpose()));
    return report;
}

ValidationReport validate_structure(const FilterPlant& plant) {
    plant.validate();
    const auto& [A, B, C, D, Cz] = plant;
    ValidationReport report;
    report.checks.push_back(orthogonality("BD' = 0", B * D.transpose(), B, D));
    report.checks.push_back(stabilizability("(C,A) detectable", A.transpose(), C.transpose()));
    report.checks.push_back(controllability("(A,B) controllable", A, B));
    return report;
}

ValidationReport validate_structure(const OutputFeedbackPlant& plant) {
    plant.validate();
    const auto& [A, B1, B2, C1, D1, C2, D2] = plant;
    ValidationReport report;
    report.checks.push_back(orthogonality("B1 D1' = 0", B1 * D1.transpose(), B1, D1));
    report.checks.push_back(orthogonality("C2' D2 = 0", C2.transpose() * D2, C2, D2));
    report.checks.push_back(stabilizability("(A,B2) stabilizable", A, B2));
    report.checks.push_back(controllability("(C2,A) observable", A.transpose(), C2.transpose()));
    report.checks.push_back(stabilizability("(C1,A) detectable", A.transpose(), C1.transpose()));
    report.checks.push_back(controllability("(A,B1) controllable", A, B1));
    return report;
}

LtiSystem cl_state_feedback(const StateFeedbackPlant& plant, const Matrix& K) {
    plant.validate();
    expect_shape(K, plant.B.cols(), plant.A.rows(), "K");
    return {plant.A + plant.B * K, plant.Bw, plant.C + plant.D * K,
            Matrix::Zero(plant.C.rows(), plant.Bw.cols())};
}

LtiSystem cl_observer(const FilterPlant& plant, const Matrix& L) {
    plant.validate();
    expect_shape(L, plant.A.rows(), plant.C.rows(), "L");
    return {plant.A + L * plant.C, plant.B + L * plant.D, plant.Cz, Matrix::Zero(plant.Cz.rows(), plant.B.cols())};
}

LtiSystem cl_output_feedback(const OutputFeedbackPlant& plant, const Matrix& K, const Matrix& L) {
    plant.validate();
    const auto n = plant.A.rows();
    expect_shape(K, plant.B2.cols(), n, "K");
    expect_shape(L, n, plant.C1.rows(), "L");

    const Matrix B2K = plant.B2 * K;
    LtiSystem cl;
    cl.A = Matrix::Zero(2 * n, 2 * n);
    cl.A.topLeftCorner(n, n) = plant.A + B2K;
    cl.A.topRightCorner(n, n) = -B2K;
    cl.A.bottomRightCorner(n, n) = plant.A + L * plant.C1;

    cl.B.resize(2 * n, plant.B1.cols());
    cl.B.topRows(n) = plant.B1;
    cl.B.bottomRows(n) = plant.B1 + L * plant.D1;

    const Matrix D2K = plant.D2 * K;
    cl.C.resize(plant.C2.rows(), 2 * n);
    cl.C.leftCols(n) = plant.C2 + D2K;
    cl.C.rightCols(n) = -D2K;

    cl.D = Matrix::Zero(plant.C2.rows(), plant.B1.cols());
    return cl;
}

}  // namespace epsctl
