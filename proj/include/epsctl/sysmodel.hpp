#pragma once

#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace epsctl {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// x_{k+1} = A x_k + B u_k,  y_k = C x_k + D u_k.
// An empty D is read as the p x m zero matrix.
struct LtiSystem {
    Matrix A;
    Matrix B;
    Matrix C;
    Matrix D;

    [[nodiscard]] Eigen::Index states() const { return A.rows(); }
    [[nodiscard]] Eigen::Index inputs() const { return B.cols(); }
    [[nodiscard]] Eigen::Index outputs() const { return C.rows(); }

    // D with the empty case expanded to zeros.
    [[nodiscard]] Matrix feedthrough() const;
    [[nodiscard]] bool strictly_proper() const;

    // Throws DimensionMismatch / NonFinite.
    void validate() const;
};

// x+ = A x + B u + Bw w,  z = C x + D u,  u = K x.
struct StateFeedbackPlant {
    Matrix A;
    Matrix B;
    Matrix Bw;
    Matrix C;
    Matrix D;

    void validate() const;
};

// x+ = A x + B w,  y = C x + D w,  observer error output z = Cz (x - xhat).
struct FilterPlant {
    Matrix A;
    Matrix B;
    Matrix C;
    Matrix D;
    Matrix Cz;

    void validate() const;
};

// x+ = A x + B1 w + B2 u,  y = C1 x + D1 w,  z = C2 x + D2 u.
struct OutputFeedbackPlant {
    Matrix A;
    Matrix B1;
    Matrix B2;
    Matrix C1;
    Matrix D1;
    Matrix C2;
    Matrix D2;

    void validate() const;
};

using SynthesisPlant = std::variant<StateFeedbackPlant, FilterPlant, OutputFeedbackPlant>;

enum class EllipsoidKind {
    Reachable,   // {x | x' P^-1 x <= 1}
    Observable,  // {x | x' Q x <= 1}
};

struct EllipsoidCert {
    Matrix shape;
    double alpha = 0.0;
    EllipsoidKind kind = EllipsoidKind::Reachable;

    // Symmetric to 1e-12 * scale and strictly positive definite.
    [[nodiscard]] bool is_valid() const;
};

struct StructureCheck {
    std::string name;
    bool passed = false;
    // Orthogonality checks: norm of the product. Rank tests: smallest
    // relevant singular value relative to the largest.
    double residual = 0.0;
};

struct ValidationReport {
    std::vector<StructureCheck> checks;

    [[nodiscard]] bool ok() const;
    [[nodiscard]] std::string failures() const;
};

double spectral_radius(const Matrix& M);

// Rank of M with tolerance sigma_max * max(rows, cols) * eps * 64.
Eigen::Index numerical_rank(const Matrix& M);

bool is_controllable(const Matrix& A, const Matrix& B);
bool is_observable(const Matrix& C, const Matrix& A);
// PBH test at every eigenvalue on or outside the unit circle.
bool is_stabilizable(const Matrix& A, const Matrix& B);
bool is_detectable(const Matrix& C, const Matrix& A);

ValidationReport validate_structure(const StateFeedbackPlant& plant);
ValidationReport validate_structure(const FilterPlant& plant);
ValidationReport validate_structure(const OutputFeedbackPlant& plant);

// (A + BK, Bw, C + DK, 0)
LtiSystem cl_state_feedback(const StateFeedbackPlant& plant, const Matrix& K);

// Estimation error system (A + LC, B + LD, Cz, 0).
LtiSystem cl_observer(const FilterPlant& plant, const Matrix& L);

// 2n-state closed loop in (x, e) coordinates, e = x - xhat:
//   [A + B2 K, -B2 K; 0, A + L C1],  [B1; B1 + L D1],  [C2 + D2 K, -D2 K].
LtiSystem cl_output_feedback(const OutputFeedbackPlant& plant, const Matrix& K, const Matrix& L);

// Throws NonFinite if any entry is NaN or Inf.
void require_finite(const Matrix& M, const char* name);

}  // namespace epsctl
