#include "epsctl/synthesis.hpp"

#include <cmath>
#include <limits>

#include "epsctl/error.hpp"
#include "epsctl/solvers.hpp"

namespace epsctl {

namespace {

constexpr double kRecomputeTol = 1e-8;

template<typename Plant>
void require_structure(const Plant& plant) {
    const ValidationReport report = validate_structure(plant);
    if (!report.ok()) {
        throw Error(Errc::StructuralAssumptionViolated, "plant violates: " + report.failures());
    }
}

// The eps(alpha)-norm recomputed from scratch on a closed loop must agree
// with the value predicted by the Riccati solution.
void check_recomputed(const LtiSystem& closed_loop, double alpha, double predicted) {
    const double direct = eps_alpha_norm(closed_loop, alpha);
    const double scale = std::max(std::abs(predicted), std::numeric_limits<double>::min());
    if (std::abs(direct - predicted) > kRecomputeTol * scale) {
        throw Error(Errc::SeparationCheckFailed,
                    "closed-loop norm " + std::to_string(direct) + " differs from " + std::to_string(predicted));
    }
}

double nonnegative_sqrt(double v) {
    return std::sqrt(std::max(0.0, v));
}

}  // namespace

Matrix gain_K(const Matrix& Q, const Matrix& A, const Matrix& B, const Matrix& D, double alpha) {
    if (Q.rows() != A.rows() || Q.cols() != A.rows() || B.rows() != A.rows() || D.cols() != B.cols()) {
        throw Error(Errc::DimensionMismatch, "incompatible shapes for the feedback gain");
    }
    const Matrix inner = B.transpose() * Q * B + (alpha / (1.0 - alpha)) * D.transpose() * D;
    Eigen::JacobiSVD<Matrix> svd(inner);
    const auto& s = svd.singularValues();
    if (s.size() > 0 && !(s(s.size() - 1) * 1e12 > s(0))) {
        throw Error(Errc::SingularInnerMatrix, "B'QB + (a/(1-a)) D'D is singular");
    }
    return -inner.fullPivLu().solve(B.transpose() * Q * A);
}

Matrix gain_L(const Matrix& P, const Matrix& A, const Matrix& C, const Matrix& D, double alpha) {
    return gain_K(P.transpose(), A.transpose(), C.transpose(), D.transpose(), alpha).transpose();
}

SynthesisResult synth_state_feedback(const StateFeedbackPlant& plant, double alpha) {
    require_structure(plant);
    const Matrix Q = solve_dare_control(plant.A, plant.B, plant.C, plant.D, alpha).X;
    SynthesisResult r;
    r.K = gain_K(Q, plant.A, plant.B, plant.D, alpha);
    r.Q = Q;
    r.alpha = alpha;
    r.eps_alpha_norm = nonnegative_sqrt((plant.Bw.transpose() * Q * plant.Bw).trace());
    r.closed_loop = cl_state_feedback(plant, *r.K);
    check_recomputed(r.closed_loop, alpha, r.eps_alpha_norm);
    return r;
}

SynthesisResult synth_observer(const FilterPlant& plant, double alpha) {
    require_structure(plant);
    const Matrix P = solve_dare_filter(plant.A, plant.B, plant.C, plant.D, alpha).X;
    SynthesisResult r;
    r.L = gain_L(P, plant.A, plant.C, plant.D, alpha);
    r.P = P;
    r.alpha = alpha;
    r.eps_alpha_norm = nonnegative_sqrt((plant.Cz * P * plant.Cz.transpose()).trace());
    r.closed_loop = cl_observer(plant, *r.L);
    check_recomputed(r.closed_loop, alpha, r.eps_alpha_norm);
    return r;
}

namespace {

struct OutputFeedbackPieces {
    Matrix P;
    Matrix Q;
    Matrix K;
    Matrix L;
    OutputFeedbackNormParts parts;
};

OutputFeedbackPieces output_feedback_pieces(const OutputFeedbackPlant& plant, double alpha) {
    OutputFeedbackPieces x;
    x.P = solve_dare_filter(plant.A, plant.B1, plant.C1, plant.D1, alpha).X;
    x.Q = solve_dare_control(plant.A, plant.B2, plant.C2, plant.D2, alpha).X;
    x.K = gain_K(x.Q, plant.A, plant.B2, plant.D2, alpha);
    x.L = gain_L(x.P, plant.A, plant.C1, plant.D1, alpha);

    const Matrix M =
        ((1.0 - alpha) / alpha) * plant.B2.transpose() * x.Q * plant.B2 + plant.D2.transpose() * plant.D2;
    x.parts.term_q = (plant.B1.transpose() * x.Q * plant.B1).trace();
    x.parts.term_kp = (x.K * x.P * x.K.transpose() * M).trace();
    x.parts.total = nonnegative_sqrt(x.parts.term_q + x.parts.term_kp);
    return x;
}

}  // namespace

OutputFeedbackNormParts output_feedback_norm_parts(const OutputFeedbackPlant& plant, double alpha) {
    require_structure(plant);
    return output_feedback_pieces(plant, alpha).parts;
}

OutputFeedbackResult synth_output_feedback(const OutputFeedbackPlant& plant, double alpha) {
    require_structure(plant);
    OutputFeedbackPieces x = output_feedback_pieces(plant, alpha);

    OutputFeedbackResult out;
    out.parts = x.parts;
    SynthesisResult& r = out.result;
    r.alpha = alpha;
    r.eps_alpha_norm = x.parts.total;
    r.closed_loop = cl_output_feedback(plant, x.K, x.L);
    r.K = std::move(x.K);
    r.L = std::move(x.L);
    r.P = std::move(x.P);
    r.Q = std::move(x.Q);
    check_recomputed(r.closed_loop, alpha, r.eps_alpha_norm);
    return out;
}

double reduced_series_norm(const LtiSystem& S1, const Matrix& K, const Matrix& Q_alpha, const Matrix& B,
                           const Matrix& D, double alpha) {
    S1.validate();
    const auto n = Q_alpha.rows();
    if (Q_alpha.cols() != n || B.rows() != n || K.rows() != B.cols() || K.cols() != n || D.cols() != B.cols() ||
        S1.outputs() != B.cols()) {
        throw Error(Errc::DimensionMismatch, "incompatible shapes for the series reduction");
    }
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw AlphaRangeError(alpha, 0.0, 1.0);
    }
    const Matrix M = ((1.0 - alpha) / alpha) * B.transpose() * Q_alpha * B + D.transpose() * D;
    const Matrix weight = S1.C.transpose() * M * S1.C / (1.0 - alpha);
    const Matrix Qbar = solve_stein(S1.A.transpose() / std::sqrt(alpha), 0.5 * (weight + weight.transpose()));
    return nonnegative_sqrt((S1.B.transpose() * Qbar * S1.B).trace());
}

SynthesisKind kind_of(const SynthesisPlant& plant) {
    switch (plant.index()) {
    case 0: return SynthesisKind::StateFeedback;
    case 1: return SynthesisKind::Observer;
    default: return SynthesisKind::OutputFeedback;
    }
}

double synthesis_objective(const SynthesisPlant& plant, double alpha) {
    if (const auto* sf = std::get_if<StateFeedbackPlant>(&plant)) {
        const Matrix Q = solve_dare_control(sf->A, sf->B, sf->C, sf->D, alpha).X;
        return nonnegative_sqrt((sf->Bw.transpose() * Q * sf->Bw).trace());
    }
    if (const auto* f = std::get_if<FilterPlant>(&plant)) {
        const Matrix P = solve_dare_filter(f->A, f->B, f->C, f->D, alpha).X;
        return nonnegative_sqrt((f->Cz * P * f->Cz.transpose()).trace());
    }
    return output_feedback_pieces(std::get<OutputFeedbackPlant>(plant), alpha).parts.total;
}

OptimizedSynthesis optimize_synthesis(const SynthesisPlant& plant, const SweepOptions& options) {
    std::visit([](const auto& p) { require_structure(p); }, plant);

    OptimizedSynthesis out;
    out.kind = kind_of(plant);
    out.search = minimize_over_alpha(
        [&plant](double alpha) -> std::optional<double> { return synthesis_objective(plant, alpha); }, kAlphaGuard,
        1.0 - kAlphaGuard, options);

    const double alpha = out.search.alpha_star;
    switch (out.kind) {
    case SynthesisKind::StateFeedback:
        out.result = synth_state_feedback(std::get<StateFeedbackPlant>(plant), alpha);
        break;
    case SynthesisKind::Observer:
        out.result = synth_observer(std::get<FilterPlant>(plant), alpha);
        break;
    case SynthesisKind::OutputFeedback: {
        auto of = synth_output_feedback(std::get<OutputFeedbackPlant>(plant), alpha);
        out.result = std::move(of.result);
        out.parts = of.parts;
        break;
    }
    }
    return out;
}

}  // namespace epsctl
