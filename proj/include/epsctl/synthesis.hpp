#pragma once

#include <optional>

#include "epsctl/epsnorm.hpp"
#include "epsctl/sysmodel.hpp"

namespace epsctl {

enum class SynthesisKind { StateFeedback, Observer, OutputFeedback };

struct SynthesisResult {
    std::optional<Matrix> K;
    std::optional<Matrix> L;
    std::optional<Matrix> P;
    std::optional<Matrix> Q;
    double alpha = 0.0;
    double eps_alpha_norm = 0.0;
    LtiSystem closed_loop;
};

// Split of the squared output-feedback norm, with
// M = ((1-a)/a) B2' Q B2 + D2' D2 standing in for R'R.
struct OutputFeedbackNormParts {
    double term_q = 0.0;   // tr(B1' Q B1)
    double term_kp = 0.0;  // tr(K P K' M)
    double total = 0.0;    // sqrt(term_q + term_kp)
};

struct OutputFeedbackResult {
    SynthesisResult result;
    OutputFeedbackNormParts parts;
};

// K = -(B'QB + a/(1-a) D'D)^-1 B'QA. Throws SingularInnerMatrix when the
// inner matrix has condition number >= 1e12.
Matrix gain_K(const Matrix& Q, const Matrix& A, const Matrix& B, const Matrix& D, double alpha);

// L = -APC' (CPC' + a/(1-a) DD')^-1, the transpose-dual of gain_K.
Matrix gain_L(const Matrix& P, const Matrix& A, const Matrix& C, const Matrix& D, double alpha);

SynthesisResult synth_state_feedback(const StateFeedbackPlant& plant, double alpha);
SynthesisResult synth_observer(const FilterPlant& plant, double alpha);
OutputFeedbackResult synth_output_feedback(const OutputFeedbackPlant& plant, double alpha);

// Squared-norm split without the closed-loop recomputation; this is the
// objective minimized by optimize_synthesis for output feedback.
OutputFeedbackNormParts output_feedback_norm_parts(const OutputFeedbackPlant& plant, double alpha);

/// eps(alpha)-norm of the series connection S2 S1, where S1 = (Abar, Bbar, Cbar)
/// feeds S2 = (A + BK, B, C + DK, D) and K is the optimal gain for Q_alpha.
/// Evaluated as the norm of (Abar, Bbar, R Cbar) with
/// R'R = ((1-a)/a) B'QB + D'D, using traces so that R is never formed.
double reduced_series_norm(const LtiSystem& S1, const Matrix& K, const Matrix& Q_alpha, const Matrix& B,
                           const Matrix& D, double alpha);

// Sqrt of the optimal objective at alpha for the given plant, without
// building the closed loop. Used for alpha sweeps.
double synthesis_objective(const SynthesisPlant& plant, double alpha);

SynthesisKind kind_of(const SynthesisPlant& plant);

struct OptimizedSynthesis {
    SynthesisKind kind = SynthesisKind::StateFeedback;
    SynthesisResult result;
    std::optional<OutputFeedbackNormParts> parts;
    EpsNormResult search;
};

// Grid-then-golden search of the synthesis objective over (1e-4, 1 - 1e-4),
// followed by a full synthesis at the best alpha.
OptimizedSynthesis optimize_synthesis(const SynthesisPlant& plant, const SweepOptions& options = {});

}  // namespace epsctl
