#include "epsctl/epsnorm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include "epsctl/error.hpp"
#include "epsctl/solvers.hpp"

namespace epsctl {

namespace {

std::optional<double> evaluate(const AlphaObjective& objective, double alpha) {
    try {
        auto v = objective(alpha);
        if (v && std::isfinite(*v)) {
            return v;
        }
    } catch (const Error&) {
    }
    return std::nullopt;
}

void check_analysis_system(const LtiSystem& S) {
    S.validate();
    if (!S.strictly_proper()) {
        throw Error(Errc::FeedthroughNotSupported, "the eps(alpha)-norm is defined for D = 0 only");
    }
}

}  // namespace

double eps_alpha_norm(const LtiSystem& S, double alpha) {
    check_analysis_system(S);
    const double rho = spectral_radius(S.A);
    if (rho >= 1.0) {
        throw Error(Errc::UnstableSystem, "eps(alpha)-norm needs rho(A) < 1, got " + std::to_string(rho));
    }
    check_lyapunov_alpha(alpha, rho * rho);

    const auto p = S.outputs();
    const auto m = S.inputs();
    const bool use_p = m <= 4 * p;
    const bool use_q = p <= 4 * m;

    std::optional<double> via_p;
    std::optional<double> via_q;
    if (use_p) {
        const Matrix P = p_alpha(S.A, S.B, alpha);
        via_p = (S.C * P * S.C.transpose()).trace();
    }
    if (use_q) {
        const Matrix Q = q_alpha(S.A, S.C, alpha);
        via_q = (S.B.transpose() * Q * S.B).trace();
    }
    if (via_p && via_q && std::abs(*via_p - *via_q) > kDualityTolerance * (1.0 + std::abs(*via_p))) {
        throw Error(Errc::DualityCheckFailed, "tr(CPC') and tr(B'QB) disagree");
    }
    const double squared = via_p ? *via_p : *via_q;
    return std::sqrt(std::max(0.0, squared));
}

AlphaCurve alpha_sweep(const AlphaObjective& objective, double lo, double hi, int points, int threads) {
    if (!(lo > 0.0 && lo < hi && hi < 1.0) || points < 2) {
        throw Error(Errc::BadInterval, "sweep needs 0 < lo < hi < 1 and at least two points");
    }
    AlphaCurve curve;
    curve.points.resize(static_cast<std::size_t>(points));
    const double step = (hi - lo) / (points - 1);
    for (int i = 0; i < points; ++i) {
        curve.points[i].alpha = (i == points - 1) ? hi : lo + step * i;
    }

    const int workers = std::clamp(threads, 1, points);
    auto run = [&](int first) {
        for (int i = first; i < points; i += workers) {
            curve.points[i].value = evaluate(objective, curve.points[i].alpha);
        }
    };
    if (workers == 1) {
        run(0);
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back(run, w);
        }
    }
    return curve;
}

ScalarMinimum golden_section_minimize(const std::function<double(double)>& f, double a, double b, double tol) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c);
    double fd = f(d);
    while (b - a > tol) {
        if (fc <= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    return fc <= fd ? ScalarMinimum{c, fc} : ScalarMinimum{d, fd};
}

EpsNormResult minimize_over_alpha(const AlphaObjective& objective, double lo, double hi,
                                  const SweepOptions& options) {
    EpsNormResult result;
    result.curve = alpha_sweep(objective, lo, hi, options.grid_points, options.threads);
    const auto& pts = result.curve.points;

    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (pts[i].feasible() && (!best || *pts[i].value < *pts[*best].value)) {
            best = i;
        }
    }
    if (!best) {
        throw Error(Errc::AllInfeasible, "no grid point admitted a solution");
    }

    const std::size_t i = *best;
    const double a = pts[i == 0 ? 0 : i - 1].alpha;
    const double b = pts[std::min(i + 1, pts.size() - 1)].alpha;
    auto penalized = [&](double alpha) {
        return evaluate(objective, alpha).value_or(std::numeric_limits<double>::infinity());
    };
    const ScalarMinimum refined = golden_section_minimize(penalized, a, b, options.refine_tol);

    if (refined.value < *pts[i].value) {
        result.value = refined.value;
        result.alpha_star = refined.x;
    } else {
        result.value = *pts[i].value;
        result.alpha_star = pts[i].alpha;
    }
    const double edge = 2.0 * options.refine_tol;
    result.boundary_minimum = (i == 0 && result.alpha_star - lo <= edge) ||
                              (i + 1 == pts.size() && hi - result.alpha_star <= edge);
    return result;
}

EpsNormResult eps_norm(const LtiSystem& S, const SweepOptions& options) {
    check_analysis_system(S);
    const double rho = spectral_radius(S.A);
    if (rho >= 1.0) {
        throw Error(Errc::UnstableSystem, "eps-norm needs rho(A) < 1, got " + std::to_string(rho));
    }
    const double lo = rho * rho + kAlphaGuard;
    const double hi = 1.0 - kAlphaGuard;
    if (!(lo < hi)) {
        throw Error(Errc::UnstableSystem, "admissible alpha interval is narrower than the guard bands");
    }
    return minimize_over_alpha([&S](double alpha) -> std::optional<double> { return eps_alpha_norm(S, alpha); },
                               lo, hi, options);
}

}  // namespace epsctl
