#include "epsctl/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <chrono>
#include <cstdlib>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>
#include <openssl/evp.h>

#include "epsctl/epsnorm.hpp"
#include "epsctl/simkit.hpp"
#include "epsctl/solvers.hpp"
#include "epsctl/synthesis.hpp"
#include "epsctl/system_file.hpp"

#ifndef EPSCTL_DATA_DIR
#define EPSCTL_DATA_DIR "data"
#endif

namespace epsctl::cli {

using nlohmann::json;

int exit_code_for(Errc code) {
    switch (code) {
    case Errc::ParseError:
        return kParseError;
    case Errc::NoStabilizingSolution:
    case Errc::SingularInnerMatrix:
    case Errc::AllInfeasible:
    case Errc::SeparationCheckFailed:
    case Errc::DualityCheckFailed:
    case Errc::EigenFailure:
    case Errc::Overflow:
        return kSolverFailure;
    default:
        return kStructuralFailure;
    }
}

std::string format_number(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SweepRange {
    double lo = 0.0;
    double hi = 0.0;
    int points = 0;
};

SweepRange parse_sweep(const std::string& text) {
    SweepRange r;
    char sep1 = 0;
    char sep2 = 0;
    std::istringstream in(text);
    in.imbue(std::locale::classic());
    if (!(in >> r.lo >> sep1 >> r.hi >> sep2 >> r.points) || sep1 != ':' || sep2 != ':' || !in.eof()) {
        throw UsageError("--sweep expects lo:hi:points, got '" + text + "'");
    }
    return r;
}

int thread_budget() {
    int n = static_cast<int>(std::thread::hardware_concurrency());
    if (const char* env = std::getenv("EPSCTL_THREADS")) {
        int cap = 0;
        const std::string_view s(env);
        if (std::from_chars(s.data(), s.data() + s.size(), cap).ec == std::errc() && cap > 0) {
            n = n > 0 ? std::min(n, cap) : cap;
        }
    }
    return std::max(1, n);
}

std::string sha256_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr);
    std::ostringstream os;
    for (unsigned int i = 0; i < len; ++i) {
        os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
    }
    return "sha256:" + os.str();
}

std::string matrix_inline(const Matrix& M) {
    std::ostringstream os;
    os << std::setprecision(6);
    os << '[';
    for (Eigen::Index r = 0; r < M.rows(); ++r) {
        os << (r ? "; " : "");
        for (Eigen::Index c = 0; c < M.cols(); ++c) {
            os << (c ? ", " : "") << M(r, c);
        }
    }
    os << ']';
    return os.str();
}

std::string curve_csv(const AlphaCurve& curve, std::string_view value_column) {
    std::string csv = "alpha," + std::string(value_column) + ",feasible\n";
    for (const auto& p : curve.points) {
        csv += format_number(p.alpha);
        csv += ',';
        csv += p.value ? format_number(*p.value) : std::string("nan");
        csv += p.value ? ",1\n" : ",0\n";
    }
    return csv;
}

json system_json(const LtiSystem& s) {
    return {{"A", matrix_to_json(s.A)},
            {"B", matrix_to_json(s.B)},
            {"C", matrix_to_json(s.C)},
            {"D", matrix_to_json(s.feedthrough())}};
}

// Shared state of one command invocation.
struct Invocation {
    std::string command;
    std::vector<std::string> argv;
    std::string input;
    std::string digest;
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    json results = json::object();

    [[nodiscard]] json report() const {
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        return {{"command", command},
                {"argv", argv},
                {"input", input},
                {"input_digest", digest},
                {"version", kVersion},
                {"rng", kRngName},
                {"results", results},
                {"duration_s", seconds}};
    }
};

void emit_report(const Invocation& inv, const std::string& path) {
    if (!path.empty()) {
        write_file_atomic(path, inv.report().dump(2) + "\n");
    }
}

struct AlphaChoice {
    std::optional<double> alpha;
    bool optimize = false;
};

// Explicit --alpha wins, then the file's alpha; otherwise optimize.
AlphaChoice resolve_alpha(const std::optional<double>& flag, bool optimize, const std::optional<double>& from_file) {
    if (flag && optimize) {
        throw UsageError("--alpha and --optimize are mutually exclusive");
    }
    if (flag) {
        return {flag, false};
    }
    if (optimize || !from_file) {
        return {std::nullopt, true};
    }
    return {from_file, false};
}

// ---------------------------------------------------------------- analyze

struct AnalyzeArgs {
    std::string input;
    std::optional<double> alpha;
    bool optimize = false;
    std::string sweep;
    std::string curve_path = "alpha_sweep.csv";
    std::string out;
    int grid = 199;
    double refine_tol = 1e-6;
};

int cmd_analyze(const AnalyzeArgs& a, Invocation& inv, std::ostream& out) {
    const std::string text = read_text_file(a.input);
    inv.digest = sha256_hex(text);
    const SystemFile file = parse_system_file(text);
    if (file.kind() != "lti") {
        throw Error(Errc::ParseError, "analyze needs kind 'lti', got '" + std::string(file.kind()) + "'");
    }
    const auto& S = std::get<LtiSystem>(file.system);
    const AlphaChoice choice = resolve_alpha(a.alpha, a.optimize, file.alpha);
    const int threads = thread_budget();

    std::optional<SweepRange> sweep;
    if (!a.sweep.empty()) {
        sweep = parse_sweep(a.sweep);
    }

    if (choice.alpha) {
        const double value = eps_alpha_norm(S, *choice.alpha);
        out << "alpha=" << format_number(*choice.alpha) << "\n";
        out << "eps_alpha_norm=" << format_number(value) << "\n";
        inv.results["alpha"] = *choice.alpha;
        inv.results["eps_alpha_norm"] = value;
    } else {
        const EpsNormResult r = eps_norm(S, {a.grid, a.refine_tol, threads});
        out << "eps_norm=" << format_number(r.value) << "\n";
        out << "alpha_star=" << format_number(r.alpha_star) << "\n";
        out << "boundary_minimum=" << (r.boundary_minimum ? "true" : "false") << "\n";
        inv.results["eps_norm"] = r.value;
        inv.results["alpha_star"] = r.alpha_star;
        inv.results["boundary_minimum"] = r.boundary_minimum;
    }

    if (sweep) {
        const AlphaCurve curve = alpha_sweep(
            [&S](double alpha) -> std::optional<double> { return eps_alpha_norm(S, alpha); }, sweep->lo, sweep->hi,
            sweep->points, threads);
        write_file_atomic(a.curve_path, curve_csv(curve, "eps_alpha_norm"));
        out << "curve=" << a.curve_path << "\n";
        inv.results["curve_path"] = a.curve_path;
    }
    emit_report(inv, a.out);
    return kOk;
}

// ------------------------------------------------------------------ synth

struct SynthArgs {
    std::string input;
    std::string mode;
    std::optional<double> alpha;
    bool optimize = false;
    std::string sweep;
    std::string curve_path = "alpha_sweep.csv";
    std::string out;
    int grid = 199;
    double refine_tol = 1e-6;
    bool compare_reference = false;
    std::string reference = std::string(EPSCTL_DATA_DIR) + "/reference_suboptimal.json";
};

std::string_view expected_kind(const std::string& mode) {
    if (mode == "state-feedback") {
        return "state_feedback";
    }
    if (mode == "observer") {
        return "filter";
    }
    return "output_feedback";
}

SynthesisPlant to_plant(const SystemFile& file) {
    return std::visit(
        [](const auto& s) -> SynthesisPlant {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, LtiSystem>) {
                throw Error(Errc::ParseError, "synthesis needs a plant, not kind 'lti'");
            } else {
                return s;
            }
        },
        file.system);
}

void print_reference(const std::string& path, const SynthesisResult& r, std::ostream& out) {
    json ref;
    try {
        ref = json::parse(read_text_file(path));
        if (!ref.is_object() || (ref.contains("eps_norm") && !ref["eps_norm"].is_number()) ||
            (ref.contains("source") && !ref["source"].is_string())) {
            throw Error(Errc::ParseError, "reference file '" + path + "' has an unexpected layout");
        }
    } catch (const json::exception& e) {
        throw Error(Errc::ParseError, "reference file '" + path + "': " + e.what());
    }
    out << "\n";
    out << std::left << std::setw(14) << "" << std::setw(34) << "literature (reference values)"
        << "computed\n";
    auto row = [&](const char* name, const std::string& lit, const std::string& ours) {
        out << std::left << std::setw(14) << name << std::setw(34) << lit << ours << "\n";
    };
    if (ref.contains("K") && r.K) {
        row("K", matrix_inline(matrix_from_json(ref["K"], "K")), matrix_inline(*r.K));
    }
    if (ref.contains("L") && r.L) {
        row("L", matrix_inline(matrix_from_json(ref["L"], "L")), matrix_inline(*r.L));
    }
    if (ref.contains("eps_norm")) {
        std::ostringstream lit;
        std::ostringstream ours;
        lit << std::fixed << std::setprecision(1) << ref["eps_norm"].get<double>();
        ours << std::fixed << std::setprecision(1) << r.eps_alpha_norm;
        row("eps-norm", lit.str(), ours.str());
    }
    if (ref.contains("source")) {
        out << "reference: " << ref["source"].get<std::string>() << "\n";
    }
}

int cmd_synth(const SynthArgs& a, Invocation& inv, std::ostream& out) {
    const std::string text = read_text_file(a.input);
    inv.digest = sha256_hex(text);
    const SystemFile file = parse_system_file(text);
    if (file.kind() != expected_kind(a.mode)) {
        throw Error(Errc::ParseError, "mode '" + a.mode + "' needs kind '" + std::string(expected_kind(a.mode)) +
                                          "', got '" + std::string(file.kind()) + "'");
    }
    const SynthesisPlant plant = to_plant(file);
    const AlphaChoice choice = resolve_alpha(a.alpha, a.optimize, file.alpha);
    const int threads = thread_budget();

    std::optional<SweepRange> sweep;
    if (!a.sweep.empty()) {
        sweep = parse_sweep(a.sweep);
    }

    SynthesisResult r;
    std::optional<OutputFeedbackNormParts> parts;
    if (choice.alpha) {
        const double alpha = *choice.alpha;
        if (const auto* sf = std::get_if<StateFeedbackPlant>(&plant)) {
            r = synth_state_feedback(*sf, alpha);
        } else if (const auto* f = std::get_if<FilterPlant>(&plant)) {
            r = synth_observer(*f, alpha);
        } else {
            auto of = synth_output_feedback(std::get<OutputFeedbackPlant>(plant), alpha);
            r = std::move(of.result);
            parts = of.parts;
        }
    } else {
        OptimizedSynthesis opt = optimize_synthesis(plant, {a.grid, a.refine_tol, threads});
        r = std::move(opt.result);
        parts = opt.parts;
        inv.results["alpha_star"] = opt.search.alpha_star;
        inv.results["boundary_minimum"] = opt.search.boundary_minimum;
    }

    json& res = inv.results;
    res["mode"] = a.mode;
    res["alpha"] = r.alpha;
    res["eps_alpha_norm"] = r.eps_alpha_norm;
    if (r.K) {
        res["K"] = matrix_to_json(*r.K);
    }
    if (r.L) {
        res["L"] = matrix_to_json(*r.L);
    }
    if (r.P) {
        res["P"] = matrix_to_json(*r.P);
    }
    if (r.Q) {
        res["Q"] = matrix_to_json(*r.Q);
    }
    if (parts) {
        res["norm_parts"] = {{"term_q", parts->term_q}, {"term_kp", parts->term_kp}, {"total", parts->total}};
    }
    res["closed_loop"] = system_json(r.closed_loop);
    res["closed_loop_spectral_radius"] = spectral_radius(r.closed_loop.A);

    out << "mode=" << a.mode << "\n";
    out << "alpha=" << format_number(r.alpha) << "\n";
    out << "eps_alpha_norm=" << format_number(r.eps_alpha_norm) << "\n";
    if (r.K) {
        out << "K=" << matrix_inline(*r.K) << "\n";
    }
    if (r.L) {
        out << "L=" << matrix_inline(*r.L) << "\n";
    }

    if (sweep) {
        const AlphaCurve curve = alpha_sweep(
            [&plant](double alpha) -> std::optional<double> { return synthesis_objective(plant, alpha); },
            sweep->lo, sweep->hi, sweep->points, threads);
        write_file_atomic(a.curve_path, curve_csv(curve, "eps_alpha_norm"));
        out << "curve=" << a.curve_path << "\n";
        res["curve_path"] = a.curve_path;
    }
    if (a.compare_reference) {
        print_reference(a.reference, r, out);
    }
    emit_report(inv, a.out);
    return kOk;
}

// --------------------------------------------------------------- simulate

struct SimulateArgs {
    std::string input;
    int steps = 1000;
    std::string dist = "uniform";
    std::uint64_t seed = 0;
    int runs = 1;
    std::optional<double> alpha;
    std::string out;
    std::string trajectory_path = "trajectory.csv";
    std::string ellipse_path = "ellipse.csv";
    std::vector<int> plane{0, 1};
    int ellipse_points = 256;
    bool strict = false;
};

DisturbanceKind parse_dist(const std::string& s) {
    if (s == "extreme") {
        return DisturbanceKind::ExtremeSwitching;
    }
    if (s == "uniform") {
        return DisturbanceKind::UniformBall;
    }
    if (s == "constant") {
        return DisturbanceKind::Constant;
    }
    return DisturbanceKind::WorstCaseGreedy;
}

std::string trajectory_csv(const Trajectory& t, Eigen::Index n, Eigen::Index p) {
    std::string csv = "k";
    for (Eigen::Index i = 1; i <= n; ++i) {
        csv += ",x" + std::to_string(i);
    }
    for (Eigen::Index i = 1; i <= p; ++i) {
        csv += ",z" + std::to_string(i);
    }
    csv += ",|w|\n";
    for (std::size_t k = 0; k < t.outputs.size(); ++k) {
        csv += std::to_string(k);
        for (Eigen::Index i = 0; i < n; ++i) {
            csv += ',' + format_number(t.states[k](i));
        }
        for (Eigen::Index i = 0; i < p; ++i) {
            csv += ',' + format_number(t.outputs[k](i));
        }
        csv += ',' + format_number(t.disturbances[k].norm()) + '\n';
    }
    return csv;
}

int cmd_simulate(const SimulateArgs& a, Invocation& inv, std::ostream& out) {
    const std::string text = read_text_file(a.input);
    inv.digest = sha256_hex(text);

    LtiSystem S;
    std::optional<double> file_alpha;
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw Error(Errc::ParseError, std::string("invalid JSON: ") + e.what());
    }
    const json* synth_results = nullptr;
    if (doc.is_object() && doc.contains("results") && doc["results"].contains("closed_loop")) {
        synth_results = &doc["results"];
    } else if (doc.is_object() && doc.contains("closed_loop")) {
        synth_results = &doc;
    }
    if (synth_results) {
        const json& cl = (*synth_results)["closed_loop"];
        if (!cl.is_object()) {
            throw Error(Errc::ParseError, "field 'closed_loop' must be an object");
        }
        for (const char* f : {"A", "B", "C"}) {
            if (!cl.contains(f)) {
                throw Error(Errc::ParseError, std::string("missing required field 'closed_loop.") + f + "'");
            }
        }
        S = {matrix_from_json(cl["A"], "closed_loop.A"), matrix_from_json(cl["B"], "closed_loop.B"),
             matrix_from_json(cl["C"], "closed_loop.C"),
             cl.contains("D") ? matrix_from_json(cl["D"], "closed_loop.D") : Matrix()};
        try {
            S.validate();
        } catch (const Error& e) {
            throw Error(Errc::ParseError, e.what());
        }
        if (synth_results->contains("alpha")) {
            const json& aj = (*synth_results)["alpha"];
            if (!aj.is_number() || !std::isfinite(aj.get<double>())) {
                throw Error(Errc::ParseError, "field 'alpha' must be a finite number");
            }
            file_alpha = aj.get<double>();
        }
    } else {
        const SystemFile file = parse_system_file(text);
        if (file.kind() != "lti") {
            throw Error(Errc::ParseError, "simulate needs kind 'lti' or a synth output, got '" +
                                              std::string(file.kind()) + "'");
        }
        S = std::get<LtiSystem>(file.system);
        file_alpha = file.alpha;
    }

    const int threads = thread_budget();
    double alpha = 0.0;
    if (a.alpha) {
        alpha = *a.alpha;
    } else if (file_alpha) {
        alpha = *file_alpha;
    } else {
        LtiSystem proper = S;
        proper.D.resize(0, 0);
        alpha = eps_norm(proper, {199, 1e-6, threads}).alpha_star;
    }
    const EllipsoidCert cert = solve_p_alpha(S.A, S.B, alpha);

    const DisturbanceKind kind = parse_dist(a.dist);
    const auto runs = static_cast<std::size_t>(a.runs);
    std::vector<ContainmentStats> stats(runs);
    std::vector<std::optional<Error>> failures(runs);
    std::optional<Trajectory> first;

    auto run_one = [&](std::size_t r) {
        try {
            const DisturbanceSpec spec{kind, a.seed + r, a.steps, static_cast<int>(S.inputs())};
            Trajectory t = simulate_disturbed(S, spec, Vector::Zero(S.states()), cert);
            stats[r] = containment_stats(t, cert);
            if (r == 0) {
                first = std::move(t);
            }
        } catch (const Error& e) {
            failures[r] = e;
        }
    };
    const auto workers = static_cast<std::size_t>(std::clamp(threads, 1, a.runs));
    {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                for (std::size_t r = w; r < runs; r += workers) {
                    run_one(r);
                }
            });
        }
    }
    for (const auto& f : failures) {
        if (f) {
            throw *f;
        }
    }

    ContainmentStats total;
    for (const auto& s : stats) {
        total.max_quadratic = std::max(total.max_quadratic, s.max_quadratic);
        total.violations += s.violations;
    }

    write_file_atomic(a.trajectory_path, trajectory_csv(*first, S.states(), S.outputs()));
    inv.results["trajectory_path"] = a.trajectory_path;
    if (S.states() >= 2) {
        const auto pts = ellipsoid_boundary_points(cert, {a.plane[0], a.plane[1]}, a.ellipse_points);
        std::string csv = "px,py\n";
        for (const auto& p : pts) {
            csv += format_number(p.x()) + ',' + format_number(p.y()) + '\n';
        }
        write_file_atomic(a.ellipse_path, csv);
        inv.results["ellipse_path"] = a.ellipse_path;
    }

    out << "alpha=" << format_number(alpha) << "\n";
    out << "runs=" << a.runs << "\n";
    out << "steps=" << a.steps << "\n";
    out << "max_quadratic=" << format_number(total.max_quadratic) << "\n";
    out << "violations=" << total.violations << "\n";

    inv.results["alpha"] = alpha;
    inv.results["seed"] = a.seed;
    inv.results["runs"] = a.runs;
    inv.results["steps"] = a.steps;
    inv.results["disturbance"] = a.dist;
    inv.results["max_quadratic"] = total.max_quadratic;
    inv.results["violations"] = total.violations;
    inv.results["P_alpha"] = matrix_to_json(cert.shape);
    emit_report(inv, a.out);

    if (a.strict && total.violations > 0) {
        return kContainmentViolation;
    }
    return kOk;
}

// One machine-parsable line: epsctl: error=<kind> exit=<code> detail="<text>".
void report_error(std::ostream& err, std::string_view kind, int code, std::string_view detail) {
    std::string clean(detail);
    std::replace(clean.begin(), clean.end(), '"', '\'');
    std::replace(clean.begin(), clean.end(), '\n', ' ');
    err << "epsctl: error=" << kind << " exit=" << code << " detail=\"" << clean << "\"\n";
}

void add_alpha_options(CLI::App* cmd, std::optional<double>& alpha, bool& optimize) {
    auto* alpha_opt = cmd->add_option("--alpha", alpha, "Evaluate at this alpha");
    cmd->add_flag("--optimize", optimize, "Minimize over alpha")->excludes(alpha_opt);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Invariant-ellipsoid analysis and eps-optimal synthesis for discrete-time LTI systems", "epsctl"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string("epsctl ") + std::string(kVersion) + " (rng " +
                                          std::string(kRngName) + ")");

    AnalyzeArgs analyze;
    auto* c_analyze = app.add_subcommand("analyze", "eps(alpha)- or eps-norm of an LTI system");
    c_analyze->add_option("system", analyze.input, "System file (kind lti)")->required();
    add_alpha_options(c_analyze, analyze.alpha, analyze.optimize);
    c_analyze->add_option("--sweep", analyze.sweep, "Write the alpha curve: lo:hi:points");
    c_analyze->add_option("--curve", analyze.curve_path, "CSV path for --sweep")->capture_default_str();
    c_analyze->add_option("--out", analyze.out, "Run report (JSON)");
    c_analyze->add_option("--grid", analyze.grid, "Grid points for --optimize")->capture_default_str();
    c_analyze->add_option("--refine-tol", analyze.refine_tol, "Alpha bracket tolerance")->capture_default_str();

    SynthArgs synth;
    auto* c_synth = app.add_subcommand("synth", "eps-optimal gain synthesis");
    c_synth->add_option("system", synth.input, "Plant file")->required();
    c_synth->add_option("--mode", synth.mode, "Synthesis problem")
        ->required()
        ->check(CLI::IsMember({"state-feedback", "observer", "output-feedback"}));
    add_alpha_options(c_synth, synth.alpha, synth.optimize);
    c_synth->add_option("--sweep", synth.sweep, "Write the objective curve: lo:hi:points");
    c_synth->add_option("--curve", synth.curve_path, "CSV path for --sweep")->capture_default_str();
    c_synth->add_option("--out", synth.out, "Gains and run report (JSON)");
    c_synth->add_option("--grid", synth.grid, "Grid points for --optimize")->capture_default_str();
    c_synth->add_option("--refine-tol", synth.refine_tol, "Alpha bracket tolerance")->capture_default_str();
    c_synth->add_flag("--compare-reference", synth.compare_reference,
                      "Print literature values next to the computed ones");
    c_synth->add_option("--reference", synth.reference, "Reference constants file")->capture_default_str();

    SimulateArgs sim;
    auto* c_sim = app.add_subcommand("simulate", "Disturbed trajectories and ellipsoid containment");
    c_sim->add_option("system", sim.input, "System file (kind lti) or synth output")->required();
    c_sim->add_option("--steps", sim.steps, "Steps per run")->capture_default_str()->check(CLI::PositiveNumber);
    c_sim->add_option("--dist", sim.dist, "Disturbance kind")
        ->capture_default_str()
        ->check(CLI::IsMember({"extreme", "uniform", "constant", "greedy"}));
    c_sim->add_option("--seed", sim.seed, "Seed of the first run")->capture_default_str();
    c_sim->add_option("--runs", sim.runs, "Runs, seeded seed..seed+runs-1")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    c_sim->add_option("--alpha", sim.alpha, "Certificate alpha");
    c_sim->add_option("--out", sim.out, "Run report (JSON)");
    c_sim->add_option("--trajectory", sim.trajectory_path, "Trajectory CSV of the first run")->capture_default_str();
    c_sim->add_option("--ellipse", sim.ellipse_path, "Ellipse boundary CSV")->capture_default_str();
    c_sim->add_option("--plane", sim.plane, "Projection axes i,j")->delimiter(',')->expected(2);
    c_sim->add_option("--ellipse-points", sim.ellipse_points, "Boundary points")->capture_default_str();
    c_sim->add_flag("--strict", sim.strict, "Exit 5 on any containment violation");

    std::vector<const char*> argv;
    argv.reserve(args.size());
    for (const auto& a : args) {
        argv.push_back(a.c_str());
    }
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::Success& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kParseError;
    }

    Invocation inv;
    inv.argv.assign(args.begin(), args.end());
    try {
        if (c_analyze->parsed()) {
            inv.command = "analyze";
            inv.input = analyze.input;
            return cmd_analyze(analyze, inv, out);
        }
        if (c_synth->parsed()) {
            inv.command = "synth";
            inv.input = synth.input;
            return cmd_synth(synth, inv, out);
        }
        inv.command = "simulate";
        inv.input = sim.input;
        return cmd_simulate(sim, inv, out);
    } catch (const UsageError& e) {
        report_error(err, "UsageError", kParseError, e.what());
        return kParseError;
    } catch (const Error& e) {
        const int code = exit_code_for(e.code());
        report_error(err, to_string(e.code()), code, e.what());
        return code;
    } catch (const std::exception& e) {
        report_error(err, "Internal", kSolverFailure, e.what());
        return kSolverFailure;
    }
}

}  // namespace epsctl::cli
