#include "pecurves/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "pecurves/errors.hpp"

namespace pec {

using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(10);
    os << x;
    return os.str();
}

int max_k(const std::vector<int>& ks) { return ks.empty() ? 1 : *std::max_element(ks.begin(), ks.end()); }

TraceContext context_for(const Instance& inst, Branch branch, int kmax, const OptimizerParams& params) {
    TraceContext ctx{inst, params, {}};
    if (kmax >= 2) ctx.basis = make_surrogate_basis(inst, cone_for(branch), kmax);
    return ctx;
}

const CGridConfig& grid_for(const RunConfig& run, Branch b) { return b == Branch::Plus ? run.plus_grid : run.minus_grid; }

// a >= 0 on every cell and b = 0 wherever a = 0.
bool is_c4_proxy(const WeightField& w) {
    for (std::size_t i = 0; i < w.a.size(); ++i) {
        if (w.a[i] < 0.0) return false;
        if (w.a[i] == 0.0 && w.b[i] != 0.0) return false;
    }
    return true;
}

json thresholds_json(const Instance& inst, const Thresholds& th) {
    json m = json::array();
    for (const auto& u : th.c_star_star.minimizers) m.push_back(inst.triple.eval_A(u));
    bool in_ca = true;
    for (const auto& u : th.c_star_star.minimizers) in_ca = in_ca && inst.triple.eval_A(u) > 0.0;
    return json{{"c_star", th.c_star.value},
                {"c_star_star", th.c_star_star.value},
                {"c_star_maximizers", th.c_star.minimizers.size()},
                {"c_star_star_minimizers", th.c_star_star.minimizers.size()},
                {"A_at_c_star_star_minimizers", m},
                {"minimizers_in_C_A", in_ca},
                {"starts", th.c_star.starts}};
}

Verdict thresholds_verdict(const Thresholds& th) {
    const bool ok = th.c_star.value < -1e-10 && th.c_star_star.value > 1e-10;
    return {"thresholds_sign", ok, "c* = " + fmt(th.c_star.value) + ", c** = " + fmt(th.c_star_star.value)};
}

std::vector<EnergyCurve> trace_all(const ExperimentConfig& cfg, const Instance& inst, const Thresholds& th,
                                   json& details) {
    const auto params = cfg.run.optimizer();
    const int kmax = max_k(cfg.run.k);
    std::vector<EnergyCurve> curves;
    json grids = json::object();
    for (const auto& name : cfg.run.branches) {
        const Branch b = parse_branch(name);
        const auto grid = grid_for(cfg.run, b).resolve(th.c_star.value, th.c_star_star.value);
        grids[name] = grid;
        const TraceContext ctx = context_for(inst, b, kmax, params);
        for (auto& c : trace_family(ctx, b, cfg.run.k, grid)) curves.push_back(std::move(c));
    }
    if (cfg.run.negative_side) {
        const Instance flipped = inst.flipped();
        const Thresholds fth = compute_thresholds(flipped, params);
        details["negative_side_thresholds"] = {{"c_star", fth.c_star.value}, {"c_star_star", fth.c_star_star.value}};
        for (const auto& name : cfg.run.branches) {
            const Branch b = parse_branch(name);
            const auto grid = grid_for(cfg.run, b).resolve(fth.c_star.value, fth.c_star_star.value);
            grids["negA_" + name] = grid;
            const TraceContext ctx = context_for(inst, b, kmax, params);
            for (int k : cfg.run.k) curves.push_back(trace_curve_negative_side(ctx, b, k, grid));
        }
    }
    details["c_grids"] = grids;
    return curves;
}

const EnergyCurve* find_curve(const std::vector<EnergyCurve>& curves, Branch b, int k, bool negated) {
    for (const auto& c : curves)
        if (c.branch == b && c.k == k && c.negated_a == negated) return &c;
    return nullptr;
}

std::optional<double> lambda_at(const EnergyCurve& curve, double c) {
    for (const auto& p : curve.points)
        if (std::abs(p.c - c) <= 1e-14 * std::max(1.0, std::abs(c))) return p.lambda;
    return std::nullopt;
}

double mid_range(const EnergyCurve& curve) {
    if (curve.points.empty()) throw NumericalError("no traced level to pick lambda_bar from");
    return 0.5 * (curve.points.front().lambda + curve.points.back().lambda);
}

json intersections_json(const IntersectionReport& rep) {
    json hits = json::array();
    for (const auto& h : rep.hits)
        hits.push_back({{"k", h.k}, {"c", h.c}, {"lambda", h.lambda}, {"u_norm", h.record.u_norm}});
    return {{"branch", to_string(rep.branch)},
            {"lambda_bar", rep.lambda_bar},
            {"hits", hits},
            {"skipped", rep.skipped},
            {"c_increasing", rep.c_increasing},
            {"norms_monotone", rep.norms_monotone}};
}

}  // namespace

Thresholds compute_thresholds(const Instance& inst, const OptimizerParams& params) {
    const SphereConstraint sc = SphereConstraint::from(inst, ConeTag::APosBPos);
    return {compute_c_star(sc, params), compute_c_star_star(sc, params)};
}

std::vector<Verdict> curve_verdicts(const std::vector<EnergyCurve>& curves, double residual_tol) {
    std::vector<Verdict> out;
    for (bool neg : {false, true}) {
        const std::string pre = neg ? "negA_" : "";
        for (Branch b : {Branch::Plus, Branch::Minus}) {
            const EnergyCurve* c = find_curve(curves, b, 1, neg);
            if (!c) continue;
            bool ok = c->monotone_decreasing && c->truncation_reason.empty() && c->points.size() >= 2;
            std::string detail = std::to_string(c->points.size()) + " points";
            if (b == Branch::Plus) {
                bool sign_ok = true;
                for (const auto& p : c->points) sign_ok = sign_ok && (neg ? p.lambda < 0.0 : p.lambda > 0.0);
                ok = ok && sign_ok;
                if (!sign_ok) detail += ", lambda changes sign";
            }
            if (!c->truncation_reason.empty()) detail += ", truncated at " + c->truncation_reason;
            if (!c->monotone_decreasing) detail += ", not strictly decreasing in c";
            out.push_back({pre + to_string(b) + "_monotone", ok, detail});
        }
    }

    bool have_surrogate = false, sur_ok = true;
    std::string sur_detail;
    for (const auto& c : curves) {
        if (c.k < 2) continue;
        have_surrogate = true;
        if (!c.nonincreasing || !c.truncation_reason.empty()) {
            sur_ok = false;
            sur_detail += c.label() + " k=" + std::to_string(c.k) + " ";
        }
    }
    if (have_surrogate) out.push_back({"surrogate_monotone", sur_ok, sur_ok ? "all nonincreasing" : "fails: " + sur_detail});

    double worst_jump = 0.0;
    for (const auto& c : curves) worst_jump = std::max(worst_jump, c.max_successive_jump);
    if (!curves.empty()) out.push_back({"curve_continuity", worst_jump <= 1.0, "max |dlambda| / (L |dc|) = " + fmt(worst_jump)});

    // Nested surrogates: lambda_k <= lambda_{k+1} at shared c.
    bool nested_ok = true, nested_any = false;
    std::string nested_detail;
    for (const auto& lo : curves)
        for (const auto& hi : curves) {
            if (lo.branch != hi.branch || lo.negated_a != hi.negated_a || hi.k != lo.k + 1) continue;
            for (const auto& p : lo.points) {
                const auto l2 = lambda_at(hi, p.c);
                if (!l2) continue;
                nested_any = true;
                const double lhs = lo.negated_a ? -p.lambda : p.lambda, rhs = lo.negated_a ? -*l2 : *l2;
                if (lhs > rhs + 1e-6 * (1.0 + std::abs(lhs))) {
                    nested_ok = false;
                    nested_detail = lo.label() + " k=" + std::to_string(lo.k) + " above k+1 at c = " + fmt(p.c);
                }
            }
        }
    if (nested_any) out.push_back({"k_nested", nested_ok, nested_ok ? "levels nondecreasing in k" : nested_detail});

    // Plus below minus at shared grid points.
    bool pdm_ok = true, pdm_any = false;
    std::string pdm_detail;
    for (const auto& pc : curves) {
        if (pc.branch != Branch::Plus || pc.negated_a) continue;
        const EnergyCurve* mc = find_curve(curves, Branch::Minus, pc.k, false);
        if (!mc) continue;
        for (const auto& p : pc.points) {
            const auto lm = lambda_at(*mc, p.c);
            if (!lm) continue;
            pdm_any = true;
            if (!(p.lambda < *lm)) {
                pdm_ok = false;
                pdm_detail = "k=" + std::to_string(pc.k) + " plus >= minus at c = " + fmt(p.c);
            }
        }
    }
    if (pdm_any) out.push_back({"pdm_ordering", pdm_ok, pdm_ok ? "plus below minus at every shared c" : pdm_detail});

    std::size_t checked = 0, bad = 0;
    double worst_res = 0.0, worst_def = 0.0;
    for (const auto& c : curves) {
        if (c.k != 1) continue;
        for (const auto& p : c.points) {
            ++checked;
            const auto& r = p.record;
            worst_res = std::max(worst_res, r.residual_grad);
            worst_def = std::max(worst_def, r.energy_defect / (1.0 + std::abs(r.c)));
            if (!r.converged || !(r.residual_grad <= residual_tol) || !(r.energy_defect <= 1e-8 * (1.0 + std::abs(r.c))))
                ++bad;
        }
    }
    if (checked)
        out.push_back({"residuals", bad == 0,
                       std::to_string(checked - bad) + "/" + std::to_string(checked) + " ground-level points converged; max residual " +
                           fmt(worst_res) + ", max relative energy defect " + fmt(worst_def)});
    return out;
}

RunReport cmd_thresholds(const ExperimentConfig& cfg) {
    const auto t0 = Clock::now();
    RunReport rep;
    rep.command = "thresholds";
    rep.config = cfg.to_json();
    const BuiltProblem built = build_problem(cfg);
    const Thresholds th = compute_thresholds(built.instance, cfg.run.optimizer());
    rep.c_star = th.c_star.value;
    rep.c_star_star = th.c_star_star.value;
    rep.details = thresholds_json(built.instance, th);
    rep.verdicts.push_back(thresholds_verdict(th));
    rep.seconds = seconds_since(t0);
    return rep;
}

RunReport cmd_solve(const ExperimentConfig& cfg, double c, Branch branch, int k) {
    const auto t0 = Clock::now();
    if (k < 1) throw ConfigError("k must be at least 1");
    RunReport rep;
    rep.command = "solve";
    rep.config = cfg.to_json();
    const BuiltProblem built = build_problem(cfg);
    const TraceContext ctx = context_for(built.instance, branch, k, cfg.run.optimizer());
    const CurvePoint pt = evaluate_level(ctx, branch, k, c);
    json d = to_json(pt.record);
    d["branch"] = to_string(branch);
    d["k"] = k;
    d["c"] = c;
    d["lambda"] = std::isfinite(pt.lambda) ? json(pt.lambda) : json(nullptr);
    d["surrogate"] = pt.surrogate;
    d["flags"] = pt.flags;
    rep.details["level"] = d;
    const bool ok = std::isfinite(pt.lambda) && (k >= 2 || pt.record.converged);
    rep.verdicts.push_back({"solve_converged", ok,
                            ok ? "lambda = " + fmt(pt.lambda)
                               : (pt.flags.empty() ? std::string("level not converged") : pt.flags.front())});
    EnergyCurve single;
    single.branch = branch;
    single.k = k;
    single.points.push_back(pt);
    rep.curves.push_back(std::move(single));
    rep.seconds = seconds_since(t0);
    return rep;
}

RunReport cmd_trace(const ExperimentConfig& cfg) {
    const auto t0 = Clock::now();
    RunReport rep;
    rep.command = "trace";
    rep.config = cfg.to_json();
    const BuiltProblem built = build_problem(cfg);
    const Thresholds th = compute_thresholds(built.instance, cfg.run.optimizer());
    rep.c_star = th.c_star.value;
    rep.c_star_star = th.c_star_star.value;
    rep.details["thresholds"] = thresholds_json(built.instance, th);
    rep.curves = trace_all(cfg, built.instance, th, rep.details);
    rep.verdicts = curve_verdicts(rep.curves, cfg.run.residual_tol);
    rep.seconds = seconds_since(t0);
    return rep;
}

RunReport cmd_verify(const ExperimentConfig& cfg) {
    const auto t0 = Clock::now();
    RunReport rep;
    rep.command = "verify";
    rep.config = cfg.to_json();
    const BuiltProblem built = build_problem(cfg);
    const Instance& inst = built.instance;
    const auto params = cfg.run.optimizer();
    const Thresholds th = compute_thresholds(inst, params);
    rep.c_star = th.c_star.value;
    rep.c_star_star = th.c_star_star.value;
    rep.details["thresholds"] = thresholds_json(inst, th);
    rep.verdicts.push_back(thresholds_verdict(th));

    const auto curves = trace_all(cfg, inst, th, rep.details);
    for (auto& v : curve_verdicts(curves, cfg.run.residual_tol)) rep.verdicts.push_back(std::move(v));
    const auto wants = [&](Branch b) {
        return std::find(cfg.run.branches.begin(), cfg.run.branches.end(), to_string(b)) != cfg.run.branches.end();
    };

    if (wants(Branch::Plus)) {
        const TraceContext ctx = context_for(inst, Branch::Plus, max_k(cfg.run.intersect_k), params);
        const LimitReport lim = limit_check_zero(ctx, 1, cfg.run.limit_levels, cfg.run.limit_tolerance_ratio);
        rep.details["limit_zero"] = {{"c", lim.c},
                                     {"lambda", lim.lambda},
                                     {"t_plus", lim.t_plus},
                                     {"t_bound", lim.t_bound},
                                     {"ratio", lim.ratio},
                                     {"tolerance_ratio", lim.tolerance_ratio},
                                     {"fitted_exponent", lim.fitted_exponent},
                                     {"decreasing", lim.decreasing},
                                     {"t_bound_ok", lim.t_bound_ok},
                                     {"t_scaling_ok", lim.t_scaling_ok}};
        rep.verdicts.push_back({"limit_zero", lim.pass,
                                "lambda ratio " + fmt(lim.ratio) + " vs tolerance " + fmt(lim.tolerance_ratio) +
                                    ", fitted exponent " + fmt(lim.fitted_exponent) +
                                    (lim.decreasing ? "" : ", not decreasing") + (lim.t_bound_ok ? "" : ", t bound violated") +
                                    (lim.t_scaling_ok ? "" : ", t scaling off")});

        const EnergyCurve* ground = find_curve(curves, Branch::Plus, 1, false);
        if (ground && !ground->points.empty()) {
            const double lbar = cfg.run.lambda_bar ? *cfg.run.lambda_bar : mid_range(*ground);
            const IntersectionReport ir = intersect_with_lambda(ctx, Branch::Plus, lbar, cfg.run.intersect_k, th.c_star.value);
            rep.details["intersections_plus"] = intersections_json(ir);
            const bool ok = ir.hits.size() == cfg.run.intersect_k.size() && ir.hits.size() >= 2 && ir.c_increasing &&
                            ir.norms_monotone;
            rep.verdicts.push_back({"bifurcation_from_zero", ok,
                                    std::to_string(ir.hits.size()) + " intersections at lambda_bar = " + fmt(lbar) +
                                        (ir.c_increasing ? "" : ", c not increasing") +
                                        (ir.norms_monotone ? "" : ", norms not decreasing")});
        }
    }

    if (wants(Branch::Minus) && is_c4_proxy(built.problem.weights)) {
        const EnergyCurve* ground = find_curve(curves, Branch::Minus, 1, false);
        if (ground && !ground->points.empty()) {
            const TraceContext ctx = context_for(inst, Branch::Minus, max_k(cfg.run.intersect_k), params);
            const double lbar = mid_range(*ground);
            const IntersectionReport ir = intersect_with_lambda(ctx, Branch::Minus, lbar, cfg.run.intersect_k, th.c_star.value);
            rep.details["intersections_minus"] = intersections_json(ir);
            const bool ok = ir.hits.size() == cfg.run.intersect_k.size() && ir.hits.size() >= 2 && ir.c_increasing &&
                            ir.norms_monotone;
            rep.verdicts.push_back({"bifurcation_from_infinity", ok,
                                    std::to_string(ir.hits.size()) + " intersections at lambda_bar = " + fmt(lbar) +
                                        (ir.c_increasing ? "" : ", c not increasing") +
                                        (ir.norms_monotone ? "" : ", norms not increasing")});
        }
    }

    if (built.weight) {
        const auto& w = *built.weight;
        ThresholdResult css;
        css.value = w.c0_min;
        css.minimizers = w.minimizers;
        const TraceContext ctx = context_for(inst, Branch::Minus, 1, params);
        const MinusExtension ext = extend_minus_past_cstarstar(ctx, css, cfg.run.delta_fractions, cfg.run.zero_tol);
        json seg = json::array();
        for (const auto& p : ext.segment.points) seg.push_back({{"c", p.c}, {"lambda", p.lambda}});
        rep.details["minus_extension"] = {{"eps", w.eps},
                                          {"c_star_star", ext.c_star_star},
                                          {"lambda_at_c_star_star", ext.lambda_at_c_star_star},
                                          {"segment", seg},
                                          {"continuity_jump", ext.continuity_jump}};
        rep.verdicts.push_back({"cstarstar_zero", ext.zero_at,
                                "|lambda(c**)| = " + fmt(std::abs(ext.lambda_at_c_star_star)) + ", tolerance " +
                                    fmt(cfg.run.zero_tol)});
        rep.verdicts.push_back({"minus_sign_change", ext.positive_before && ext.negative_after && ext.continuity_jump <= 1.0,
                                std::string(ext.positive_before ? "positive before c**" : "not positive before c**") +
                                    (ext.negative_after ? ", negative after" : ", not negative after") +
                                    ", jump " + fmt(ext.continuity_jump)});
    }
    rep.seconds = seconds_since(t0);
    return rep;
}

void write_outputs(const RunReport& report, const OutputConfig& out) {
    namespace fs = std::filesystem;
    const fs::path dir(out.directory);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ConfigError("cannot create output directory " + out.directory + ": " + ec.message());
    auto write = [&](const char* name, const std::string& text) {
        std::ofstream f(dir / name, std::ios::binary);
        if (!f) throw ConfigError("cannot write " + (dir / name).string());
        f << text;
    };
    write("config.echo.json", report.config.dump(2) + "\n");
    if (out.wants("json")) write("report.json", report.to_json(true).dump(2) + "\n");
    if (!report.curves.empty()) {
        if (out.wants("csv")) write("curves.csv", curves_csv(report.curves));
        if (out.wants("svg")) write("diagram.svg", render_svg(report.curves, report.c_star, report.c_star_star));
    }
}

int run_cli(const CliOptions& opts, std::ostream& log, std::ostream& err) {
    try {
        ExperimentConfig cfg;
        if (!opts.config_path.empty()) cfg = ExperimentConfig::load(opts.config_path);
        else if (opts.command != "report") throw ConfigError("--config is required for " + opts.command);
        if (opts.out) cfg.output.directory = *opts.out;
        if (opts.seed) cfg.run.seed = *opts.seed;

        RunReport rep;
        if (opts.command == "report") {
            const auto path = std::filesystem::path(cfg.output.directory) / "report.json";
            std::ifstream in(path);
            if (!in) throw ConfigError("no report.json in " + cfg.output.directory);
            json j;
            try {
                in >> j;
            } catch (const json::exception& e) {
                throw ConfigError(path.string() + " is not valid JSON: " + e.what());
            }
            rep = RunReport::from_json(j);
            OutputConfig oc = cfg.output;
            oc.formats = {"csv", "svg"};
            write_outputs(rep, oc);
            if (!opts.quiet)
                log << "re-rendered " << rep.curves.size() << " curves into " << cfg.output.directory << "\n";
            return kExitOk;
        }
        if (opts.command == "solve") {
            if (!opts.c) throw ConfigError("solve needs --c");
            rep = cmd_solve(cfg, *opts.c, parse_branch(opts.branch), opts.k);
        } else if (opts.command == "trace") {
            rep = cmd_trace(cfg);
        } else if (opts.command == "verify") {
            rep = cmd_verify(cfg);
        } else if (opts.command == "thresholds") {
            rep = cmd_thresholds(cfg);
        } else {
            throw ConfigError("unknown command " + opts.command);
        }
        write_outputs(rep, cfg.output);
        if (!opts.quiet) {
            if (rep.c_star) log << "c*  = " << fmt(*rep.c_star) << "\n";
            if (rep.c_star_star) log << "c** = " << fmt(*rep.c_star_star) << "\n";
            for (const auto& c : rep.curves)
                log << c.label() << " k=" << c.k << ": " << c.points.size() << " points"
                    << (c.truncation_reason.empty() ? "" : " (truncated: " + c.truncation_reason + ")") << "\n";
            for (const auto& v : rep.verdicts)
                log << v.name << ": " << (v.pass ? "pass" : "FAIL") << " (" << v.detail << ")\n";
            log << "outputs written to " << cfg.output.directory << "\n";
        }
        if (opts.command == "solve") return rep.all_pass() ? kExitOk : kExitNonconvergence;
        if (opts.command == "verify" || opts.command == "thresholds") return rep.all_pass() ? kExitOk : kExitVerification;
        return kExitOk;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const Error& e) {
        err << "numerical failure: " << e.what() << "\n";
        return kExitNonconvergence;
    }
}

}  // namespace pec
