// Acceptance gate: one PASS/FAIL line per criterion.
//   pecurves_acceptance --criterion N    (N = 1..9)
//   pecurves_acceptance                  (all of them)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fibering_oracle.hpp"
#include "pecurves/commands.hpp"
#include "pecurves/errors.hpp"

using namespace pec;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
    bool pass = false;
    std::string detail;
};

double elapsed(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string num(double x, int prec = 6) {
    std::ostringstream os;
    os.precision(prec);
    os << x;
    return os.str();
}

// --- instances ---------------------------------------------------------------

ExperimentConfig base_config() {
    ExperimentConfig cfg;  // defaults: 127 nodes, a = sin(2 pi x) + 0.3, b = cos(2 pi x) + 0.2, p = 2, (1.5, 4)
    return cfg;
}

Instance sign_changing() { return build_problem(base_config()).instance; }

struct Named {
    std::string name;
    ExperimentConfig cfg;
};

std::vector<Named> all_instances() {
    std::vector<Named> out;
    out.push_back({"sign_changing_1d", base_config()});
    auto toy = base_config();
    toy.problem.nodes = {63};
    toy.problem.a = "1";
    toy.problem.b = "1";
    out.push_back({"constant_1d", toy});
    auto c4 = base_config();
    c4.problem.a = "1 + 0.5*sin(2*pi*x)";
    out.push_back({"c4_proxy_1d", c4});
    auto p3 = base_config();
    p3.problem.p = 3.0;
    p3.problem.alpha = 1.5;
    p3.problem.beta = 5.0;
    out.push_back({"p3_1d", p3});
    auto sq = base_config();
    sq.problem.dimension = 2;
    sq.problem.nodes = {32, 32};
    sq.problem.domain = {{0.0, 1.0}, {0.0, 1.0}};
    sq.problem.a = "sin(2*pi*x)*sin(pi*y) + 0.3";
    out.push_back({"square_2d_32x32", sq});
    auto tr = base_config();
    tr.problem.type = "truncated_rn";
    tr.problem.L = 8.0;
    tr.problem.a = "exp(-x^2)";
    tr.problem.b = "exp(-x^2/4)*(1 - x^2/4)";
    out.push_back({"truncated_rn_1d", tr});
    return out;
}

// --- criteria ----------------------------------------------------------------

Outcome structural_identities() {
    const auto t0 = Clock::now();
    const Instance inst = sign_changing();
    const auto& t = inst.triple;
    const auto& e = t.exponents();
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u11(-1.0, 1.0), us(0.1, 4.0), uc(-20.0, 20.0);
    double worst_h = 0, worst_euler = 0, worst_level = 0, worst_nehari = 0;
    int level_cases = 0, nehari_cases = 0;
    const int cases = 10000;
    Vec u(t.dim()), su(t.dim()), gn(t.dim()), ga(t.dim()), gb(t.dim());
    for (int i = 0; i < cases; ++i) {
        for (auto& x : u) x = u11(rng);
        const double s = us(rng);
        for (std::size_t j = 0; j < u.size(); ++j) su[j] = s * u[j];
        const auto v = t.evaluate(u), w = t.evaluate(su);
        worst_h = std::max({worst_h, std::abs(w.n - std::pow(s, e.eta) * v.n) / std::abs(w.n),
                            std::abs(w.a - std::pow(s, e.alpha) * v.a) / (std::abs(w.a) + std::pow(s, e.alpha) * 1e-3),
                            std::abs(w.b - std::pow(s, e.beta) * v.b) / (std::abs(w.b) + std::pow(s, e.beta) * 1e-3)});
        t.gradients(u, gn, ga, gb);
        worst_euler = std::max({worst_euler, std::abs(dot(gn, u) - e.eta * v.n) / v.n,
                                std::abs(dot(ga, u) - e.alpha * v.a) / (std::abs(v.a) + 1e-3),
                                std::abs(dot(gb, u) - e.beta * v.b) / (std::abs(v.b) + 1e-3)});
        if (std::abs(v.a) > 1e-4) {
            const double c = uc(rng);
            const double lam = lambda_of(t, c, u);
            worst_level = std::max(worst_level, std::abs(phi(t, lam, u) - c) / (1.0 + std::abs(c)));
            ++level_cases;
            if (v.a > 0) {
                const RayData ray = RayData::from(e, v);
                const auto prof = classify_and_solve(ray, c);
                for (auto root : {prof.t_plus, prof.t_minus})
                    if (root && !prof.degenerate) {
                        worst_nehari = std::max(worst_nehari, nehari_defect(ray, c, *root));
                        Vec tu(u.size());
                        for (std::size_t j = 0; j < u.size(); ++j) tu[j] = *root * u[j];
                        const double lam_root = lambda_of(t, c, tu);
                        const Vec g = phi_grad(t, lam_root, tu);
                        // on the Nehari set the radial derivative of Phi vanishes
                        const double radial = dot(g, tu);
                        worst_nehari = std::max(worst_nehari, std::abs(radial) / (t.eval_N(tu) + std::abs(lam_root * t.eval_A(tu)) + std::abs(t.eval_B(tu))));
                        ++nehari_cases;
                    }
            }
        }
    }
    const double secs = elapsed(t0);
    Outcome o;
    o.pass = worst_h <= 1e-12 && worst_euler <= 1e-10 && worst_level <= 1e-10 && worst_nehari <= 1e-10 &&
             level_cases > cases / 2 && nehari_cases > 100 && secs < 10.0;
    o.detail = std::to_string(cases) + " cases: homogeneity " + num(worst_h) + ", Euler " + num(worst_euler) +
               ", level identity " + num(worst_level) + " (" + std::to_string(level_cases) + "), Nehari defect " +
               num(worst_nehari) + " (" + std::to_string(nehari_cases) + " roots), " + num(secs, 3) + " s";
    return o;
}

Outcome fibering_oracle() {
    std::mt19937_64 rng(2);
    int mismatched = 0;
    double worst_root = 0;
    const int cases = 10000;
    for (int i = 0; i < cases; ++i) {
        const auto r = oracle::random_ray(rng);
        const auto ref = oracle::classify(r);
        const auto prof = classify_and_solve(oracle::to_ray(r), r.c);
        if (prof.kind != ref.kind) {
            ++mismatched;
            continue;
        }
        if (ref.t_plus) worst_root = std::max(worst_root, std::abs(*prof.t_plus - *ref.t_plus) / *ref.t_plus);
        if (ref.t_minus) worst_root = std::max(worst_root, std::abs(*prof.t_minus - *ref.t_minus) / *ref.t_minus);
    }
    // toy ray (1, 1, 1) at c = -0.01: 0.625 s^2 - 0.25 s + 0.015 = 0 in s = t^2
    const RayData toy{1.0, 1.0, 1.0, {1.5, 2.0, 4.0}};
    const auto prof = classify_and_solve(toy, -0.01);
    const double disc = std::sqrt(0.0625 - 4 * 0.625 * 0.015);
    const double tp = std::sqrt((0.25 - disc) / 1.25), tm = std::sqrt((0.25 + disc) / 1.25);
    const auto zero = zero_level_pair(toy);
    const double toy_err = std::max({std::abs(*prof.t_plus - tp), std::abs(*prof.t_minus - tm),
                                     std::abs(*prof.extremal_c + 1.0 / 60.0), std::abs(zero.t - 1.0),
                                     std::abs(zero.c - 0.25)});
    const double printed_err = std::max(std::abs(*prof.t_plus - 0.271129), std::abs(*prof.t_minus - 0.571392));
    Outcome o;
    o.pass = mismatched == 0 && worst_root <= 1e-9 && toy_err <= 1e-9 && printed_err <= 1e-5;
    o.detail = std::to_string(cases) + " rays, " + std::to_string(mismatched) + " label mismatches, worst root error " +
               num(worst_root) + "; toy t+ = " + num(*prof.t_plus, 10) + ", t- = " + num(*prof.t_minus, 10) +
               " (closed form error " + num(toy_err) + ", printed-value error " + num(printed_err) + ")";
    return o;
}

Outcome thresholds_sign() {
    Outcome o{true, ""};
    for (const auto& ni : all_instances()) {
        const auto t0 = Clock::now();
        const BuiltProblem bp = build_problem(ni.cfg);
        const auto both = mask_and(bp.instance.nodes_a_pos, bp.instance.nodes_b_pos);
        if (std::none_of(both.begin(), both.end(), [](char c) { return c != 0; })) continue;
        try {
            const Thresholds th = compute_thresholds(bp.instance, ni.cfg.run.optimizer());
            const double secs = elapsed(t0);
            const bool ok = th.c_star.value < -1e-10 && th.c_star_star.value > 1e-10 && secs < 60.0;
            o.pass = o.pass && ok;
            o.detail += ni.name + " c*=" + num(th.c_star.value) + " c**=" + num(th.c_star_star.value) + " (" +
                        num(secs, 2) + " s)" + (ok ? "" : " FAIL") + "; ";
        } catch (const Error& e) {
            o.pass = false;
            o.detail += ni.name + " error: " + e.what() + "; ";
        }
    }
    return o;
}

struct Sweep {
    Thresholds th;
    std::vector<double> grid;
    std::vector<EnergyCurve> plus, minus;
    double seconds = 0;
};

const Sweep& acceptance_sweep() {
    static const Sweep sweep = [] {
        const auto t0 = Clock::now();
        Sweep s;
        const ExperimentConfig cfg = base_config();
        const Instance inst = sign_changing();
        const auto params = cfg.run.optimizer();
        s.th = compute_thresholds(inst, params);
        s.grid = geometric_grid(0.9 * s.th.c_star.value, -1e-3, 12);
        TraceContext plus{inst, params, make_surrogate_basis(inst, ConeTag::APos, 3)};
        TraceContext minus{inst, params, make_surrogate_basis(inst, ConeTag::APosBPos, 3)};
        s.plus = trace_family(plus, Branch::Plus, {1, 2, 3}, s.grid);
        s.minus = trace_family(minus, Branch::Minus, {1, 2, 3}, s.grid);
        s.seconds = elapsed(t0);
        return s;
    }();
    return sweep;
}

Outcome curve_structure() {
    const auto t0 = Clock::now();
    const Sweep& s = acceptance_sweep();
    const auto& p1 = s.plus[0];
    const auto& m1 = s.minus[0];

    bool positive = p1.points.size() == s.grid.size();
    for (const auto& p : p1.points) positive = positive && p.lambda > 0.0;
    const bool a_ok = p1.monotone_decreasing && positive;

    const ExperimentConfig cfg = base_config();
    TraceContext ctx{sign_changing(), cfg.run.optimizer(), {}};
    const LimitReport lim = limit_check_zero(ctx, 1, {-1e-2, -1e-3, -1e-4}, 0.05);
    const bool b_ok = lim.lambda.size() == 3 && lim.lambda[2] < 0.05 * lim.lambda[0];

    bool c_ok = p1.points.size() == m1.points.size() && !p1.points.empty();
    for (std::size_t i = 0; c_ok && i < p1.points.size(); ++i) c_ok = p1.points[i].lambda < m1.points[i].lambda;

    bool d_ok = true;
    for (const auto* fam : {&s.plus, &s.minus}) {
        for (std::size_t k = 1; k < fam->size(); ++k) {
            const auto& cur = (*fam)[k];
            const auto& lower = (*fam)[k - 1];
            d_ok = d_ok && cur.monotone_decreasing && cur.points.size() == s.grid.size() &&
                   lower.points.size() == s.grid.size();
            for (std::size_t i = 0; d_ok && i < cur.points.size(); ++i)
                d_ok = lower.points[i].lambda <= cur.points[i].lambda + 1e-9 * (1 + std::abs(cur.points[i].lambda));
        }
    }
    const double secs = s.seconds + elapsed(t0);
    Outcome o;
    o.pass = a_ok && b_ok && c_ok && d_ok && secs < 600.0;
    o.detail = std::string("(a) ") + (a_ok ? "pass" : "FAIL") + ": plus k=1 strictly decreasing and positive on " +
               std::to_string(p1.points.size()) + " points from c=" + num(s.grid.front()) + " to " + num(s.grid.back()) +
               "; (b) " + (b_ok ? "pass" : "FAIL") + ": lambda(-1e-4)/lambda(-1e-2) = " + num(lim.ratio) +
               " vs 0.05, fitted exponent " + num(lim.fitted_exponent, 4) + " (1 - alpha/eta = 0.25 gives 0.316)" +
               "; (c) " + (c_ok ? "pass" : "FAIL") + ": plus < minus at all shared c" + "; (d) " +
               (d_ok ? "pass" : "FAIL") + ": surrogates nested in k and decreasing in c; " + num(secs, 3) + " s";
    return o;
}

Outcome energy_defects() {
    const Sweep& s = acceptance_sweep();
    std::vector<CriticalPointRecord> records;
    for (const auto* c : {&s.plus[0], &s.minus[0]})
        for (const auto& p : c->points) records.push_back(p.record);
    // ground levels on the remaining instances, one c per branch
    for (const auto& ni : all_instances()) {
        if (ni.name == "sign_changing_1d") continue;
        const BuiltProblem bp = build_problem(ni.cfg);
        auto params = ni.cfg.run.optimizer();
        if (ni.cfg.problem.dimension == 2) params.multistart = 8;
        const Thresholds th = compute_thresholds(bp.instance, params);
        TraceContext ctx{bp.instance, params, {}};
        for (Branch b : {Branch::Plus, Branch::Minus})
            records.push_back(evaluate_level(ctx, b, 1, 0.5 * th.c_star.value).record);
    }
    std::size_t converged = 0, bad = 0;
    double worst_res = 0, worst_def = 0;
    for (const auto& r : records) {
        if (!r.converged) continue;
        ++converged;
        worst_res = std::max(worst_res, r.residual_grad);
        worst_def = std::max(worst_def, r.energy_defect / (1 + std::abs(r.c)));
        if (!(r.energy_defect <= 1e-8 * (1 + std::abs(r.c))) || !(r.residual_grad <= 1e-6)) ++bad;
    }
    Outcome o;
    o.pass = bad == 0 && converged == records.size();
    o.detail = std::to_string(converged) + "/" + std::to_string(records.size()) +
               " ground-level points converged, worst relative energy defect " + num(worst_def) +
               ", worst gradient residual " + num(worst_res) + ", violations " + std::to_string(bad);
    return o;
}

Outcome cstarstar_zero() {
    auto cfg = base_config();
    cfg.problem.conjecture = ConjectureConfig{};
    const BuiltProblem bp = build_problem(cfg);
    const auto& w = *bp.weight;
    ThresholdResult css;
    css.value = w.c0_min;
    css.minimizers = w.minimizers;
    TraceContext ctx{bp.instance, cfg.run.optimizer(), {}};
    const MinusExtension ext = extend_minus_past_cstarstar(ctx, css, {-0.05, 0.0, 0.05}, 1e-4);
    const auto& pts = ext.segment.points;
    Outcome o;
    o.pass = pts.size() == 3 && pts[0].lambda > 0 && std::abs(pts[1].lambda) <= 1e-4 && pts[2].lambda < 0;
    o.detail = "eps = " + num(w.eps) + ", min A over the c0-minimizers " +
               num(*std::min_element(w.a_at_minimizers.begin(), w.a_at_minimizers.end())) + ", c** = " +
               num(w.c0_min, 10) + ": lambda(0.95 c**) = " + num(pts[0].lambda) + ", lambda(c**) = " +
               num(pts[1].lambda) + ", lambda(1.05 c**) = " + num(pts[2].lambda);
    return o;
}

Outcome bifurcation_sequences() {
    const Sweep& s = acceptance_sweep();
    const ExperimentConfig cfg = base_config();
    const Instance inst = sign_changing();
    TraceContext plus{inst, cfg.run.optimizer(), make_surrogate_basis(inst, ConeTag::APos, 3)};
    const double lbar = 0.5 * (s.plus[0].points.front().lambda + s.plus[0].points.back().lambda);
    const auto ip = intersect_with_lambda(plus, Branch::Plus, lbar, {1, 2, 3}, s.th.c_star.value);
    const bool plus_ok = ip.hits.size() >= 3 && ip.c_increasing && ip.norms_monotone && ip.hits.back().c < 0;

    auto c4 = base_config();
    c4.problem.a = "1 + 0.5*sin(2*pi*x)";
    const Instance ci = build_problem(c4).instance;
    const Thresholds cth = compute_thresholds(ci, c4.run.optimizer());
    TraceContext minus{ci, c4.run.optimizer(), make_surrogate_basis(ci, ConeTag::APosBPos, 3)};
    const auto ground = trace_curve(minus, Branch::Minus, 1, linear_grid(0.9 * cth.c_star.value, 2.0 * cth.c_star_star.value, 8));
    const double mbar = 0.5 * (ground.points.front().lambda + ground.points.back().lambda);
    const auto im = intersect_with_lambda(minus, Branch::Minus, mbar, {1, 2, 3}, cth.c_star.value);
    const bool minus_ok = im.hits.size() >= 3 && im.c_increasing && im.norms_monotone;

    auto list = [](const IntersectionReport& r) {
        std::string out;
        for (const auto& h : r.hits) out += "(k=" + std::to_string(h.k) + ", c=" + num(h.c) + ", |v|=" + num(h.record.u_norm) + ")";
        for (const auto& sk : r.skipped) out += " skipped: " + sk;
        return out;
    };
    Outcome o;
    o.pass = plus_ok && minus_ok;
    o.detail = std::string("plus ") + (plus_ok ? "pass" : "FAIL") + " at lambda_bar " + num(lbar) + " " + list(ip) +
               "; minus (a = 1 + 0.5 sin 2 pi x) " + (minus_ok ? "pass" : "FAIL") + " at lambda_bar " + num(mbar) + " " +
               list(im);
    return o;
}

Outcome sign_flip() {
    const ExperimentConfig cfg = base_config();
    const Instance inst = sign_changing();
    auto params = cfg.run.optimizer();
    params.multistart = 16;
    auto flipped_cfg = cfg;
    flipped_cfg.problem.a = "-(" + cfg.problem.a + ")";
    const Instance manual = build_problem(flipped_cfg).instance;
    const Thresholds th = compute_thresholds(manual, params);
    const auto grid = geometric_grid(0.9 * th.c_star.value, -1e-3, 6);

    TraceContext ctx{inst, params, make_surrogate_basis(inst, ConeTag::APos, 2)};
    double worst = 0;
    std::size_t compared = 0;
    for (Branch b : {Branch::Plus, Branch::Minus}) {
        TraceContext ref_ctx{manual, params, make_surrogate_basis(manual, cone_for(b), 2)};
        for (int k : {1, 2}) {
            const auto neg = trace_curve_negative_side(ctx, b, k, grid);
            const auto ref = trace_curve(ref_ctx, b, k, grid);
            if (neg.points.size() != ref.points.size()) return {false, "curve lengths differ"};
            for (std::size_t i = 0; i < ref.points.size(); ++i) {
                worst = std::max(worst, std::abs(neg.points[i].lambda + ref.points[i].lambda) /
                                            (1 + std::abs(ref.points[i].lambda)));
                ++compared;
            }
        }
    }
    return {worst <= 1e-10 && compared > 0,
            std::to_string(compared) + " shared points (plus/minus, k = 1, 2), worst |lambda_neg + lambda_ref| / (1 + |lambda|) = " +
                num(worst)};
}

Outcome gradient_checks() {
    Outcome o{true, ""};
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u11(-1.0, 1.0), ul(-3.0, 3.0);
    for (const auto& ni : all_instances()) {
        const BuiltProblem bp = build_problem(ni.cfg);
        const auto& t = bp.instance.triple;
        double worst = 0;
        const int points = 100;
        Vec u(t.dim()), up(t.dim()), um(t.dim()), fd(t.dim());
        for (int k = 0; k < points; ++k) {
            for (auto& x : u) x = u11(rng);
            const double lam = ul(rng);
            const Vec g = phi_grad(t, lam, u);
            // central differences on a random subset of coordinates for the large 2D instance
            const std::size_t stride = t.dim() > 256 ? 7 : 1;
            double num2 = 0, den2 = 0;
            for (std::size_t i = static_cast<std::size_t>(k) % stride; i < t.dim(); i += stride) {
                const double h = 1e-6;
                up = u;
                um = u;
                up[i] += h;
                um[i] -= h;
                const double d = (phi(t, lam, up) - phi(t, lam, um)) / (2 * h);
                num2 += (d - g[i]) * (d - g[i]);
                den2 += g[i] * g[i];
            }
            worst = std::max(worst, std::sqrt(num2 / den2));
        }
        const bool ok = worst <= 1e-5;
        o.pass = o.pass && ok;
        o.detail += ni.name + " " + num(worst, 3) + (ok ? "" : " FAIL") + "; ";
    }
    o.detail = "worst relative gradient error over 100 points: " + o.detail;
    return o;
}

const std::vector<std::pair<int, std::function<Outcome()>>>& criteria() {
    static const std::vector<std::pair<int, std::function<Outcome()>>> list{
        {1, structural_identities}, {2, fibering_oracle},       {3, thresholds_sign},
        {4, curve_structure},       {5, energy_defects},        {6, cstarstar_zero},
        {7, bifurcation_sequences}, {8, sign_flip},             {9, gradient_checks}};
    return list;
}

}  // namespace

int main(int argc, char** argv) {
    int only = 0;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) only = std::atoi(argv[++i]);
        else {
            std::fprintf(stderr, "usage: %s [--criterion N]\n", argv[0]);
            return 2;
        }
    }
    bool all_pass = true;
    for (const auto& [id, fn] : criteria()) {
        if (only && id != only) continue;
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        std::printf("criterion %d: %s %s\n", id, o.pass ? "PASS" : "FAIL", o.detail.c_str());
        std::fflush(stdout);
        all_pass = all_pass && o.pass;
    }
    return all_pass ? 0 : 1;
}
