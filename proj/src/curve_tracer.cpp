#include "pecurves/curve_tracer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "pecurves/errors.hpp"

namespace pec {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void finalize(EnergyCurve& curve, const FunctionalTriple& triple) {
    const auto& e = triple.exponents();
    curve.monotone_decreasing = true;
    curve.nonincreasing = true;
    curve.max_successive_jump = 0.0;
    const auto& pts = curve.points;
    if (!pts.empty()) {
        curve.first_lambda = pts.front().lambda;
        curve.last_lambda = pts.back().lambda;
    }
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        const double d = pts[i + 1].lambda - pts[i].lambda;
        if (!(d < 0.0)) curve.monotone_decreasing = false;
        if (!(d <= 1e-6 * (1.0 + std::abs(pts[i].lambda)))) curve.nonincreasing = false;
        const double a0 = triple.eval_A(pts[i].record.v), a1 = triple.eval_A(pts[i + 1].record.v);
        const double lip = 1.5 * std::max(e.alpha / std::abs(a0), e.alpha / std::abs(a1));
        const double dc = pts[i + 1].c - pts[i].c;
        if (dc > 0 && std::isfinite(lip)) curve.max_successive_jump = std::max(curve.max_successive_jump, std::abs(d) / (lip * dc));
    }
}

CurvePoint nested_surrogate(const TraceContext& ctx, const SphereConstraint& sc, Branch branch, int k, double c,
                            const std::vector<Vec>& hints, bool chain) {
    if (ctx.basis.k() < k) {
        std::ostringstream os;
        os << "surrogate basis has " << ctx.basis.k() << " bumps, level k = " << k << " needs " << k;
        throw ConfigError(os.str());
    }
    std::vector<Vec> all_hints = hints;
    if (chain && k > 2) {
        CurvePoint lower = nested_surrogate(ctx, sc, branch, k - 1, c, {}, true);
        if (!lower.coeffs.empty()) all_hints.insert(all_hints.begin(), lower.coeffs);
    }
    CurvePoint pt;
    pt.branch = branch;
    pt.k = k;
    pt.c = c;
    pt.surrogate = true;
    const SurrogateResult sr = surrogate_level(sc, c, branch, ctx.basis.prefix(k), ctx.optimizer, all_hints);
    if (!sr.valid) {
        pt.lambda = kInf;
        pt.flags.push_back("surrogate invalid: " + sr.reason);
        return pt;
    }
    pt.lambda = sr.level;
    pt.record = sr.record;
    pt.record.k = k;
    pt.u = sr.u;
    pt.coeffs = sr.coeffs;
    pt.flags = pt.record.flags;
    return pt;
}

}  // namespace

std::string EnergyCurve::label() const {
    return std::string(negated_a ? "negA_" : "") + to_string(branch);
}

CurvePoint evaluate_level(const TraceContext& ctx, Branch branch, int k, double c, const std::vector<Vec>& warm,
                          const std::vector<Vec>& hints) {
    const SphereConstraint sc = SphereConstraint::from(ctx.instance, cone_for(branch));
    if (k >= 2) return nested_surrogate(ctx, sc, branch, k, c, hints, true);
    if (k < 1) throw ConfigError("level index k must be at least 1");
    CurvePoint pt;
    pt.branch = branch;
    pt.k = 1;
    pt.c = c;
    const LevelResult lr = minimize_ground_level(sc, c, branch, ctx.optimizer, warm);
    pt.record = lr.record;
    pt.record.k = 1;
    pt.flags = lr.record.flags;
    if (lr.empty) {
        pt.lambda = kInf;
        return pt;
    }
    pt.lambda = lr.level;
    pt.u = lr.u;
    return pt;
}

std::vector<EnergyCurve> trace_family(const TraceContext& ctx, Branch branch, const std::vector<int>& ks_in,
                                      const std::vector<double>& c_grid) {
    std::vector<int> ks = ks_in;
    std::sort(ks.begin(), ks.end());
    ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
    for (std::size_t i = 1; i < c_grid.size(); ++i)
        if (!(c_grid[i] > c_grid[i - 1])) throw ConfigError("c grid must be strictly increasing");
    const int kmax = ks.empty() ? 0 : ks.back();

    // Surrogate levels for every k in [2, kmax] are needed to keep the family nested.
    std::vector<EnergyCurve> all(static_cast<std::size_t>(std::max(kmax, 1)));
    for (int k = 1; k <= kmax; ++k) {
        all[static_cast<std::size_t>(k - 1)].branch = branch;
        all[static_cast<std::size_t>(k - 1)].k = k;
    }
    const bool need_ground = std::find(ks.begin(), ks.end(), 1) != ks.end();
    const SphereConstraint sc = SphereConstraint::from(ctx.instance, cone_for(branch));
    std::vector<char> alive(all.size(), 1);
    for (double c : c_grid) {
        Vec lower_coeffs;
        for (int k = 1; k <= kmax; ++k) {
            auto& curve = all[static_cast<std::size_t>(k - 1)];
            if (!alive[static_cast<std::size_t>(k - 1)] || (k == 1 && !need_ground)) continue;
            const CurvePoint* prev = curve.points.empty() ? nullptr : &curve.points.back();
            CurvePoint pt;
            try {
                if (k == 1) {
                    std::vector<Vec> warm;
                    if (prev) warm.push_back(prev->u);
                    pt = evaluate_level(ctx, branch, 1, c, warm);
                } else {
                    std::vector<Vec> hints;
                    if (!lower_coeffs.empty()) hints.push_back(lower_coeffs);
                    if (prev) hints.push_back(prev->coeffs);
                    pt = nested_surrogate(ctx, sc, branch, k, c, hints, false);
                    lower_coeffs = pt.coeffs;
                }
            } catch (const Error& err) {
                std::ostringstream os;
                os << "c = " << c << ": " << err.what();
                curve.truncation_reason = os.str();
                alive[static_cast<std::size_t>(k - 1)] = 0;
                continue;
            }
            if (!std::isfinite(pt.lambda)) {
                std::ostringstream os;
                os << "c = " << c << ": " << (pt.flags.empty() ? "no finite level" : pt.flags.front());
                curve.truncation_reason = os.str();
                alive[static_cast<std::size_t>(k - 1)] = 0;
                continue;
            }
            curve.points.push_back(std::move(pt));
        }
    }
    std::vector<EnergyCurve> out;
    for (int k : ks) {
        auto& curve = all[static_cast<std::size_t>(k - 1)];
        finalize(curve, ctx.instance.triple);
        out.push_back(std::move(curve));
    }
    return out;
}

EnergyCurve trace_curve(const TraceContext& ctx, Branch branch, int k, const std::vector<double>& c_grid) {
    std::vector<int> ks;
    for (int j = (k >= 2 ? 2 : 1); j <= k; ++j) ks.push_back(j);
    auto fam = trace_family(ctx, branch, ks, c_grid);
    return std::move(fam.back());
}

EnergyCurve trace_curve_negative_side(const TraceContext& ctx, Branch branch, int k, const std::vector<double>& c_grid) {
    TraceContext flipped{ctx.instance.flipped(), ctx.optimizer, {}};
    if (ctx.basis.k() > 0) flipped.basis = make_surrogate_basis(flipped.instance, cone_for(branch), ctx.basis.k());
    EnergyCurve curve = trace_curve(flipped, branch, k, c_grid);
    curve.negated_a = true;
    for (auto& p : curve.points) {
        p.lambda = -p.lambda;
        p.record.lambda = -p.record.lambda;
    }
    if (curve.first_lambda) curve.first_lambda = -*curve.first_lambda;
    if (curve.last_lambda) curve.last_lambda = -*curve.last_lambda;
    return curve;
}

std::vector<double> geometric_grid(double lo, double hi, int n) {
    if (n < 2) throw ConfigError("a c grid needs at least two points");
    if (!(lo * hi > 0.0)) throw ConfigError("geometric grid endpoints must be nonzero with the same sign");
    std::vector<double> out(static_cast<std::size_t>(n));
    const double s = lo < 0 ? -1.0 : 1.0;
    const double l0 = std::log(std::abs(lo)), l1 = std::log(std::abs(hi));
    for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = s * std::exp(l0 + (l1 - l0) * i / (n - 1));
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<double> linear_grid(double lo, double hi, int n) {
    if (n < 2) throw ConfigError("a c grid needs at least two points");
    std::vector<double> out(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
    std::sort(out.begin(), out.end());
    return out;
}

LimitReport limit_check_zero(const TraceContext& ctx, int k, const std::vector<double>& c_values, double tol_ratio) {
    LimitReport rep;
    rep.tolerance_ratio = tol_ratio;
    std::vector<double> cs = c_values;
    std::sort(cs.begin(), cs.end());
    const auto& e = ctx.instance.triple.exponents();
    Vec prev_u, prev_coeffs;
    for (double c : cs) {
        if (!(c < 0.0)) throw ConfigError("limit check levels must be negative");
        std::vector<Vec> warm, hints;
        if (!prev_u.empty()) warm.push_back(prev_u);
        if (!prev_coeffs.empty()) hints.push_back(prev_coeffs);
        const CurvePoint pt = evaluate_level(ctx, Branch::Plus, k, c, warm, hints);
        prev_u = pt.u;
        prev_coeffs = pt.coeffs;
        rep.c.push_back(c);
        rep.lambda.push_back(pt.lambda);
        rep.t_plus.push_back(pt.record.t_root);
        const RayData ray = pt.u.empty() ? RayData{} : RayData::from(e, ctx.instance.triple.evaluate(pt.u));
        rep.t_bound.push_back(pt.u.empty() ? 0.0 : t_plus_upper_bound(ray, c));
    }
    const std::size_t m = rep.c.size();
    rep.decreasing = true;
    for (std::size_t i = 0; i + 1 < m; ++i)
        if (!(rep.lambda[i + 1] < rep.lambda[i])) rep.decreasing = false;
    rep.ratio = m ? rep.lambda.back() / rep.lambda.front() : 0.0;
    rep.below_tolerance = m && std::isfinite(rep.ratio) && rep.lambda.back() <= tol_ratio * rep.lambda.front();
    rep.t_bound_ok = m > 0;
    double smin = kInf, smax = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        if (!(rep.t_plus[i] <= rep.t_bound[i] * (1.0 + 1e-12))) rep.t_bound_ok = false;
        const double s = rep.t_plus[i] / std::pow(std::abs(rep.c[i]), 1.0 / e.eta);
        smin = std::min(smin, s);
        smax = std::max(smax, s);
    }
    rep.t_scaling_ok = m > 0 && smin > 0 && smax <= 3.0 * smin;
    if (m >= 2) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (std::size_t i = 0; i < m; ++i) {
            const double x = std::log(std::abs(rep.c[i])), y = std::log(std::abs(rep.lambda[i]));
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        rep.fitted_exponent = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    }
    rep.pass = rep.decreasing && rep.below_tolerance && rep.t_bound_ok && rep.t_scaling_ok;
    return rep;
}

IntersectionReport intersect_with_lambda(const TraceContext& ctx, Branch branch, double lambda_bar,
                                         const std::vector<int>& ks, double c_star) {
    IntersectionReport rep;
    rep.branch = branch;
    rep.lambda_bar = lambda_bar;
    if (!(c_star < 0.0)) throw ConfigError("intersect_with_lambda needs the negative threshold c*");
    if (branch == Branch::Plus && !(lambda_bar > 0.0))
        throw ConfigError("plus-branch intersections need lambda_bar > 0");

    for (int k : ks) {
        auto level = [&](double c, const Vec& warm) {
            std::vector<Vec> w;
            if (!warm.empty()) w.push_back(warm);
            return evaluate_level(ctx, branch, k, c, w);
        };
        double lo = 0.98 * c_star;
        double hi = branch == Branch::Plus ? -1e-10 * std::abs(c_star) : std::abs(c_star);
        CurvePoint plo, phi_pt;
        try {
            plo = level(lo, {});
            phi_pt = level(hi, plo.u);
            if (branch == Branch::Minus) {
                for (int i = 0; i < 60 && std::isfinite(phi_pt.lambda) && phi_pt.lambda >= lambda_bar; ++i) {
                    hi *= 2.0;
                    phi_pt = level(hi, phi_pt.u);
                }
            }
        } catch (const Error& err) {
            rep.skipped.push_back("k = " + std::to_string(k) + ": " + err.what());
            continue;
        }
        if (!(plo.lambda > lambda_bar && phi_pt.lambda < lambda_bar)) {
            std::ostringstream os;
            os << "k = " << k << ": lambda_bar = " << lambda_bar << " outside the level range [" << phi_pt.lambda
               << ", " << plo.lambda << "] on the bracket [" << lo << ", " << hi << "]";
            rep.skipped.push_back(os.str());
            continue;
        }
        CurvePoint mid = plo;
        for (int it = 0; it < 60 && hi - lo > 1e-11 * (1.0 + std::abs(lo)); ++it) {
            const double cm = 0.5 * (lo + hi);
            mid = level(cm, mid.u);
            if (!std::isfinite(mid.lambda)) break;
            if (mid.lambda > lambda_bar) lo = cm;
            else hi = cm;
        }
        rep.hits.push_back({k, mid.c, mid.lambda, mid.record});
    }
    rep.c_increasing = rep.hits.size() >= 2;
    rep.norms_monotone = rep.hits.size() >= 2;
    for (std::size_t i = 0; i + 1 < rep.hits.size(); ++i) {
        if (!(rep.hits[i + 1].c > rep.hits[i].c)) rep.c_increasing = false;
        const double n0 = rep.hits[i].record.u_norm, n1 = rep.hits[i + 1].record.u_norm;
        if (branch == Branch::Plus ? !(n1 < n0) : !(n1 > n0)) rep.norms_monotone = false;
    }
    return rep;
}

MinusExtension extend_minus_past_cstarstar(const TraceContext& ctx, const ThresholdResult& css,
                                           const std::vector<double>& fractions, double zero_tol) {
    for (std::size_t i = 0; i < css.minimizers.size(); ++i) {
        const double a = ctx.instance.triple.eval_A(css.minimizers[i]);
        if (!(a > 0.0)) {
            std::ostringstream os;
            os << "the c0-minimizer " << i << " has A(u*) = " << a
               << " <= 0, so the minimizer set is not inside C_A; refusing to extend past c**";
            throw Error(os.str());
        }
    }
    std::vector<double> fr = fractions;
    if (std::find(fr.begin(), fr.end(), 0.0) == fr.end()) fr.push_back(0.0);
    std::sort(fr.begin(), fr.end());

    MinusExtension ext;
    ext.c_star_star = css.value;
    ext.segment.branch = Branch::Minus;
    ext.segment.k = 1;
    Vec prev;
    for (double f : fr) {
        const double c = css.value * (1.0 + f);
        std::vector<Vec> warm = css.minimizers;
        if (!prev.empty()) warm.insert(warm.begin(), prev);
        CurvePoint pt = evaluate_level(ctx, Branch::Minus, 1, c, warm);
        prev = pt.u;
        if (f == 0.0) ext.lambda_at_c_star_star = pt.lambda;
        ext.segment.points.push_back(std::move(pt));
    }
    finalize(ext.segment, ctx.instance.triple);
    ext.positive_before = true;
    ext.negative_after = true;
    for (const auto& p : ext.segment.points) {
        if (p.c < css.value && !(p.lambda > 0.0)) ext.positive_before = false;
        if (p.c > css.value && !(p.lambda < 0.0)) ext.negative_after = false;
    }
    ext.zero_at = std::abs(ext.lambda_at_c_star_star) <= zero_tol;
    ext.continuity_jump = ext.segment.max_successive_jump;
    ext.pass = ext.positive_before && ext.zero_at && ext.negative_after && ext.continuity_jump <= 1.0;
    return ext;
}

}  // namespace pec
