#include "pecurves/fibering.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "pecurves/errors.hpp"

namespace pec {

const char* to_string(FiberCase c) {
    switch (c) {
        case FiberCase::NoCritical: return "NO_CRITICAL";
        case FiberCase::UniqueMin: return "UNIQUE_MIN";
        case FiberCase::UniqueMax: return "UNIQUE_MAX";
        case FiberCase::TwoRoots: return "TWO_ROOTS";
    }
    return "?";
}

namespace {

void require_a(const RayData& ray) {
    if (ray.a == 0.0) throw DomainError("fibering map undefined: A(u) = 0");
}

void require_b_positive(const RayData& ray, const char* what) {
    if (!(ray.b > 0.0)) throw DomainError(std::string(what) + " requires B(u) > 0");
}

// Bisection on a sign-changing bracket of g, followed by one Newton step that
// is kept only if it stays inside the bracket and lowers |g|.
double solve_bracket(const RayData& ray, double c, double lo, double hi) {
    const auto& e = ray.exponents;
    double glo = nehari_g(ray, c, lo);
    const double ghi = nehari_g(ray, c, hi);
    if (glo == 0.0) return lo;
    if (ghi == 0.0) return hi;
    if ((glo < 0) == (ghi < 0)) {
        std::ostringstream os;
        os << "root bracket [" << lo << ", " << hi << "] has no sign change (g = " << glo << ", " << ghi << ")";
        throw NumericalError(os.str());
    }
    std::vector<std::pair<double, double>> history;
    constexpr int kMaxIter = 400;
    int it = 0;
    for (; it < kMaxIter; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi || hi - lo <= 4e-16 * hi) break;
        const double gm = nehari_g(ray, c, mid);
        if (gm == 0.0) return mid;
        if ((gm < 0) == (glo < 0)) {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
        }
        if (it >= kMaxIter - 4) history.emplace_back(lo, hi);
    }
    if (it == kMaxIter) {
        std::ostringstream os;
        os << "fibering root bisection did not converge; last brackets:";
        for (auto [l, h] : history) os << " [" << l << ", " << h << "]";
        throw NumericalError(os.str());
    }
    double t = 0.5 * (lo + hi);
    const double gt = nehari_g(ray, c, t);
    const double dg = (e.eta - e.alpha) * ray.n * std::pow(t, e.eta - 1.0) -
                      (e.beta - e.alpha) * ray.b * std::pow(t, e.beta - 1.0);
    if (dg != 0.0) {
        const double tn = t - gt / dg;
        if (tn > lo && tn < hi && std::abs(nehari_g(ray, c, tn)) < std::abs(gt)) t = tn;
    }
    return t;
}

double grow_until(const RayData& ray, double c, double start, bool want_negative) {
    double t = start;
    for (int i = 0; i < 2000; ++i) {
        const double g = nehari_g(ray, c, t);
        if (want_negative ? g < 0 : g > 0) return t;
        t *= 2.0;
    }
    throw NumericalError("could not bracket the fibering root from above");
}

}  // namespace

double fibering_value(const RayData& ray, double c, double t) {
    require_a(ray);
    const auto& e = ray.exponents;
    return (std::pow(t, e.eta - e.alpha) * ray.n / e.eta - std::pow(t, e.beta - e.alpha) * ray.b / e.beta -
            std::pow(t, -e.alpha) * c) *
           e.alpha / ray.a;
}

double fibering_d1(const RayData& ray, double c, double t) {
    require_a(ray);
    const auto& e = ray.exponents;
    return e.alpha * nehari_g(ray, c, t) / (ray.a * std::pow(t, e.alpha + 1.0));
}

double fibering_d2(const RayData& ray, double c, double t) {
    require_a(ray);
    const auto& e = ray.exponents;
    const double ea = e.eta - e.alpha;
    const double ba = e.beta - e.alpha;
    return e.alpha / ray.a *
           (ea * (ea - 1.0) * ray.n / e.eta * std::pow(t, ea - 2.0) -
            ba * (ba - 1.0) * ray.b / e.beta * std::pow(t, ba - 2.0) -
            e.alpha * (e.alpha + 1.0) * c * std::pow(t, -e.alpha - 2.0));
}

double nehari_g(const RayData& ray, double c, double t) {
    const auto& e = ray.exponents;
    return (e.eta - e.alpha) / e.eta * ray.n * std::pow(t, e.eta) -
           (e.beta - e.alpha) / e.beta * ray.b * std::pow(t, e.beta) + e.alpha * c;
}

double nehari_defect(const RayData& ray, double c, double t) {
    const auto& e = ray.exponents;
    const double t1 = (e.eta - e.alpha) / e.eta * ray.n * std::pow(t, e.eta);
    const double t2 = (e.beta - e.alpha) / e.beta * ray.b * std::pow(t, e.beta);
    const double t3 = e.alpha * c;
    const double scale = std::abs(t1) + std::abs(t2) + std::abs(t3);
    return scale > 0 ? std::abs(t1 - t2 + t3) / scale : 0.0;
}

ExtremalPair extremal_pair(const RayData& ray) {
    require_b_positive(ray, "extremal_pair");
    require_a(ray);
    const auto& e = ray.exponents;
    const double ea = e.eta - e.alpha, ba = e.beta - e.alpha, be = e.beta - e.eta;
    const double t = std::pow(ea * ray.n / (ba * ray.b), 1.0 / be);
    const double c = -(ea * be) / (e.eta * e.beta * e.alpha) * std::pow(ea / ba, e.eta / be) *
                     std::pow(ray.n, e.beta / be) / std::pow(ray.b, e.eta / be);
    return {t, c};
}

ExtremalPair zero_level_pair(const RayData& ray) {
    require_b_positive(ray, "zero_level_pair");
    const auto& e = ray.exponents;
    const double be = e.beta - e.eta;
    const double t = std::pow(ray.n / ray.b, 1.0 / be);
    const double c = be / (e.eta * e.beta) * std::pow(ray.n, e.beta / be) / std::pow(ray.b, e.eta / be);
    return {t, c};
}

FiberingProfile classify_and_solve(const RayData& ray, double c) {
    if (!(ray.a > 0.0)) throw DomainError("classify_and_solve expects A(u) > 0; flip the sign of A first");
    if (!(ray.n > 0.0)) throw DomainError("classify_and_solve expects N(u) > 0");
    if (!std::isfinite(c)) throw DomainError("classify_and_solve: non-finite energy level");

    FiberingProfile prof;
    auto finish = [&](FiberingProfile& p) -> FiberingProfile& {
        if (p.t_plus) p.phi_plus = fibering_value(ray, c, *p.t_plus);
        if (p.t_minus) p.phi_minus = fibering_value(ray, c, *p.t_minus);
        return p;
    };

    if (ray.b <= 0.0) {
        if (c >= 0.0) return prof;
        prof.kind = FiberCase::UniqueMin;
        const double hi = grow_until(ray, c, 1.0, false);
        prof.t_plus = solve_bracket(ray, c, 0.0, hi);
        return finish(prof);
    }

    const ExtremalPair ext = extremal_pair(ray);
    prof.extremal_c = ext.c;
    prof.zero_level_c = zero_level_pair(ray).c;
    const double t_star = ext.t;

    if (c >= 0.0) {
        prof.kind = FiberCase::UniqueMax;
        const double hi = grow_until(ray, c, 2.0 * t_star, true);
        prof.t_minus = solve_bracket(ray, c, t_star, hi);
        return finish(prof);
    }
    if (std::abs(c - ext.c) <= 1e-12 * (1.0 + std::abs(c))) {
        prof.degenerate = true;
        prof.t_plus = t_star;
        prof.t_minus = t_star;
        return finish(prof);
    }
    if (c < ext.c) return prof;

    prof.kind = FiberCase::TwoRoots;
    prof.t_plus = solve_bracket(ray, c, 0.0, t_star);
    const double hi = grow_until(ray, c, 2.0 * t_star, true);
    prof.t_minus = solve_bracket(ray, c, t_star, hi);
    return finish(prof);
}

double restricted_lambda(const RayData& ray, double c, double t_root) {
    require_a(ray);
    const auto& e = ray.exponents;
    const double num = (e.beta - e.eta) / e.eta * std::pow(t_root, e.eta) * ray.n - e.beta * c;
    const double den = (e.beta - e.alpha) / e.alpha * std::pow(t_root, e.alpha) * ray.a;
    const double lam = num / den;
    const double direct = fibering_value(ray, c, t_root);
    const double scale = std::max({std::abs(direct), std::abs(lam),
                                   std::abs(e.alpha * std::pow(t_root, -e.alpha) * c / ray.a),
                                   std::abs(e.alpha * std::pow(t_root, e.eta - e.alpha) * ray.n / (e.eta * ray.a))});
    if (std::abs(lam - direct) > 1e-10 * scale + 1e-300) {
        std::ostringstream os;
        os.precision(17);
        os << "restricted_lambda: Nehari form " << lam << " disagrees with fibering value " << direct
           << " at t = " << t_root << " (is t a root?)";
        throw NumericalError(os.str());
    }
    return lam;
}

double t_plus_upper_bound(const RayData& ray, double c) {
    const auto& e = ray.exponents;
    return std::pow(-e.alpha * e.beta * e.eta * c / ((e.beta - e.eta) * (e.eta - e.alpha) * ray.n), 1.0 / e.eta);
}

TripleValues fibering_partials(const RayData& ray, double c, double t) {
    const auto& e = ray.exponents;
    const double phi_v = fibering_value(ray, c, t);
    return {e.alpha * std::pow(t, e.eta - e.alpha) / (e.eta * ray.a), -phi_v / ray.a,
            -e.alpha * std::pow(t, e.beta - e.alpha) / (e.beta * ray.a)};
}

}  // namespace pec
