#include "pecurves/nehari_minmax.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "pecurves/errors.hpp"

namespace pec {

const char* to_string(Branch b) { return b == Branch::Plus ? "plus" : "minus"; }

Branch parse_branch(const std::string& s) {
    if (s == "plus" || s == "+") return Branch::Plus;
    if (s == "minus" || s == "-") return Branch::Minus;
    throw ConfigError("unknown branch '" + s + "' (expected plus or minus)");
}

ConeTag cone_for(Branch b) { return b == Branch::Plus ? ConeTag::APos : ConeTag::APosBPos; }

SphereConstraint SphereConstraint::from(const Instance& inst, ConeTag tag) {
    return {inst.triple, tag, inst.support(tag)};
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kShrink = 0.7;

std::optional<double> branch_root(const FiberingProfile& prof, Branch b) {
    return b == Branch::Plus ? prof.t_plus : prof.t_minus;
}

RayData ray_at(const SphereConstraint& sc, std::span<const double> u, double cone_eps) {
    const auto& e = sc.triple.exponents();
    const TripleValues v = sc.triple.evaluate(u);
    if (!cone_membership(e, v, sc.tag, cone_eps).inside) throw InfeasibleRayError("point outside the cone");
    if (!(v.a > 0.0)) throw InfeasibleRayError("A(u) <= 0 on this ray");
    return RayData::from(e, v);
}

Vec random_start(const SphereConstraint& sc, std::mt19937_64& rng, double cone_eps) {
    const std::size_t n = sc.triple.dim();
    const bool masked = !sc.support.empty();
    if (masked && std::none_of(sc.support.begin(), sc.support.end(), [](char c) { return c != 0; }))
        throw Error(std::string("cone ") + to_string(sc.tag) + " has no admissible nodes at this resolution");
    std::uniform_real_distribution<double> unif(-0.25, 1.0);
    Vec r(n), z(n);
    for (int attempt = 0; attempt < 64; ++attempt) {
        for (std::size_t i = 0; i < n; ++i) r[i] = (!masked || sc.support[i]) ? unif(rng) : 0.0;
        sc.triple.riesz(r, z);
        if (masked)
            for (std::size_t i = 0; i < n; ++i)
                if (!sc.support[i]) z[i] = 0.0;
        for (const Vec* cand : {&z, &r}) {
            if (!(sc.triple.eval_N(*cand) > 0.0)) continue;
            Vec u = normalize_to_sphere(sc.triple, *cand);
            if (cone_membership(sc.triple, sc.tag, u, cone_eps).inside) return u;
        }
    }
    throw Error(std::string("could not sample a start inside cone ") + to_string(sc.tag));
}

std::vector<Vec> collect_starts(const SphereConstraint& sc, const OptimizerParams& params,
                                const std::vector<Vec>& warm) {
    std::vector<Vec> starts;
    for (const auto& w : warm) {
        if (w.size() != sc.triple.dim() || !(sc.triple.eval_N(w) > 0.0)) continue;
        starts.push_back(normalize_to_sphere(sc.triple, w));
    }
    for (int i = 0; i < params.multistart; ++i) {
        auto rng = start_rng(params.seed, static_cast<std::uint64_t>(i));
        starts.push_back(random_start(sc, rng, params.cone_eps));
    }
    return starts;
}

std::vector<SphereResult> run_starts(const SphereConstraint& sc, const SphereObjective& f,
                                     const std::vector<Vec>& starts, const OptimizerParams& params) {
    std::vector<SphereResult> out(starts.size());
    parallel_for(starts.size(), params.threads,
                 [&](std::size_t i) { out[i] = minimize_on_sphere(sc.triple, sc.tag, f, starts[i], params); });
    return out;
}

std::size_t best_index(const std::vector<SphereResult>& rs) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < rs.size(); ++i)
        if (rs[i].value < rs[best].value) best = i;
    return best;
}

double dual(const FunctionalTriple& t, std::span<const double> g) { return t.dual_norm(g); }

}  // namespace

LambdaTilde lambda_tilde(const SphereConstraint& sc, double c, std::span<const double> u, Branch branch,
                         double cone_eps) {
    const RayData ray = ray_at(sc, u, cone_eps);
    const FiberingProfile prof = classify_and_solve(ray, c);
    const auto t = branch_root(prof, branch);
    if (!t) throw InfeasibleRayError(std::string("no ") + to_string(branch) + " root on this ray");
    return {restricted_lambda(ray, c, *t), *t, prof.degenerate};
}

LambdaTilde lambda_tilde(const SphereConstraint& sc, double c, std::span<const double> u, Branch branch,
                         std::span<double> grad, double cone_eps) {
    const LambdaTilde lt = lambda_tilde(sc, c, u, branch, cone_eps);
    const RayData ray = RayData::from(sc.triple.exponents(), sc.triple.evaluate(u));
    const TripleValues p = fibering_partials(ray, c, lt.t);
    const std::size_t n = u.size();
    Vec gn(n), ga(n), gb(n);
    sc.triple.gradients(u, gn, ga, gb);
    for (std::size_t i = 0; i < n; ++i) grad[i] = p.n * gn[i] + p.a * ga[i] + p.b * gb[i];
    return lt;
}

CriticalPointRecord extract_critical_point(const SphereConstraint& sc, double c, Branch branch,
                                           std::span<const double> u, const OptimizerParams& params,
                                           int iterations) {
    CriticalPointRecord rec;
    rec.branch = branch;
    rec.c = c;
    rec.iterations = iterations;
    const auto& e = sc.triple.exponents();
    LambdaTilde lt;
    try {
        lt = lambda_tilde(sc, c, u, branch, params.cone_eps);
    } catch (const InfeasibleRayError& err) {
        rec.lambda = std::numeric_limits<double>::quiet_NaN();
        rec.residual_grad = kInf;
        rec.energy_defect = kInf;
        rec.flags.push_back(std::string("infeasible: ") + err.what());
        return rec;
    }
    if (lt.degenerate) rec.flags.push_back("degenerate");
    rec.t_root = lt.t;
    rec.v.assign(u.begin(), u.end());
    scale(rec.v, lt.t);
    rec.u_norm = sc.triple.norm(rec.v);
    rec.lambda = lambda_of(sc.triple, c, rec.v);
    rec.energy_defect = std::abs(phi(sc.triple, rec.lambda, rec.v) - c);

    const std::size_t n = rec.v.size();
    Vec gn(n), ga(n), gb(n), r(n);
    sc.triple.gradients(rec.v, gn, ga, gb);
    for (std::size_t i = 0; i < n; ++i) {
        gn[i] /= e.eta;
        ga[i] *= rec.lambda / e.alpha;
        gb[i] /= e.beta;
        r[i] = gn[i] - ga[i] - gb[i];
    }
    const double denom = std::max({dual(sc.triple, gn), dual(sc.triple, ga), dual(sc.triple, gb)});
    rec.residual_grad = denom > 0 ? dual(sc.triple, r) / denom : 0.0;
    rec.converged = rec.residual_grad <= params.residual_tol && rec.energy_defect <= 1e-8 * (1.0 + std::abs(c));
    return rec;
}

LevelResult minimize_ground_level(const SphereConstraint& sc, double c, Branch branch, const OptimizerParams& params,
                                  const std::vector<Vec>& warm_starts) {
    if (sc.tag != cone_for(branch))
        throw DomainError(std::string("the ") + to_string(branch) + " level lives on cone " +
                          to_string(cone_for(branch)));
    const SphereObjective f = [&](std::span<const double> u, std::span<double> g) {
        return lambda_tilde(sc, c, u, branch, g, params.cone_eps).value;
    };
    const auto starts = collect_starts(sc, params, warm_starts);
    const auto results = run_starts(sc, f, starts, params);

    LevelResult out;
    out.starts = static_cast<int>(results.size());
    for (const auto& r : results) out.feasible_starts += std::isfinite(r.value) ? 1 : 0;
    if (out.feasible_starts == 0) {
        out.empty = true;
        out.level = kInf;
        out.record.branch = branch;
        out.record.c = c;
        out.record.lambda = kInf;
        out.record.flags.push_back("empty level");
        return out;
    }
    const auto& best = results[best_index(results)];
    out.level = best.value;
    out.u = best.u;
    out.record = extract_critical_point(sc, c, branch, best.u, params, best.iterations);
    if (!best.converged) out.record.flags.push_back("optimizer: " + best.stop_reason);
    return out;
}

GenusSurrogate GenusSurrogate::prefix(int k) const {
    GenusSurrogate s;
    s.basis.assign(basis.begin(), basis.begin() + std::min<std::size_t>(k, basis.size()));
    s.samples = samples;
    return s;
}

GenusSurrogate make_surrogate_basis(const Instance& inst, ConeTag tag, int k_max) {
    if (k_max < 1) throw ConfigError("surrogate needs k >= 1");
    const auto mask = inst.support(tag);
    const Grid& g = inst.grid;
    GenusSurrogate sur;
    const std::size_t n = g.num_nodes();
    auto too_small = [&] {
        throw ConfigError(std::string("cone ") + to_string(tag) + " is too small at this resolution for " +
                          std::to_string(k_max) + " disjoint bumps");
    };
    auto widths = [&](int available) {
        // widths shrink geometrically with the bump index
        std::vector<int> w(static_cast<std::size_t>(k_max));
        double total = 0.0;
        for (int j = 0; j < k_max; ++j) total += std::pow(kShrink, j);
        int used = 0;
        for (int j = 0; j < k_max; ++j) {
            w[static_cast<std::size_t>(j)] = std::max(1, static_cast<int>(std::floor(available * std::pow(kShrink, j) / total)));
            used += w[static_cast<std::size_t>(j)];
        }
        if (used > available) too_small();
        for (int j = 1; j < k_max; ++j)
            if (w[static_cast<std::size_t>(j)] >= w[static_cast<std::size_t>(j - 1)] && w[static_cast<std::size_t>(j - 1)] > 1)
                w[static_cast<std::size_t>(j)] = w[static_cast<std::size_t>(j - 1)] - 1;
        return w;
    };
    if (g.dimension == 1) {
        const auto runs = inst.runs(mask);
        if (runs.empty()) too_small();
        const auto& run = *std::max_element(runs.begin(), runs.end(),
                                            [](const auto& x, const auto& y) { return x.size() < y.size(); });
        const auto w = widths(static_cast<int>(run.size()) - (k_max - 1));
        int start = 0;
        for (int j = 0; j < k_max; ++j) {
            const int m = w[static_cast<std::size_t>(j)];
            Vec e(n, 0.0);
            for (int q = 0; q < m; ++q)
                e[run[static_cast<std::size_t>(start + q)]] = std::sin(std::numbers::pi * (q + 1) / (m + 1));
            sur.basis.push_back(std::move(e));
            start += m + 1;
        }
        return sur;
    }
    int imin = g.nx, imax = -1;
    for (std::size_t i = 0; i < n; ++i)
        if (mask[i]) {
            imin = std::min(imin, static_cast<int>(i % g.nx));
            imax = std::max(imax, static_cast<int>(i % g.nx));
        }
    if (imax < 0) too_small();
    const auto w = widths(imax - imin + 1 - (k_max - 1));
    int c0 = imin;
    for (int j = 0; j < k_max; ++j) {
        const int wj = w[static_cast<std::size_t>(j)];
        int jmin = g.ny, jmax = -1;
        for (std::size_t i = 0; i < n; ++i) {
            const int ix = static_cast<int>(i % g.nx), iy = static_cast<int>(i / g.nx);
            if (mask[i] && ix >= c0 && ix < c0 + wj) {
                jmin = std::min(jmin, iy);
                jmax = std::max(jmax, iy);
            }
        }
        if (jmax < 0) too_small();
        Vec e(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const int ix = static_cast<int>(i % g.nx), iy = static_cast<int>(i / g.nx);
            if (!mask[i] || ix < c0 || ix >= c0 + wj) continue;
            e[i] = std::sin(std::numbers::pi * (ix - c0 + 1) / (wj + 1)) *
                   std::sin(std::numbers::pi * (iy - jmin + 1) / (jmax - jmin + 2));
        }
        sur.basis.push_back(std::move(e));
        c0 += wj + 1;
    }
    return sur;
}

namespace {

Vec combine(const GenusSurrogate& s, std::span<const double> gamma) {
    Vec u(s.basis.front().size(), 0.0);
    for (std::size_t i = 0; i < s.basis.size(); ++i) axpy(gamma[i], s.basis[i], u);
    return u;
}

std::vector<Vec> coefficient_samples(int k, int count, std::uint64_t seed) {
    std::vector<Vec> out;
    if (k == 1) {
        out.push_back({1.0});
    } else if (k == 2) {
        for (int j = 0; j < count; ++j) {
            const double th = std::numbers::pi * j / count;
            out.push_back({std::cos(th), std::sin(th)});
        }
    } else if (k == 3) {
        const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
        for (int j = 0; j < count; ++j) {
            const double z = 1.0 - (j + 0.5) / count;
            const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
            out.push_back({r * std::cos(golden * j), r * std::sin(golden * j), z});
        }
    } else {
        std::normal_distribution<double> nd;
        for (int j = 0; j < count; ++j) {
            auto rng = start_rng(seed, 1'000'000u + static_cast<std::uint64_t>(j));
            Vec g(static_cast<std::size_t>(k));
            for (auto& x : g) x = nd(rng);
            const double r = norm2(g);
            if (r > 0) scale(g, 1.0 / r);
            out.push_back(std::move(g));
        }
    }
    return out;
}

}  // namespace

SurrogateResult surrogate_level(const SphereConstraint& sc, double c, Branch branch, const GenusSurrogate& sur,
                                const OptimizerParams& params, const std::vector<Vec>& hints) {
    SurrogateResult res;
    const int k = sur.k();
    if (k < 1) throw ConfigError("surrogate basis is empty");
    const int count = sur.samples > 0 ? sur.samples : (k == 2 ? 90 : k == 3 ? 400 : 100 * k);
    auto samples = coefficient_samples(k, count, params.seed);
    for (auto it = hints.rbegin(); it != hints.rend(); ++it) {
        Vec h(static_cast<std::size_t>(k), 0.0);
        std::copy_n(it->begin(), std::min<std::size_t>(it->size(), h.size()), h.begin());
        if (norm2(h) > 0) samples.insert(samples.begin(), h);
    }

    auto value_at = [&](std::span<const double> gamma, Vec* grad_gamma) {
        Vec u = normalize_to_sphere(sc.triple, combine(sur, gamma));
        if (!grad_gamma) return lambda_tilde(sc, c, u, branch, params.cone_eps).value;
        Vec g(u.size());
        const double v = lambda_tilde(sc, c, u, branch, g, params.cone_eps).value;
        const double r = sc.triple.norm(combine(sur, gamma));
        grad_gamma->assign(static_cast<std::size_t>(k), 0.0);
        for (int i = 0; i < k; ++i) (*grad_gamma)[static_cast<std::size_t>(i)] = dot(g, sur.basis[static_cast<std::size_t>(i)]) / r;
        return v;
    };

    std::vector<double> vals(samples.size());
    for (std::size_t j = 0; j < samples.size(); ++j) {
        try {
            vals[j] = value_at(samples[j], nullptr);
        } catch (const InfeasibleRayError& err) {
            res.reason = "sampled ray " + std::to_string(j) + " infeasible: " + err.what();
            res.level = kInf;
            return res;
        }
    }

    std::vector<std::size_t> order(samples.size());
    for (std::size_t j = 0; j < order.size(); ++j) order[j] = j;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return vals[x] > vals[y]; });

    double best = -kInf;
    Vec best_gamma;
    const std::size_t polish = std::min<std::size_t>(k == 1 ? 1 : 4, order.size());
    for (std::size_t q = 0; q < polish; ++q) {
        Vec gamma = samples[order[q]];
        Vec grad;
        double f = value_at(gamma, &grad);
        double step = 1.0;
        for (int it = 0; it < 500 && k > 1; ++it) {
            const double radial = dot(grad, gamma);
            axpy(-radial, gamma, grad);
            const double gn = norm2(grad);
            if (gn <= 1e-12 * std::max(1.0, std::abs(f))) break;
            bool moved = false;
            for (int ls = 0; ls < 60; ++ls) {
                Vec trial = gamma;
                axpy(step, grad, trial);
                scale(trial, 1.0 / norm2(trial));
                try {
                    Vec tg;
                    const double ft = value_at(trial, &tg);
                    if (ft >= f + 1e-4 * step * gn * gn) {
                        gamma = std::move(trial);
                        grad = std::move(tg);
                        f = ft;
                        moved = true;
                        step *= 2.0;
                        break;
                    }
                } catch (const InfeasibleRayError&) {
                }
                step *= 0.5;
            }
            if (!moved) break;
        }
        if (f > best) {
            best = f;
            best_gamma = gamma;
        }
    }
    res.valid = true;
    res.level = best;
    res.coeffs = best_gamma;
    res.u = normalize_to_sphere(sc.triple, combine(sur, best_gamma));
    res.record = extract_critical_point(sc, c, branch, res.u, params);
    res.record.k = k;
    res.record.flags.push_back("surrogate");
    return res;
}

double extremal_c(const Exponents& e, const TripleValues& v) {
    const double ea = e.eta - e.alpha, ba = e.beta - e.alpha, be = e.beta - e.eta;
    return -(ea * be) / (e.eta * e.beta * e.alpha) * std::pow(ea / ba, e.eta / be) * std::pow(v.n, e.beta / be) /
           std::pow(v.b, e.eta / be);
}

double zero_level_c(const Exponents& e, const TripleValues& v) {
    const double be = e.beta - e.eta;
    return be / (e.eta * e.beta) * std::pow(v.n, e.beta / be) / std::pow(v.b, e.eta / be);
}

namespace {

// Objective s * h(n, b) for a 0-homogeneous h = K n^{beta/(beta-eta)} b^{-eta/(beta-eta)}.
SphereObjective power_ratio_objective(const SphereConstraint& sc, double sign, bool extremal) {
    return [&sc, sign, extremal](std::span<const double> u, std::span<double> g) {
        const auto& e = sc.triple.exponents();
        const TripleValues v = sc.triple.evaluate(u);
        if (!(v.b > 0.0) || !(v.n > 0.0)) throw InfeasibleRayError("B(u) <= 0");
        const double h = extremal ? extremal_c(e, v) : zero_level_c(e, v);
        const double be = e.beta - e.eta;
        const double dn = h * e.beta / (be * v.n), db = -h * e.eta / (be * v.b);
        const std::size_t n = u.size();
        Vec gn(n), ga(n), gb(n);
        sc.triple.gradients(u, gn, ga, gb);
        for (std::size_t i = 0; i < n; ++i) g[i] = sign * (dn * gn[i] + db * gb[i]);
        return sign * h;
    };
}

ThresholdResult threshold(const SphereConstraint& sc, const OptimizerParams& params, double sign, bool extremal) {
    if (!sc.support.empty() && std::none_of(sc.support.begin(), sc.support.end(), [](char c) { return c != 0; }))
        throw Error(std::string("cone ") + to_string(sc.tag) + " is empty at this resolution (no node with a > 0 and b > 0)");
    const auto f = power_ratio_objective(sc, sign, extremal);
    const auto starts = collect_starts(sc, params, {});
    const auto results = run_starts(sc, f, starts, params);
    ThresholdResult out;
    out.starts = static_cast<int>(results.size());
    const auto& best = results[best_index(results)];
    if (!std::isfinite(best.value)) throw NumericalError("threshold search found no feasible point");
    out.value = sign * best.value;
    out.u = best.u;
    for (const auto& r : results) {
        if (!(std::abs(r.value - best.value) <= 1e-6)) continue;
        const double rn = norm2(r.u);
        bool known = false;
        for (const auto& m : out.minimizers) {
            Vec d1 = r.u, d2 = r.u;
            axpy(-1.0, m, d1);
            axpy(1.0, m, d2);
            if (std::min(norm2(d1), norm2(d2)) <= 1e-3 * rn) {
                known = true;
                break;
            }
        }
        if (!known) out.minimizers.push_back(r.u);
    }
    const std::size_t reps = out.minimizers.size();
    for (std::size_t i = 0; i < reps; ++i) {
        Vec neg = out.minimizers[i];
        scale(neg, -1.0);
        out.minimizers.push_back(std::move(neg));
    }
    return out;
}

}  // namespace

ThresholdResult compute_c_star(const SphereConstraint& sc, const OptimizerParams& params) {
    ThresholdResult r = threshold(sc, params, -1.0, true);
    if (!(r.value < -1e-10)) throw NumericalError("computed c* is not negative");
    return r;
}

ThresholdResult compute_c_star_star(const SphereConstraint& sc, const OptimizerParams& params) {
    ThresholdResult r = threshold(sc, params, 1.0, false);
    if (!(r.value > 1e-10)) throw NumericalError("computed c** is not positive");
    return r;
}

}  // namespace pec
