#include "pecurves/sphere_optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <thread>

#include "pecurves/errors.hpp"

namespace pec {

Vec normalize_to_sphere(const FunctionalTriple& triple, std::span<const double> u) {
    const double r = triple.norm(u);
    if (!(r > 0.0) || !std::isfinite(r)) throw DomainError("cannot normalize a vector with N(u) = 0");
    Vec out(u.begin(), u.end());
    scale(out, 1.0 / r);
    return out;
}

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& f) {
    std::size_t workers = threads > 0 ? static_cast<std::size_t>(threads)
                                      : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min(workers, n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = w * chunk; i < std::min(n, (w + 1) * chunk); ++i) f(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

std::mt19937_64 start_rng(std::uint64_t seed, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
    return std::mt19937_64(seq);
}

namespace {

struct Point {
    Vec u;
    double f = 0.0;
    Vec g;   // tangential part of the gradient (dual vector)
    Vec z;   // its Riesz representative
    Vec gN;  // gradient of N
    Vec m;   // Riesz representative of gN
    double gnorm = 0.0;
};

class Evaluator {
public:
    Evaluator(const FunctionalTriple& t, ConeTag tag, const SphereObjective& f, double eps)
        : t_(t), tag_(tag), f_(f), eps_(eps) {}

    bool eval(Vec u, Point& p) const {
        if (!cone_membership(t_, tag_, u, eps_).inside) return false;
        const std::size_t n = u.size();
        p.g.assign(n, 0.0);
        try {
            p.f = f_(u, p.g);
        } catch (const InfeasibleRayError&) {
            return false;
        }
        if (!std::isfinite(p.f)) return false;
        p.u = std::move(u);
        p.gN = t_.grad_N(p.u);
        p.m.assign(n, 0.0);
        t_.riesz(p.gN, p.m);
        p.z.assign(n, 0.0);
        t_.riesz(p.g, p.z);
        const double mu = dot(p.gN, p.z) / dot(p.gN, p.m);
        axpy(-mu, p.gN, p.g);
        axpy(-mu, p.m, p.z);
        p.gnorm = std::sqrt(std::max(0.0, dot(p.g, p.z)));
        return true;
    }

    void tangent(const Point& p, Vec& d) const {
        const double mu = dot(p.gN, d) / dot(p.gN, p.m);
        axpy(-mu, p.m, d);
    }

    void riesz(std::span<const double> g, std::span<double> z) const { t_.riesz(g, z); }
    const FunctionalTriple& triple() const { return t_; }

private:
    const FunctionalTriple& t_;
    ConeTag tag_;
    const SphereObjective& f_;
    double eps_;
};

struct Pair {
    Vec s, y;
    double rho;
};

Vec lbfgs_direction(const Evaluator& ev, const Point& p, const std::deque<Pair>& mem) {
    Vec q = p.g;
    std::vector<double> alpha(mem.size());
    for (std::size_t i = mem.size(); i-- > 0;) {
        alpha[i] = mem[i].rho * dot(mem[i].s, q);
        axpy(-alpha[i], mem[i].y, q);
    }
    Vec r(q.size());
    ev.riesz(q, r);
    const Pair& last = mem.back();
    Vec ky(q.size());
    ev.riesz(last.y, ky);
    const double gamma = (1.0 / last.rho) / dot(last.y, ky);
    scale(r, gamma);
    for (std::size_t i = 0; i < mem.size(); ++i) {
        const double beta = mem[i].rho * dot(mem[i].y, r);
        axpy(alpha[i] - beta, mem[i].s, r);
    }
    return r;
}

}  // namespace

SphereResult minimize_on_sphere(const FunctionalTriple& triple, ConeTag tag, const SphereObjective& f,
                                std::span<const double> u0, const OptimizerParams& params) {
    SphereResult res;
    Evaluator ev(triple, tag, f, params.cone_eps);
    Point cur;
    if (!ev.eval(normalize_to_sphere(triple, u0), cur)) {
        res.u.assign(u0.begin(), u0.end());
        res.value = std::numeric_limits<double>::infinity();
        res.stop_reason = "infeasible start";
        return res;
    }

    std::deque<Pair> mem;
    double step = params.initial_step;
    int stalls = 0;
    int it = 0;
    for (; it < params.max_iter; ++it) {
        const double scale_f = std::max(1.0, std::abs(cur.f));
        if (cur.gnorm <= params.grad_tol * scale_f) {
            res.converged = true;
            res.stop_reason = "gradient tolerance";
            break;
        }
        Vec d = mem.empty() ? cur.z : lbfgs_direction(ev, cur, mem);
        ev.tangent(cur, d);
        double slope = dot(cur.g, d);
        const bool quasi_newton = !mem.empty();
        if (!(slope > 0.0)) {
            mem.clear();
            d = cur.z;
            slope = cur.gnorm * cur.gnorm;
        }
        double s = mem.empty() ? step : 1.0;
        Point trial;
        bool accepted = false;
        for (int ls = 0; ls < 80; ++ls) {
            Vec v = cur.u;
            axpy(-s, d, v);
            if (ev.eval(normalize_to_sphere(triple, v), trial) &&
                trial.f <= cur.f - params.armijo_c1 * s * slope) {
                accepted = true;
                break;
            }
            s *= params.shrink;
        }
        if (!accepted) {
            if (quasi_newton) {
                mem.clear();
                continue;
            }
            res.stop_reason = "line search failed";
            break;
        }
        if (mem.empty()) step = std::min(2.0 * s, 1e12);

        if (params.lbfgs_memory > 0) {
            Pair pr;
            pr.s = trial.u;
            axpy(-1.0, cur.u, pr.s);
            pr.y = trial.g;
            axpy(-1.0, cur.g, pr.y);
            const double sy = dot(pr.s, pr.y);
            if (sy > 1e-14 * norm2(pr.s) * norm2(pr.y)) {
                pr.rho = 1.0 / sy;
                mem.push_back(std::move(pr));
                if (static_cast<int>(mem.size()) > params.lbfgs_memory) mem.pop_front();
            }
        }
        stalls = (cur.f - trial.f <= 1e-15 * std::abs(cur.f)) ? stalls + 1 : 0;
        cur = std::move(trial);
        if (stalls >= 20) {
            res.stop_reason = "stalled";
            ++it;
            break;
        }
    }
    if (it == params.max_iter && res.stop_reason.empty()) res.stop_reason = "iteration limit";
    res.u = std::move(cur.u);
    res.value = cur.f;
    res.gnorm = cur.gnorm;
    res.iterations = it;
    return res;
}

}  // namespace pec
