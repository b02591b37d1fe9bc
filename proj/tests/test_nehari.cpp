#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "pecurves/errors.hpp"
#include "pecurves/nehari_minmax.hpp"
#include "support.hpp"

using namespace pec;

namespace {

OptimizerParams quick(int starts = 8) {
    OptimizerParams p;
    p.multistart = starts;
    return p;
}

// Random vector in C_A: positive on the a > 0 nodes, zero elsewhere.
Vec positive_on(const std::vector<char>& mask, std::mt19937_64& rng) {
    Vec u(mask.size(), 0.0);
    std::uniform_real_distribution<double> d(0.05, 1.0);
    for (std::size_t i = 0; i < u.size(); ++i)
        if (mask[i]) u[i] = d(rng);
    return u;
}

}  // namespace

TEST_CASE("normalize_to_sphere") {
    const auto inst = testing::sign_changing_1d(31);
    std::mt19937_64 rng(1);
    const Vec u = normalize_to_sphere(inst.triple, testing::random_vec(rng, inst.triple.dim()));
    CHECK(inst.triple.eval_N(u) == doctest::Approx(1.0).epsilon(1e-13));
    CHECK_THROWS_AS(normalize_to_sphere(inst.triple, Vec(inst.triple.dim(), 0.0)), DomainError);
}

TEST_CASE("sphere optimizer finds the smallest Dirichlet eigenvalue") {
    const int nx = 31;
    const auto inst = testing::constant_1d(nx);
    const double h = 1.0 / (nx + 1);
    const double lam_min = (2.0 - 2.0 * std::cos(M_PI * h)) / h;  // N(u) = u^T K u, K = tridiag(-1, 2, -1) / h
    const SphereObjective f = [&](std::span<const double> u, std::span<double> g) {
        const double n = inst.triple.eval_N(u), q = dot(u, u);
        const Vec gn = inst.triple.grad_N(u);
        for (std::size_t i = 0; i < u.size(); ++i) g[i] = -2.0 * u[i] / n + q / (n * n) * gn[i];
        return -q / n;
    };
    std::mt19937_64 rng(3);
    const Vec u0 = normalize_to_sphere(inst.triple, testing::random_vec(rng, nx, 0.1, 1.0));
    const auto res = minimize_on_sphere(inst.triple, ConeTag::APos, f, u0, quick());
    CHECK(res.value == doctest::Approx(-1.0 / lam_min).epsilon(1e-9));
    CHECK(inst.triple.eval_N(res.u) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("parallel_for and start_rng") {
    std::vector<int> hit(37, 0);
    parallel_for(hit.size(), 4, [&](std::size_t i) { hit[i] += 1; });
    CHECK(std::all_of(hit.begin(), hit.end(), [](int v) { return v == 1; }));
    auto r1 = start_rng(5, 2), r2 = start_rng(5, 2), r3 = start_rng(5, 3);
    const auto a = r1(), b = r2(), c = r3();
    CHECK(a == b);
    CHECK(a != c);
}

TEST_CASE("lambda_tilde agrees with the fibering root and its gradient") {
    const auto inst = testing::sign_changing_1d(31);
    const auto sc = SphereConstraint::from(inst, ConeTag::APos);
    std::mt19937_64 rng(5);
    const double c = -0.3;
    for (int trial = 0; trial < 5; ++trial) {
        const Vec u = normalize_to_sphere(inst.triple, positive_on(inst.nodes_a_pos, rng));
        const auto lt = lambda_tilde(sc, c, u, Branch::Plus);
        const auto prof = classify_and_solve(RayData::from(inst.triple.exponents(), inst.triple.evaluate(u)), c);
        REQUIRE(prof.t_plus);
        CHECK(lt.t == doctest::Approx(*prof.t_plus).epsilon(1e-12));
        Vec tu = u;
        scale(tu, lt.t);
        CHECK(lt.value == doctest::Approx(lambda_of(inst.triple, c, tu)).epsilon(1e-11));

        Vec g(u.size());
        lambda_tilde(sc, c, u, Branch::Plus, g);
        for (std::size_t i = 0; i < u.size(); i += 3) {
            if (!inst.nodes_a_pos[i]) continue;
            Vec up = u, um = u;
            const double h = 1e-6;
            up[i] += h;
            um[i] -= h;
            const double fd = (lambda_tilde(sc, c, up, Branch::Plus).value - lambda_tilde(sc, c, um, Branch::Plus).value) / (2 * h);
            CHECK(g[i] == doctest::Approx(fd).epsilon(1e-5).scale(1e-4 * norm2(g)));
        }
    }
    Vec bad(inst.triple.dim(), 0.0);
    for (std::size_t i = 0; i < bad.size(); ++i)
        if (inst.nodes_a_neg[i]) bad[i] = 1.0;
    CHECK_THROWS_AS(lambda_tilde(sc, c, bad, Branch::Plus), InfeasibleRayError);
}

TEST_CASE("ground level is a prescribed-energy critical point below random competitors") {
    const auto inst = testing::sign_changing_1d(63);
    const auto sc = SphereConstraint::from(inst, ConeTag::APos);
    const double c = -0.5;
    const auto lr = minimize_ground_level(sc, c, Branch::Plus, quick());
    REQUIRE_FALSE(lr.empty);
    const auto& r = lr.record;
    CHECK(r.converged);
    CHECK(r.residual_grad <= 1e-6);
    CHECK(r.energy_defect <= 1e-8 * (1 + std::abs(c)));
    CHECK(phi(inst.triple, r.lambda, r.v) == doctest::Approx(c).epsilon(1e-10));
    // Phi'_lambda(v) = 0 checked directly through the dual norm
    CHECK(inst.triple.dual_norm(phi_grad(inst.triple, r.lambda, r.v)) <= 1e-6 * inst.triple.dual_norm(inst.triple.grad_N(r.v)));
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 30; ++trial) {
        const Vec u = normalize_to_sphere(inst.triple, positive_on(inst.nodes_a_pos, rng));
        CHECK(lambda_tilde(sc, c, u, Branch::Plus).value >= lr.level - 1e-9);
    }
}

TEST_CASE("ground level is deterministic for a fixed seed") {
    const auto inst = testing::sign_changing_1d(31);
    const auto sc = SphereConstraint::from(inst, ConeTag::APosBPos);
    auto p = quick(6);
    p.seed = 42;
    const auto a = minimize_ground_level(sc, -0.2, Branch::Minus, p);
    const auto b = minimize_ground_level(sc, -0.2, Branch::Minus, p);
    CHECK(a.level == b.level);
    CHECK(a.u == b.u);
    p.threads = 3;
    const auto c = minimize_ground_level(sc, -0.2, Branch::Minus, p);
    CHECK(c.level == a.level);
}

TEST_CASE("minimize_ground_level requires the branch cone") {
    const auto inst = testing::sign_changing_1d(31);
    const auto sc = SphereConstraint::from(inst, ConeTag::APosBPos);
    CHECK_THROWS_AS(minimize_ground_level(sc, -0.2, Branch::Plus, quick()), Error);
}

TEST_CASE("surrogate bumps are disjoint and the levels nest") {
    const auto inst = testing::sign_changing_1d(63);
    const auto basis = make_surrogate_basis(inst, ConeTag::APos, 3);
    REQUIRE(basis.k() == 3);
    for (std::size_t i = 0; i < inst.triple.dim(); ++i) {
        int nonzero = 0;
        for (const auto& v : basis.basis) nonzero += v[i] != 0.0;
        CHECK(nonzero <= 1);
        if (basis.basis[0][i] != 0.0) CHECK(inst.nodes_a_pos[i]);
    }
    const auto sc = SphereConstraint::from(inst, ConeTag::APos);
    const double c = -0.5;
    const auto ground = minimize_ground_level(sc, c, Branch::Plus, quick());
    double prev = ground.level;
    std::vector<Vec> hints;
    for (int k = 1; k <= 3; ++k) {
        const auto sr = surrogate_level(sc, c, Branch::Plus, basis.prefix(k), quick(), hints);
        REQUIRE(sr.valid);
        CHECK(sr.level >= prev - 1e-9);
        prev = sr.level;
        hints = {sr.coeffs};
    }
    CHECK_THROWS_AS(make_surrogate_basis(inst, ConeTag::APos, 40), ConfigError);
}

TEST_CASE("thresholds bracket the ray values") {
    const auto inst = testing::sign_changing_1d(63);
    const auto sc = SphereConstraint::from(inst, ConeTag::APosBPos);
    const auto cs = compute_c_star(sc, quick());
    const auto css = compute_c_star_star(sc, quick());
    CHECK(cs.value < -1e-10);
    CHECK(css.value > 1e-10);
    CHECK(cs.value / css.value == doctest::Approx(-1.0 / 15.0).epsilon(1e-6));
    const auto both = mask_and(inst.nodes_a_pos, inst.nodes_b_pos);
    std::mt19937_64 rng(23);
    const auto& e = inst.triple.exponents();
    for (int trial = 0; trial < 30; ++trial) {
        const Vec u = positive_on(both, rng);
        const auto v = inst.triple.evaluate(u);
        CHECK(extremal_c(e, v) <= cs.value + 1e-9);
        CHECK(zero_level_c(e, v) >= css.value - 1e-9);
    }
    REQUIRE_FALSE(css.minimizers.empty());
    CHECK(css.minimizers.size() % 2 == 0);
}
