#include <cmath>
#include <random>

#include "doctest.h"
#include "fibering_oracle.hpp"
#include "pecurves/errors.hpp"
#include "pecurves/fibering.hpp"

using namespace pec;

namespace {

// Roots of 0.625 s^2 - 0.25 s - 1.5 c = 0 with s = t^2: the ray (1, 1, 1).
std::pair<double, double> toy_roots(double c) {
    const double disc = std::sqrt(0.0625 + 4 * 0.625 * 1.5 * c);
    return {std::sqrt((0.25 - disc) / 1.25), std::sqrt((0.25 + disc) / 1.25)};
}

const RayData kToy{1.0, 1.0, 1.0, {1.5, 2.0, 4.0}};

}  // namespace

TEST_CASE("toy ray at c = -0.01 has two roots") {
    const auto prof = classify_and_solve(kToy, -0.01);
    const auto [tp, tm] = toy_roots(-0.01);
    REQUIRE(prof.kind == FiberCase::TwoRoots);
    CHECK(std::abs(*prof.t_plus - tp) < 1e-12);
    CHECK(std::abs(*prof.t_minus - tm) < 1e-12);
    // printed reference values, good to five digits
    CHECK(std::abs(*prof.t_plus - 0.271129) < 1e-5);
    CHECK(std::abs(*prof.t_minus - 0.571392) < 1e-5);
    CHECK(std::abs(*prof.extremal_c + 1.0 / 60.0) < 1e-14);
    CHECK(std::abs(*prof.zero_level_c - 0.25) < 1e-14);
    const double lam_plus = oracle::lambda_ray({1, 1, 1, -0.01}, tp);
    CHECK(*prof.phi_plus == doctest::Approx(lam_plus).epsilon(1e-12));
    CHECK(std::abs(*prof.phi_plus - 0.482420) < 1e-5);
}

TEST_CASE("extremal and zero-level pairs of the toy ray") {
    const auto ext = extremal_pair(kToy);
    CHECK(ext.c == doctest::Approx(-1.0 / 60.0).epsilon(1e-14));
    CHECK(std::abs(nehari_g(kToy, ext.c, ext.t)) < 1e-14);
    CHECK(std::abs(fibering_d2(kToy, ext.c, ext.t)) < 1e-10);
    const auto zero = zero_level_pair(kToy);
    CHECK(zero.t == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(zero.c == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(std::abs(fibering_value(kToy, zero.c, zero.t)) < 1e-14);
}

TEST_CASE("case table against sign counting") {
    std::mt19937_64 rng(2024);
    for (int i = 0; i < 2000; ++i) {
        const auto r = oracle::random_ray(rng);
        const auto ref = oracle::classify(r);
        const auto prof = classify_and_solve(oracle::to_ray(r), r.c);
        INFO("n=" << r.n << " a=" << r.a << " b=" << r.b << " c=" << r.c);
        REQUIRE(prof.kind == ref.kind);
        if (ref.t_plus) CHECK(std::abs(*prof.t_plus - *ref.t_plus) <= 1e-9 * *ref.t_plus);
        if (ref.t_minus) CHECK(std::abs(*prof.t_minus - *ref.t_minus) <= 1e-9 * *ref.t_minus);
    }
}

TEST_CASE("merged roots are reported as degenerate") {
    const auto ext = extremal_pair(kToy);
    const auto prof = classify_and_solve(kToy, ext.c);
    CHECK(prof.kind == FiberCase::NoCritical);
    CHECK(prof.degenerate);
    REQUIRE(prof.t_plus);
    CHECK(*prof.t_plus == doctest::Approx(ext.t).epsilon(1e-6));
}

TEST_CASE("classify_and_solve rejects a <= 0") {
    CHECK_THROWS_AS(classify_and_solve({1.0, -1.0, 1.0, {}}, -0.01), DomainError);
    CHECK_THROWS_AS(classify_and_solve({1.0, 0.0, 1.0, {}}, -0.01), DomainError);
    CHECK_THROWS_AS(extremal_pair({1.0, 1.0, -1.0, {}}), DomainError);
}

TEST_CASE("fibering derivatives and partials against differences") {
    std::mt19937_64 rng(9);
    for (int i = 0; i < 200; ++i) {
        const auto r = oracle::random_ray(rng);
        const RayData ray = oracle::to_ray(r);
        const double t = std::pow(10.0, std::uniform_real_distribution<double>(-1, 0.5)(rng));
        const double h = 1e-6 * t;
        const double d1 = (fibering_value(ray, r.c, t + h) - fibering_value(ray, r.c, t - h)) / (2 * h);
        const double d2 = (fibering_d1(ray, r.c, t + h) - fibering_d1(ray, r.c, t - h)) / (2 * h);
        CHECK(fibering_value(ray, r.c, t) == doctest::Approx(oracle::lambda_ray(r, t)).epsilon(1e-12));
        CHECK(fibering_d1(ray, r.c, t) == doctest::Approx(d1).epsilon(1e-5).scale(1e-8 * std::abs(fibering_value(ray, r.c, t)) / t));
        CHECK(fibering_d2(ray, r.c, t) == doctest::Approx(d2).epsilon(1e-5).scale(1e-8 * std::abs(fibering_value(ray, r.c, t)) / (t * t)));

        const auto part = fibering_partials(ray, r.c, t);
        auto shifted = [&](double dn, double da, double db) {
            RayData s = ray;
            s.n += dn, s.a += da, s.b += db;
            return fibering_value(s, r.c, t);
        };
        const double en = 1e-6 * r.n, ea = 1e-6 * r.a, eb = 1e-6 * std::max(std::abs(r.b), 1e-3);
        const double scale = 1e-7 * std::abs(fibering_value(ray, r.c, t));
        CHECK(part.n == doctest::Approx((shifted(en, 0, 0) - shifted(-en, 0, 0)) / (2 * en)).epsilon(1e-5).scale(scale / en));
        CHECK(part.a == doctest::Approx((shifted(0, ea, 0) - shifted(0, -ea, 0)) / (2 * ea)).epsilon(1e-5).scale(scale / ea));
        CHECK(part.b == doctest::Approx((shifted(0, 0, eb) - shifted(0, 0, -eb)) / (2 * eb)).epsilon(1e-5).scale(scale / eb));
    }
}

TEST_CASE("t_plus stays below its bound and restricted_lambda agrees") {
    std::mt19937_64 rng(31);
    int seen = 0;
    for (int i = 0; i < 500; ++i) {
        const auto r = oracle::random_ray(rng);
        if (!(r.c < 0)) continue;
        const RayData ray = oracle::to_ray(r);
        const auto prof = classify_and_solve(ray, r.c);
        if (!prof.t_plus || prof.degenerate) continue;
        ++seen;
        CHECK(*prof.t_plus <= t_plus_upper_bound(ray, r.c) * (1 + 1e-12));
        CHECK(restricted_lambda(ray, r.c, *prof.t_plus) == doctest::Approx(*prof.phi_plus).epsilon(1e-10));
        CHECK(nehari_defect(ray, r.c, *prof.t_plus) < 1e-12);
    }
    CHECK(seen > 100);
}
