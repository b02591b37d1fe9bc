#include <cmath>

#include "doctest.h"
#include "pecurves/conjecture.hpp"
#include "pecurves/curve_tracer.hpp"
#include "pecurves/errors.hpp"
#include "support.hpp"

using namespace pec;

namespace {

TraceContext small_context(int kmax = 1) {
    TraceContext ctx{testing::sign_changing_1d(31), {}, {}};
    ctx.optimizer.multistart = 8;
    if (kmax >= 2) ctx.basis = make_surrogate_basis(ctx.instance, ConeTag::APos, kmax);
    return ctx;
}

}  // namespace

TEST_CASE("c grids") {
    const auto g = geometric_grid(-10.0, -1e-3, 5);
    REQUIRE(g.size() == 5);
    CHECK(g.front() == doctest::Approx(-10.0));
    CHECK(g.back() == doctest::Approx(-1e-3));
    CHECK(g[2] == doctest::Approx(-0.1));
    CHECK(std::is_sorted(g.begin(), g.end()));
    CHECK_THROWS_AS(geometric_grid(-1.0, 1.0, 4), ConfigError);
    const auto l = linear_grid(0.0, 1.0, 5);
    CHECK(l[1] == doctest::Approx(0.25));
}

TEST_CASE("plus curve decreases and stays positive") {
    const auto ctx = small_context();
    const auto curve = trace_curve(ctx, Branch::Plus, 1, geometric_grid(-10.0, -1e-3, 6));
    REQUIRE(curve.points.size() == 6);
    CHECK(curve.truncation_reason.empty());
    CHECK(curve.monotone_decreasing);
    CHECK(curve.max_successive_jump <= 1.0);
    for (const auto& p : curve.points) {
        CHECK(p.lambda > 0.0);
        CHECK(p.record.converged);
    }
}

TEST_CASE("infeasible levels truncate the curve") {
    const auto ctx = small_context();
    // below c* no ray in C_A ∩ C_B has a Nehari root
    const auto curve = trace_curve(ctx, Branch::Minus, 1, {-1e6, -1e5});
    CHECK(curve.points.empty());
    CHECK_FALSE(curve.truncation_reason.empty());
}

TEST_CASE("negative side equals the flipped weights with lambda negated") {
    auto ctx = small_context();
    const std::vector<double> grid{-2.0, -0.5, -0.05};
    const auto neg = trace_curve_negative_side(ctx, Branch::Plus, 1, grid);
    PLaplacianProblem prob;
    prob.grid = ctx.instance.grid;
    prob.weights = ctx.instance.weights;
    for (auto& a : prob.weights.a) a = -a;
    TraceContext manual{make_instance(prob), ctx.optimizer, {}};
    const auto ref = trace_curve(manual, Branch::Plus, 1, grid);
    REQUIRE(neg.points.size() == ref.points.size());
    CHECK(neg.label() == "negA_plus");
    for (std::size_t i = 0; i < ref.points.size(); ++i)
        CHECK(std::abs(neg.points[i].lambda + ref.points[i].lambda) <= 1e-10 * (1 + std::abs(ref.points[i].lambda)));
}

TEST_CASE("surrogate family is nested in k") {
    const auto ctx = small_context(3);
    const auto fam = trace_family(ctx, Branch::Plus, {1, 2, 3}, geometric_grid(-5.0, -1e-2, 4));
    REQUIRE(fam.size() == 3);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(fam[0].points[i].lambda <= fam[1].points[i].lambda + 1e-9);
        CHECK(fam[1].points[i].lambda <= fam[2].points[i].lambda + 1e-9);
    }
    CHECK(fam[1].nonincreasing);
    CHECK(fam[2].nonincreasing);
    CHECK(fam[1].points[0].surrogate);
}

TEST_CASE("limit check records the t bound and scaling") {
    const auto ctx = small_context();
    const auto rep = limit_check_zero(ctx, 1);
    REQUIRE(rep.lambda.size() == 3);
    CHECK(rep.decreasing);
    CHECK(rep.t_bound_ok);
    CHECK(rep.t_scaling_ok);
    // lambda behaves like |c|^{1 - alpha/eta} near zero
    CHECK(rep.fitted_exponent == doctest::Approx(0.25).epsilon(0.02));
}

TEST_CASE("plus intersections move toward zero") {
    const auto ctx = small_context(3);
    const auto first = evaluate_level(ctx, Branch::Plus, 1, -3.0);
    const auto rep = intersect_with_lambda(ctx, Branch::Plus, first.lambda, {1, 2, 3}, -10.0);
    REQUIRE(rep.hits.size() == 3);
    CHECK(rep.hits[0].c == doctest::Approx(-3.0).epsilon(1e-6));
    CHECK(rep.c_increasing);
    CHECK(rep.norms_monotone);
    const auto none = intersect_with_lambda(ctx, Branch::Plus, 1e9, {1}, -10.0);
    CHECK(none.hits.empty());
    CHECK(none.skipped.size() == 1);
}

TEST_CASE("conjecture weight and the zero of the minus curve") {
    PLaplacianProblem base;
    base.grid = Grid::line(63);
    base.weights = make_weights(base.grid, Expression::parse("0"), Expression::parse("cos(2*pi*x)+0.2"));
    OptimizerParams p;
    p.multistart = 8;
    const auto cw = construct_weight_for_conjecture(base, {0.5, 0.0}, 0.15, kDefaultEpsSchedule, p);
    CHECK(cw.eps > 0.0);
    for (double a : cw.a_at_minimizers) CHECK(a > 0.0);
    base.weights = cw.weights;
    TraceContext ctx{make_instance(base), p, {}};
    ThresholdResult css;
    css.value = cw.c0_min;
    css.minimizers = cw.minimizers;
    const auto ext = extend_minus_past_cstarstar(ctx, css);
    CHECK(ext.positive_before);
    CHECK(ext.zero_at);
    CHECK(ext.negative_after);
    CHECK(ext.pass);

    // a bump placed where b > 0 is rejected
    base.weights = make_weights(base.grid, Expression::parse("0"), Expression::parse("cos(2*pi*x)+0.2"));
    CHECK_THROWS_AS(construct_weight_for_conjecture(base, {0.05, 0.0}, 0.04, kDefaultEpsSchedule, p), ConfigError);
}

TEST_CASE("extension refuses when a c0-minimizer leaves C_A") {
    const auto ctx = small_context();
    ThresholdResult css;
    css.value = 1.0;
    Vec u(ctx.instance.triple.dim(), 0.0);
    for (std::size_t i = 0; i < u.size(); ++i)
        if (ctx.instance.nodes_a_neg[i]) u[i] = 1.0;
    css.minimizers = {u};
    CHECK_THROWS_AS(extend_minus_past_cstarstar(ctx, css), Error);
}
