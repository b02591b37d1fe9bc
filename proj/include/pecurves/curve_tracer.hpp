#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pecurves/nehari_minmax.hpp"

namespace pec {

/// One sample of an energy curve. k = 1 is the multistart ground level, k >= 2
/// the surrogate upper bound from nested disjoint bumps.
struct CurvePoint {
    Branch branch = Branch::Plus;
    int k = 1;
    double c = 0.0;
    double lambda = 0.0;
    CriticalPointRecord record;
    Vec u;       ///< optimizer point on the unit sphere
    Vec coeffs;  ///< surrogate coefficients (k >= 2)
    bool surrogate = false;
    std::vector<std::string> flags;
};

struct EnergyCurve {
    Branch branch = Branch::Plus;
    int k = 1;
    bool negated_a = false;  ///< traced on C_{-A}; lambda already mapped back
    std::vector<CurvePoint> points;
    bool monotone_decreasing = false;  ///< strict, up to noise 1e-6 (1 + |lambda|)
    bool nonincreasing = false;
    double max_successive_jump = 0.0;  ///< max |dlambda| / (L |dc|); <= 1 passes
    std::optional<double> first_lambda, last_lambda;
    std::string truncation_reason;

    std::string label() const;
};

/// Everything a sweep needs besides the grid of c values.
struct TraceContext {
    Instance instance;
    OptimizerParams optimizer;
    GenusSurrogate basis;  ///< bumps for the largest k used; may be empty for k = 1 only
};

/// Level (k = 1 exact, k >= 2 surrogate) at one c. `warm` seeds the ground
/// level, `hints` the surrogate sampler.
CurvePoint evaluate_level(const TraceContext& ctx, Branch branch, int k, double c, const std::vector<Vec>& warm = {},
                          const std::vector<Vec>& hints = {});

/// Sweeps c_grid (sorted increasingly) with warm starts and computes the
/// monotonicity and bounded-difference-quotient verdicts. Infeasible or empty
/// levels truncate the curve and record the reason.
EnergyCurve trace_curve(const TraceContext& ctx, Branch branch, int k, const std::vector<double>& c_grid);

/// Sweeps every k in ks on the same grid; surrogate levels at the same c reuse
/// the coefficients of the next smaller k so the family is nested.
std::vector<EnergyCurve> trace_family(const TraceContext& ctx, Branch branch, const std::vector<int>& ks,
                                      const std::vector<double>& c_grid);

/// The same sweep on C_{-A} through the reduction Phi_{lambda,A} = Phi_{-lambda,-A}:
/// traced on the flipped instance, lambda negated in the output.
EnergyCurve trace_curve_negative_side(const TraceContext& ctx, Branch branch, int k, const std::vector<double>& c_grid);

/// n points with |c| geometrically spaced between |lo| and |hi| (same sign), increasing in c.
std::vector<double> geometric_grid(double lo, double hi, int n);
std::vector<double> linear_grid(double lo, double hi, int n);

struct LimitReport {
    std::vector<double> c, lambda, t_plus, t_bound;
    bool decreasing = false;
    bool below_tolerance = false;
    bool t_bound_ok = false;
    bool t_scaling_ok = false;
    double ratio = 0.0;           ///< lambda(last c) / lambda(first c)
    double tolerance_ratio = 0.05;
    double fitted_exponent = 0.0;  ///< log-log slope of lambda against |c| (diagnostic)
    bool pass = false;
};

LimitReport limit_check_zero(const TraceContext& ctx, int k, const std::vector<double>& c_values = {-1e-2, -1e-3, -1e-4},
                             double tol_ratio = 0.05);

struct Intersection {
    int k = 1;
    double c = 0.0;
    double lambda = 0.0;
    CriticalPointRecord record;
};

struct IntersectionReport {
    Branch branch = Branch::Plus;
    double lambda_bar = 0.0;
    std::vector<Intersection> hits;
    std::vector<std::string> skipped;
    bool c_increasing = false;
    bool norms_monotone = false;  ///< decreasing for plus, increasing for minus
};

/// Solves lambda_{c,k} = lambda_bar for c by bisection for every k in ks.
/// The plus branch searches (c_low, 0); the minus branch searches upward from
/// c_low, doubling the upper end until the level drops below lambda_bar.
IntersectionReport intersect_with_lambda(const TraceContext& ctx, Branch branch, double lambda_bar,
                                         const std::vector<int>& ks, double c_star);

struct MinusExtension {
    EnergyCurve segment;
    double c_star_star = 0.0;
    double lambda_at_c_star_star = 0.0;
    bool positive_before = false;
    bool zero_at = false;
    bool negative_after = false;
    double continuity_jump = 0.0;
    bool pass = false;
};

/// Traces the minus ground level at c** (1 + f) for each fraction f. Refuses
/// (throws Error) unless every element of M lies in C_A.
MinusExtension extend_minus_past_cstarstar(const TraceContext& ctx, const ThresholdResult& c_star_star,
                                           const std::vector<double>& fractions = {-0.05, -0.01, 0.0, 0.01, 0.05},
                                           double zero_tol = 1e-4);

}  // namespace pec
