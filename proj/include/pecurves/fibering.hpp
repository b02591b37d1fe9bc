#pragma once

#include <optional>
#include <string>

#include "pecurves/functional.hpp"

namespace pec {

/// The three functional values along one ray, u fixed, plus the exponents.
struct RayData {
    double n = 1.0;
    double a = 1.0;
    double b = 1.0;
    Exponents exponents{};

    static RayData from(const Exponents& e, const TripleValues& v) { return {v.n, v.a, v.b, e}; }
};

enum class FiberCase { NoCritical, UniqueMin, UniqueMax, TwoRoots };

const char* to_string(FiberCase c);

struct FiberingProfile {
    FiberCase kind = FiberCase::NoCritical;
    std::optional<double> t_plus;   ///< local minimizer of t -> lambda(c, t u)
    std::optional<double> t_minus;  ///< local maximizer
    std::optional<double> phi_plus;
    std::optional<double> phi_minus;
    std::optional<double> extremal_c;    ///< c(u), only when b > 0
    std::optional<double> zero_level_c;  ///< c0(u), only when b > 0
    /// c sits on c(u): the two roots merged into t_star. Reported as
    /// NoCritical with both t_plus and t_minus set to the double root.
    bool degenerate = false;
};

/// phi_{c,u}(t) = lambda(c, t u) and its first two t-derivatives.
double fibering_value(const RayData& ray, double c, double t);
double fibering_d1(const RayData& ray, double c, double t);
double fibering_d2(const RayData& ray, double c, double t);

/// g(t) = (eta-alpha)/eta n t^eta - (beta-alpha)/beta b t^beta + alpha c.
/// phi'(t) = alpha g(t) / (a t^{alpha+1}), so roots of g are the critical points.
double nehari_g(const RayData& ray, double c, double t);
/// Relative defect |g(t)| / (sum of the absolute values of its three terms).
double nehari_defect(const RayData& ray, double c, double t);

/// Case classification and roots for a > 0. Throws DomainError when a <= 0 or
/// n <= 0, and NumericalError if the bracketed solver fails to converge.
FiberingProfile classify_and_solve(const RayData& ray, double c);

struct ExtremalPair {
    double t = 0.0;
    double c = 0.0;
};

/// Double root (t_star, c(u)) where phi' = phi'' = 0. Requires b > 0.
ExtremalPair extremal_pair(const RayData& ray);
/// (t0(u), c0(u)) where phi = phi' = 0. Requires b > 0.
ExtremalPair zero_level_pair(const RayData& ray);

/// Lambda(c, t u) written through the Nehari identity. Throws NumericalError
/// when it disagrees with fibering_value beyond 1e-10 relative.
double restricted_lambda(const RayData& ray, double c, double t_root);

/// Upper bound (-alpha beta eta c / ((beta-eta)(eta-alpha) n))^{1/eta} for the
/// t_plus root at c < 0.
double t_plus_upper_bound(const RayData& ray, double c);

/// Partial derivatives of phi_{c,u}(t) with respect to (n, a, b) at fixed t.
/// At a root these give the gradient of the 0-homogeneous Lambda(c, .).
TripleValues fibering_partials(const RayData& ray, double c, double t);

}  // namespace pec
