#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pecurves/fibering.hpp"
#include "pecurves/model_problems.hpp"
#include "pecurves/sphere_optimizer.hpp"

namespace pec {

enum class Branch { Plus, Minus };

const char* to_string(Branch b);
Branch parse_branch(const std::string& s);

/// Plus curves live on C_A, minus curves on C_A ∩ C_B.
ConeTag cone_for(Branch b);

/// The unit sphere {N = 1} intersected with an open cone. `support` marks the
/// degrees of freedom used for random starts (empty means all of them).
struct SphereConstraint {
    FunctionalTriple triple;
    ConeTag tag = ConeTag::APos;
    std::vector<char> support;

    static SphereConstraint from(const Instance& inst, ConeTag tag);
};

struct LambdaTilde {
    double value = 0.0;
    double t = 0.0;
    bool degenerate = false;
};

/// Lambda(c, t^{branch}(c,u) u). Throws InfeasibleRayError when u is outside
/// the cone or the branch root does not exist on this ray.
LambdaTilde lambda_tilde(const SphereConstraint& sc, double c, std::span<const double> u, Branch branch,
                         double cone_eps = kDefaultConeEps);
/// Same, also writing the ambient gradient of the 0-homogeneous map.
LambdaTilde lambda_tilde(const SphereConstraint& sc, double c, std::span<const double> u, Branch branch,
                         std::span<double> grad, double cone_eps = kDefaultConeEps);

struct CriticalPointRecord {
    Branch branch = Branch::Plus;
    int k = 1;
    double c = 0.0;
    double lambda = 0.0;
    Vec v;  ///< the scaled point t(c,u) u
    double t_root = 0.0;
    double u_norm = 0.0;
    double residual_grad = 0.0;
    double energy_defect = 0.0;
    int iterations = 0;
    bool converged = false;
    std::vector<std::string> flags;
};

/// Forms v = t(c,u) u and lambda = lambda(c, v), then measures the energy
/// defect |Phi_lambda(v) - c| and the gradient residual
/// |Phi'_lambda(v)|_* / max(|N'/eta|_*, |lambda A'/alpha|_*, |B'/beta|_*).
CriticalPointRecord extract_critical_point(const SphereConstraint& sc, double c, Branch branch,
                                           std::span<const double> u, const OptimizerParams& params = {},
                                           int iterations = 0);

struct LevelResult {
    double level = 0.0;
    Vec u;  ///< minimizer on the sphere
    CriticalPointRecord record;
    int starts = 0;
    int feasible_starts = 0;
    bool empty = false;  ///< no start produced a finite value
};

/// Multistart minimization of Lambda~(c, .) over the sphere in the branch's
/// cone. Warm starts are tried first, then params.multistart random starts.
LevelResult minimize_ground_level(const SphereConstraint& sc, double c, Branch branch, const OptimizerParams& params,
                                  const std::vector<Vec>& warm_starts = {});

/// Disjoint-support positive bumps inside the support mask of the constraint.
/// The level for k uses the first k vectors, so the spans are nested.
struct GenusSurrogate {
    std::vector<Vec> basis;
    int samples = 0;  ///< 0 picks a default per dimension

    GenusSurrogate prefix(int k) const;
    int k() const { return static_cast<int>(basis.size()); }
};

/// Builds k_max sine bumps with geometrically shrinking widths, separated by
/// one-node gaps, inside the support mask of `tag` (the longest run of nodes
/// in 1D, column strips in 2D). Throws ConfigError if the mask is too small.
GenusSurrogate make_surrogate_basis(const Instance& inst, ConeTag tag, int k_max);

struct SurrogateResult {
    double level = 0.0;
    Vec coeffs;
    Vec u;
    CriticalPointRecord record;
    bool valid = false;
    std::string reason;
};

/// sup of Lambda~ over the unit sphere of span(basis): quasi-uniform sampling
/// of the coefficient sphere followed by local ascent. An upper bound for the
/// min-max level with the same k. Each hint (coefficients of a nested
/// smaller surrogate or of a nearby level, zero padded) is always sampled.
SurrogateResult surrogate_level(const SphereConstraint& sc, double c, Branch branch, const GenusSurrogate& sur,
                                const OptimizerParams& params, const std::vector<Vec>& hints = {});

struct ThresholdResult {
    double value = 0.0;
    Vec u;
    std::vector<Vec> minimizers;  ///< symmetric set of distinct optimizers near the best value
    int starts = 0;
};

/// c(u) and c0(u) from the functional values; both are 0-homogeneous.
double extremal_c(const Exponents& e, const TripleValues& v);
double zero_level_c(const Exponents& e, const TripleValues& v);

/// sup of c(u) over the sphere in the constraint's cone (C_A ∩ C_B). Asserts < 0.
ThresholdResult compute_c_star(const SphereConstraint& sc, const OptimizerParams& params);
/// inf of c0(u) over the sphere in the constraint's cone. Asserts > 0.
ThresholdResult compute_c_star_star(const SphereConstraint& sc, const OptimizerParams& params);

}  // namespace pec
