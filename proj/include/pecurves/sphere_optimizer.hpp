#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>

#include "pecurves/functional.hpp"

namespace pec {

struct OptimizerParams {
    int multistart = 32;
    std::uint64_t seed = 0;
    int max_iter = 5000;
    double grad_tol = 1e-8;
    double armijo_c1 = 1e-4;
    double shrink = 0.5;
    double initial_step = 1.0;
    int lbfgs_memory = 8;  ///< 0 selects plain preconditioned projected gradient
    double residual_tol = 1e-6;
    double cone_eps = kDefaultConeEps;
    int threads = 1;  ///< 0 uses std::thread::hardware_concurrency()
};

/// Value and ambient gradient of a 0-homogeneous objective. Implementations
/// throw InfeasibleRayError when u is outside the objective's domain.
using SphereObjective = std::function<double(std::span<const double> u, std::span<double> grad)>;

struct SphereResult {
    Vec u;
    double value = 0.0;
    double gnorm = 0.0;
    int iterations = 0;
    bool converged = false;
    std::string stop_reason;
};

/// u / N(u)^{1/eta}. Throws DomainError when N(u) = 0.
Vec normalize_to_sphere(const FunctionalTriple& triple, std::span<const double> u);

/// Minimizes a 0-homogeneous objective over {N = 1} inside the open cone of
/// `tag`. Directions use the triple's Riesz map, are projected onto the
/// tangent space of the sphere, and steps are retracted by renormalization.
/// Trial points outside the cone or outside the objective's domain shrink the
/// step. The start must be feasible.
SphereResult minimize_on_sphere(const FunctionalTriple& triple, ConeTag tag, const SphereObjective& f,
                                std::span<const double> u0, const OptimizerParams& params);

/// Runs f(i) for i in [0, n) on up to `threads` workers with a fixed
/// contiguous partition. f must only write to slot i of its outputs.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& f);

/// Generator for start number `index` of a run seeded with `seed`.
std::mt19937_64 start_rng(std::uint64_t seed, std::uint64_t index);

}  // namespace pec
