#pragma once

#include <array>
#include <vector>

#include "pecurves/nehari_minmax.hpp"

namespace pec {

struct ConjectureWeight {
    WeightField weights;  ///< a = b+ - eps theta, b unchanged
    double eps = 0.0;
    double c0_min = 0.0;          ///< inf of c0 over the sphere in C_B
    std::vector<Vec> minimizers;  ///< numeric c0-minimizers (symmetric)
    std::vector<double> a_at_minimizers;
};

inline const std::vector<double> kDefaultEpsSchedule{1.0, 0.5, 0.25, 0.1, 0.05, 0.02, 0.01, 0.005, 0.002, 0.001};

/// Smooth bump exp(1 - 1/(1 - r^2/R^2)) on the ball of radius R, zero outside.
std::vector<double> bump_cells(const Grid& grid, std::array<double, 2> center, double radius);

/// Builds a_eps = b+ - eps theta on the problem's grid, taking the largest eps
/// in `schedule` for which every numerically found c0-minimizer u* (minimizers
/// of c0 over the sphere in C_B) has A_eps(u*) > 0. The weight a of `base` is
/// ignored. Throws ConfigError if b+ does not vanish on the bump's ball and
/// Error naming the offending minimizer if the schedule is exhausted.
ConjectureWeight construct_weight_for_conjecture(const PLaplacianProblem& base, std::array<double, 2> center,
                                                 double radius, const std::vector<double>& schedule,
                                                 const OptimizerParams& params);

}  // namespace pec
