#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "pecurves/conjecture.hpp"
#include "pecurves/curve_tracer.hpp"

namespace pec {

/// c values for one branch: explicit `values`, or `count` points from
/// `from_c_star` * c* up to either `to` or `to_c_star_star` * c**.
struct CGridConfig {
    std::vector<double> values;
    int count = 12;
    double from_c_star = 0.9;
    std::optional<double> to = -1e-3;
    std::optional<double> to_c_star_star;
    std::string spacing = "geometric";  ///< or "linear"

    std::vector<double> resolve(double c_star, double c_star_star) const;
};

struct ConjectureConfig {
    std::array<double, 2> center{0.5, 0.5};
    double radius = 0.15;
    std::vector<double> eps_schedule = kDefaultEpsSchedule;
};

struct ProblemConfig {
    std::string type = "dirichlet";  ///< or "truncated_rn"
    int dimension = 1;
    std::vector<int> nodes{127};
    std::vector<std::array<double, 2>> domain{{0.0, 1.0}};
    double p = 2.0;
    double alpha = 1.5;
    double beta = 4.0;
    std::string a = "sin(2*pi*x)+0.3";
    std::string b = "cos(2*pi*x)+0.2";
    std::string a_file;
    std::string b_file;
    double L = 0.0;
    double eps_reg = 0.0;
    int max_side_2d = 64;
    std::optional<ConjectureConfig> conjecture;
};

struct RunConfig {
    std::vector<std::string> branches{"plus", "minus"};
    std::vector<int> k{1, 2, 3};
    bool negative_side = false;
    int multistart = 32;
    std::uint64_t seed = 0;
    int threads = 1;
    int max_iter = 5000;
    double grad_tol = 1e-8;
    double residual_tol = 1e-6;
    double cone_eps = kDefaultConeEps;
    int lbfgs_memory = 8;
    CGridConfig plus_grid;
    CGridConfig minus_grid;
    std::vector<double> limit_levels{-1e-2, -1e-3, -1e-4};
    double limit_tolerance_ratio = 0.05;
    std::optional<double> lambda_bar;  ///< default: k = 1 plus level at the middle of its grid
    std::vector<int> intersect_k{1, 2, 3};
    std::vector<double> delta_fractions{-0.05, -0.01, 0.0, 0.01, 0.05};
    double zero_tol = 1e-4;

    OptimizerParams optimizer() const;
};

struct OutputConfig {
    std::string directory = "out";
    std::vector<std::string> formats{"csv", "json", "svg"};

    bool wants(const std::string& f) const;
};

struct ExperimentConfig {
    ProblemConfig problem;
    RunConfig run;
    OutputConfig output;

    /// Parses and validates; unknown keys and bad values throw ConfigError.
    static ExperimentConfig from_json(const nlohmann::json& j);
    static ExperimentConfig load(const std::string& path);
    /// Every field with its effective value.
    nlohmann::json to_json() const;
};

/// The discretized problem described by the config. When a conjecture block is
/// present the weight a is replaced by the constructed a_eps, reported in `weight`.
struct BuiltProblem {
    Instance instance;
    PLaplacianProblem problem;
    std::optional<ConjectureWeight> weight;
};

BuiltProblem build_problem(const ExperimentConfig& cfg);

}  // namespace pec
