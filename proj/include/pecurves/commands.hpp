#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "pecurves/config.hpp"
#include "pecurves/reporting.hpp"

namespace pec {

enum ExitCode : int { kExitOk = 0, kExitConfig = 1, kExitNonconvergence = 2, kExitVerification = 3 };

struct Thresholds {
    ThresholdResult c_star;
    ThresholdResult c_star_star;
};

/// c* and c** over the sphere in C_A ∩ C_B of the instance.
Thresholds compute_thresholds(const Instance& inst, const OptimizerParams& params);

/// One level and its critical point. The record's `converged` decides the exit code.
RunReport cmd_solve(const ExperimentConfig& cfg, double c, Branch branch, int k);
/// Thresholds and every configured curve.
RunReport cmd_trace(const ExperimentConfig& cfg);
/// The invariant suite on the configured instance; verdicts only, no curves.
RunReport cmd_verify(const ExperimentConfig& cfg);
/// c*, c** and a summary of the c0-minimizer set.
RunReport cmd_thresholds(const ExperimentConfig& cfg);

/// The verdicts cmd_verify derives from traced curves alone.
std::vector<Verdict> curve_verdicts(const std::vector<EnergyCurve>& curves, double residual_tol);

struct CliOptions {
    std::string command;
    std::string config_path;
    std::optional<std::string> out;
    std::optional<std::uint64_t> seed;
    bool quiet = false;
    std::optional<double> c;
    std::string branch = "plus";
    int k = 1;
};

/// Loads the config, runs the command, writes the output directory and
/// returns the process exit code. Messages go to `log` and `err`.
int run_cli(const CliOptions& opts, std::ostream& log, std::ostream& err);

/// Writes report.json, config.echo.json and, as requested by the output
/// formats, curves.csv and diagram.svg.
void write_outputs(const RunReport& report, const OutputConfig& out);

}  // namespace pec
