#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "pecurves/curve_tracer.hpp"

namespace pec {

/// Column order of curves.csv.
inline const char* const kCsvHeader = "branch,k,c,lambda,t_root,u_norm,residual_grad,energy_defect,converged,flags";

struct Verdict {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct RunReport {
    std::string command;
    nlohmann::json config;
    std::optional<double> c_star, c_star_star;
    std::vector<EnergyCurve> curves;
    std::vector<Verdict> verdicts;
    nlohmann::json details = nlohmann::json::object();  ///< command specific results
    double seconds = 0.0;

    bool all_pass() const;
    /// The timing lives under "timing"; everything else is deterministic.
    nlohmann::json to_json(bool with_timing = true) const;
    static RunReport from_json(const nlohmann::json& j);
};

nlohmann::json to_json(const CriticalPointRecord& r);
CriticalPointRecord record_from_json(const nlohmann::json& j);
nlohmann::json to_json(const EnergyCurve& c);
EnergyCurve curve_from_json(const nlohmann::json& j);

/// One row per curve point, doubles with 17 significant digits, flags joined by ';'.
void write_curves_csv(std::ostream& os, const std::vector<EnergyCurve>& curves);
std::string curves_csv(const std::vector<EnergyCurve>& curves);

/// Bifurcation diagram: lambda on the horizontal axis, c on the vertical one,
/// one polyline per curve, dashed horizontal lines at c* and c**.
std::string render_svg(const std::vector<EnergyCurve>& curves, std::optional<double> c_star,
                       std::optional<double> c_star_star, const std::string& title = "energy curves");

}  // namespace pec
