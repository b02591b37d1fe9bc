#include "pecurves/conjecture.hpp"

#include <cmath>
#include <sstream>

#include "pecurves/errors.hpp"

namespace pec {

std::vector<double> bump_cells(const Grid& grid, std::array<double, 2> center, double radius) {
    std::vector<double> theta(grid.num_cells(), 0.0);
    for (std::size_t c = 0; c < theta.size(); ++c) {
        const auto [x, y] = grid.cell_midpoint(c);
        const double dx = x - center[0], dy = grid.dimension == 2 ? y - center[1] : 0.0;
        const double q = (dx * dx + dy * dy) / (radius * radius);
        if (q < 1.0) theta[c] = std::exp(1.0 - 1.0 / (1.0 - q));
    }
    return theta;
}

ConjectureWeight construct_weight_for_conjecture(const PLaplacianProblem& base, std::array<double, 2> center,
                                                 double radius, const std::vector<double>& schedule,
                                                 const OptimizerParams& params) {
    if (!(radius > 0.0)) throw ConfigError("bump radius must be positive");
    if (schedule.empty()) throw ConfigError("empty eps schedule");
    const Grid& grid = base.grid;
    const auto theta = bump_cells(grid, center, radius);
    bool inside = false;
    for (std::size_t c = 0; c < theta.size(); ++c) {
        if (theta[c] <= 0.0) continue;
        inside = true;
        if (base.weights.b[c] > 0.0)
            throw ConfigError("b+ does not vanish on the bump ball; move the bump center or shrink the radius");
    }
    if (!inside) throw ConfigError("the bump ball contains no cell midpoint");

    ConjectureWeight out;
    std::vector<double> bplus(base.weights.b.size());
    for (std::size_t c = 0; c < bplus.size(); ++c) bplus[c] = std::max(0.0, base.weights.b[c]);

    // c0 and its minimizers only involve N and B, so any a works here.
    PLaplacianProblem probe = base;
    probe.weights.a = bplus;
    const Instance probe_inst = make_instance(probe);
    const ThresholdResult m = compute_c_star_star(SphereConstraint::from(probe_inst, ConeTag::BPos), params);
    out.c0_min = m.value;
    out.minimizers = m.minimizers;

    std::string last_failure;
    for (double eps : schedule) {
        PLaplacianProblem pr = base;
        pr.weights.a = bplus;
        for (std::size_t c = 0; c < bplus.size(); ++c) pr.weights.a[c] -= eps * theta[c];
        std::ostringstream src;
        src << "b+ - " << eps << " * bump(" << center[0] << (grid.dimension == 2 ? ", " + std::to_string(center[1]) : "")
            << "; r = " << radius << ")";
        pr.weights.a_source = src.str();
        const FunctionalTriple t = build_dirichlet_triple(pr);
        std::vector<double> avals;
        bool ok = true;
        for (std::size_t i = 0; i < out.minimizers.size(); ++i) {
            const double a = t.eval_A(out.minimizers[i]);
            avals.push_back(a);
            if (!(a > 0.0) && ok) {
                ok = false;
                std::ostringstream os;
                os << "eps = " << eps << ": minimizer " << i << " has A(u*) = " << a;
                last_failure = os.str();
            }
        }
        if (ok) {
            out.weights = pr.weights;
            out.eps = eps;
            out.a_at_minimizers = std::move(avals);
            return out;
        }
    }
    throw Error("no eps in the schedule puts every c0-minimizer in C_A; last failure: " + last_failure);
}

}  // namespace pec
