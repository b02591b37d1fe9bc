#pragma once

#include <array>
#include <string>
#include <vector>

#include "pecurves/expression.hpp"
#include "pecurves/functional.hpp"

namespace pec {

/// Uniform tensor grid. Only interior nodes carry degrees of freedom; the
/// boundary values are fixed at zero. Cells sit between neighbouring nodes,
/// so a 1D grid with nx interior nodes has nx + 1 cells.
struct Grid {
    int dimension = 1;
    int nx = 63;
    int ny = 1;
    double x0 = 0.0, x1 = 1.0;
    double y0 = 0.0, y1 = 1.0;

    static Grid line(int nx, double x0 = 0.0, double x1 = 1.0);
    static Grid rect(int nx, int ny, double x0 = 0.0, double x1 = 1.0, double y0 = 0.0, double y1 = 1.0);

    double hx() const { return (x1 - x0) / (nx + 1); }
    double hy() const { return dimension == 2 ? (y1 - y0) / (ny + 1) : 1.0; }
    double cell_volume() const { return hx() * hy(); }
    int cells_x() const { return nx + 1; }
    int cells_y() const { return dimension == 2 ? ny + 1 : 1; }
    std::size_t num_nodes() const { return static_cast<std::size_t>(nx) * (dimension == 2 ? ny : 1); }
    std::size_t num_cells() const { return static_cast<std::size_t>(cells_x()) * cells_y(); }

    /// Coordinates of interior node i (row-major, x fastest).
    std::array<double, 2> node_point(std::size_t i) const;
    std::array<double, 2> cell_midpoint(std::size_t cell) const;

    /// Throws ConfigError for fewer than 3 interior nodes per axis or a 2D
    /// grid exceeding max_side nodes per axis.
    void validate(int max_side = 64) const;
};

/// Cell values of the weights a and b.
struct WeightField {
    std::vector<double> a;
    std::vector<double> b;
    std::string a_source;
    std::string b_source;
};

/// Evaluates expressions at cell midpoints.
WeightField make_weights(const Grid& grid, const Expression& a, const Expression& b);
std::vector<double> sample_cells(const Grid& grid, const Expression& f);
/// Reads one weight from CSV: one value per line in 1D, or a "rows,cols"
/// header followed by rows of comma separated values in 2D (rows along y).
std::vector<double> read_weight_csv(const std::string& path, const Grid& grid);

/// Per-cell masks by strict sign of the cell weight.
struct SignMasks {
    std::vector<char> a_pos, a_neg, a_zero, b_pos;
};

SignMasks sign_masks(const WeightField& weights);

/// Interior nodes all of whose adjacent cells are in the cell mask.
std::vector<char> node_mask(const Grid& grid, const std::vector<char>& cell_mask);
std::vector<char> mask_and(const std::vector<char>& x, const std::vector<char>& y);

struct PLaplacianProblem {
    Grid grid;
    WeightField weights;
    double p = 2.0;
    Exponents exponents{};  ///< eta must equal p
    double eps_reg = 0.0;
    int max_side_2d = 64;
};

/// N = sum over cells of |grad_h u|^p vol, A and B by vertex-averaged
/// quadrature of a|u|^alpha and b|u|^beta.
FunctionalTriple build_dirichlet_triple(const PLaplacianProblem& problem);

/// Whole-space problem truncated to [-L, L]^d with u = 0 outside. N gains the
/// zeroth-order term sum of |u|^p vol. Requires p > d; weights with
/// noticeable mass near the truncation boundary get a diagnostic.
FunctionalTriple build_truncated_rn_triple(const Grid& grid, const WeightField& weights, double p,
                                           const Exponents& exponents, double L);

/// A triple bundled with the discretization data the optimizers need.
struct Instance {
    FunctionalTriple triple;
    Grid grid;
    WeightField weights;
    SignMasks masks;
    std::vector<char> nodes_a_pos, nodes_a_neg, nodes_b_pos;

    /// Nodes on which a single-node perturbation stays inside the cone.
    std::vector<char> support(ConeTag tag) const;
    /// The instance for -A: triple.with_negated_A() with the a-masks swapped.
    Instance flipped() const;
    /// Maximal runs of consecutive nodes in a mask (1D) or the mask rows (2D).
    std::vector<std::vector<std::size_t>> runs(const std::vector<char>& mask) const;
};

Instance make_instance(const PLaplacianProblem& problem);
Instance make_truncated_instance(const Grid& grid, const WeightField& weights, double p, const Exponents& e,
                                 double L);

/// Samples f at the interior nodes.
Vec sample_nodes(const Grid& grid, const Expression& f);

}  // namespace pec
