#include "pecurves/model_problems.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <cmath>
#include <fstream>
#include <sstream>

#include "pecurves/errors.hpp"

namespace pec {

Grid Grid::line(int nx, double x0, double x1) {
    Grid g;
    g.dimension = 1;
    g.nx = nx;
    g.ny = 1;
    g.x0 = x0;
    g.x1 = x1;
    return g;
}

Grid Grid::rect(int nx, int ny, double x0, double x1, double y0, double y1) {
    Grid g;
    g.dimension = 2;
    g.nx = nx;
    g.ny = ny;
    g.x0 = x0;
    g.x1 = x1;
    g.y0 = y0;
    g.y1 = y1;
    return g;
}

std::array<double, 2> Grid::node_point(std::size_t i) const {
    const auto ix = static_cast<int>(i % nx);
    const auto iy = static_cast<int>(i / nx);
    return {x0 + (ix + 1) * hx(), dimension == 2 ? y0 + (iy + 1) * hy() : 0.0};
}

std::array<double, 2> Grid::cell_midpoint(std::size_t cell) const {
    const auto cx = static_cast<int>(cell % cells_x());
    const auto cy = static_cast<int>(cell / cells_x());
    return {x0 + (cx + 0.5) * hx(), dimension == 2 ? y0 + (cy + 0.5) * hy() : 0.0};
}

void Grid::validate(int max_side) const {
    if (dimension != 1 && dimension != 2) throw ConfigError("grid dimension must be 1 or 2");
    if (nx < 3 || (dimension == 2 && ny < 3))
        throw ConfigError("grid needs at least 3 interior nodes per axis");
    if (!(x1 > x0) || (dimension == 2 && !(y1 > y0))) throw ConfigError("grid bounds must be increasing");
    if (dimension == 2 && (nx > max_side || ny > max_side)) {
        std::ostringstream os;
        os << "2D grid " << nx << "x" << ny << " exceeds the cap of " << max_side << " nodes per axis";
        throw ConfigError(os.str());
    }
}

std::vector<double> sample_cells(const Grid& grid, const Expression& f) {
    std::vector<double> out(grid.num_cells());
    for (std::size_t c = 0; c < out.size(); ++c) {
        const auto [x, y] = grid.cell_midpoint(c);
        out[c] = f(x, y);
        if (!std::isfinite(out[c]))
            throw ConfigError("weight expression '" + f.text() + "' is not finite on the grid");
    }
    return out;
}

Vec sample_nodes(const Grid& grid, const Expression& f) {
    Vec out(grid.num_nodes());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const auto [x, y] = grid.node_point(i);
        out[i] = f(x, y);
    }
    return out;
}

WeightField make_weights(const Grid& grid, const Expression& a, const Expression& b) {
    return {sample_cells(grid, a), sample_cells(grid, b), a.text(), b.text()};
}

std::vector<double> read_weight_csv(const std::string& path, const Grid& grid) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open weight file " + path);
    std::vector<double> values;
    std::string line;
    auto parse_row = [&](const std::string& row) {
        std::stringstream ss(row);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            if (cell.find_first_not_of(" \t\r") == std::string::npos) continue;
            try {
                values.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw ConfigError("weight file " + path + ": bad value '" + cell + "'");
            }
        }
    };
    if (grid.dimension == 2) {
        if (!std::getline(in, line)) throw ConfigError("weight file " + path + " is empty");
        int rows = 0, cols = 0;
        char comma = 0;
        std::stringstream hs(line);
        if (!(hs >> rows >> comma >> cols) || comma != ',')
            throw ConfigError("weight file " + path + ": expected a 'rows,cols' header");
        if (rows != grid.cells_y() || cols != grid.cells_x()) {
            std::ostringstream os;
            os << "weight file " << path << " is " << rows << "x" << cols << " but the grid has " << grid.cells_y()
               << "x" << grid.cells_x() << " cells";
            throw ConfigError(os.str());
        }
    }
    while (std::getline(in, line)) parse_row(line);
    if (values.size() != grid.num_cells()) {
        std::ostringstream os;
        os << "weight file " << path << " has " << values.size() << " values, grid has " << grid.num_cells()
           << " cells";
        throw ConfigError(os.str());
    }
    for (double v : values)
        if (!std::isfinite(v)) throw ConfigError("weight file " + path + " contains a non-finite value");
    return values;
}

SignMasks sign_masks(const WeightField& w) {
    SignMasks m;
    const std::size_t n = w.a.size();
    m.a_pos.assign(n, 0);
    m.a_neg.assign(n, 0);
    m.a_zero.assign(n, 0);
    m.b_pos.assign(w.b.size(), 0);
    for (std::size_t c = 0; c < n; ++c) {
        m.a_pos[c] = w.a[c] > 0;
        m.a_neg[c] = w.a[c] < 0;
        m.a_zero[c] = w.a[c] == 0;
    }
    for (std::size_t c = 0; c < w.b.size(); ++c) m.b_pos[c] = w.b[c] > 0;
    return m;
}

namespace {

// Cells adjacent to interior node i, as cell indices.
template <class F>
void for_adjacent_cells(const Grid& g, std::size_t i, F&& f) {
    if (g.dimension == 1) {
        f(i);
        f(i + 1);
        return;
    }
    const int I = static_cast<int>(i % g.nx) + 1, J = static_cast<int>(i / g.nx) + 1;
    for (int dj = -1; dj <= 0; ++dj)
        for (int di = -1; di <= 0; ++di) f(static_cast<std::size_t>((I + di) + (J + dj) * g.cells_x()));
}

}  // namespace

std::vector<char> node_mask(const Grid& grid, const std::vector<char>& cell_mask) {
    std::vector<char> out(grid.num_nodes(), 1);
    for (std::size_t i = 0; i < out.size(); ++i)
        for_adjacent_cells(grid, i, [&](std::size_t c) { out[i] = out[i] && cell_mask[c]; });
    return out;
}

std::vector<char> mask_and(const std::vector<char>& x, const std::vector<char>& y) {
    std::vector<char> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] && y[i];
    return out;
}

namespace {

inline double pow_abs(double x, double q) {
    const double ax = std::abs(x);
    if (q == 2.0) return ax * ax;
    if (q == 4.0) return (ax * ax) * (ax * ax);
    if (q == 1.5) return ax * std::sqrt(ax);
    if (q == 3.0) return ax * ax * ax;
    return std::pow(ax, q);
}

// d/du |u|^q = q |u|^{q-1} sign(u)
inline double dpow_abs(double x, double q) {
    if (x == 0.0) return 0.0;
    const double s = x < 0 ? -1.0 : 1.0;
    if (q == 2.0) return 2.0 * x;
    if (q == 4.0) return 4.0 * x * x * x;
    if (q == 1.5) return 1.5 * s * std::sqrt(std::abs(x));
    if (q == 3.0) return 3.0 * s * x * x;
    return q * s * std::pow(std::abs(x), q - 1.0);
}

class GridModel final : public TripleModel {
public:
    GridModel(const Grid& grid, const WeightField& w, double p, const Exponents& e, double eps_reg, bool with_mass)
        : p_(p), eps2_(eps_reg * eps_reg), e_(e), hx_(grid.hx()), hy_(grid.hy()), vol_(grid.cell_volume()),
          two_d_(grid.dimension == 2), mass_(with_mass) {
        const std::size_t nn = grid.num_nodes();
        wa_.assign(nn, 0.0);
        wb_.assign(nn, 0.0);
        wm_.assign(nn, 0.0);
        const double share = vol_ / (two_d_ ? 4.0 : 2.0);
        for (std::size_t i = 0; i < nn; ++i) {
            for_adjacent_cells(grid, i, [&](std::size_t c) {
                wa_[i] += w.a[c] * share;
                wb_[i] += w.b[c] * share;
                wm_[i] += share;
            });
        }
        auto dof = [&](int I, int J) -> int {
            if (I < 1 || I > grid.nx) return -1;
            if (!two_d_) return I - 1;
            if (J < 1 || J > grid.ny) return -1;
            return (I - 1) + (J - 1) * grid.nx;
        };
        for (int J = 0; J < grid.cells_y(); ++J)
            for (int I = 0; I < grid.cells_x(); ++I)
                cells_.push_back({dof(I, two_d_ ? J : 1), dof(I + 1, two_d_ ? J : 1), two_d_ ? dof(I, J + 1) : -1});

        using Trip = Eigen::Triplet<double>;
        std::vector<Trip> trips;
        auto edge = [&](int i, int j, double w) {
            if (i >= 0) trips.emplace_back(i, i, w);
            if (j >= 0) trips.emplace_back(j, j, w);
            if (i >= 0 && j >= 0) {
                trips.emplace_back(i, j, -w);
                trips.emplace_back(j, i, -w);
            }
        };
        for (const auto& c : cells_) {
            edge(c.base, c.xn, vol_ / (hx_ * hx_));
            if (two_d_) edge(c.base, c.yn, vol_ / (hy_ * hy_));
        }
        if (mass_)
            for (std::size_t i = 0; i < nn; ++i) trips.emplace_back(i, i, wm_[i]);
        Eigen::SparseMatrix<double> K(static_cast<Eigen::Index>(nn), static_cast<Eigen::Index>(nn));
        K.setFromTriplets(trips.begin(), trips.end());
        solver_.compute(K);
        if (solver_.info() != Eigen::Success) throw NumericalError("factorization of the grid stiffness matrix failed");
    }

    std::size_t dim() const override { return wa_.size(); }

    TripleValues evaluate(std::span<const double> u) const override {
        TripleValues v;
        for (const auto& c : cells_) v.n += vol_ * cell_power(u, c);
        for (std::size_t i = 0; i < u.size(); ++i) {
            if (u[i] == 0.0) continue;
            v.a += wa_[i] * pow_abs(u[i], e_.alpha);
            v.b += wb_[i] * pow_abs(u[i], e_.beta);
            if (mass_) v.n += wm_[i] * pow_abs(u[i], p_);
        }
        return v;
    }

    void gradient(std::span<const double> u, std::span<double> gn, std::span<double> ga,
                  std::span<double> gb) const override {
        std::fill(gn.begin(), gn.end(), 0.0);
        for (const auto& c : cells_) {
            const double ub = at(u, c.base);
            const double gx = (at(u, c.xn) - ub) / hx_;
            const double gy = two_d_ ? (at(u, c.yn) - ub) / hy_ : 0.0;
            const double g2 = gx * gx + gy * gy + eps2_;
            const double s = vol_ * p_ * (p_ == 2.0 ? 1.0 : std::pow(g2, 0.5 * p_ - 1.0));
            const double dx = s * gx / hx_;
            if (c.xn >= 0) gn[c.xn] += dx;
            if (c.base >= 0) gn[c.base] -= dx;
            if (two_d_) {
                const double dy = s * gy / hy_;
                if (c.yn >= 0) gn[c.yn] += dy;
                if (c.base >= 0) gn[c.base] -= dy;
            }
        }
        for (std::size_t i = 0; i < u.size(); ++i) {
            ga[i] = wa_[i] * dpow_abs(u[i], e_.alpha);
            gb[i] = wb_[i] * dpow_abs(u[i], e_.beta);
            if (mass_) gn[i] += wm_[i] * dpow_abs(u[i], p_);
        }
    }

    void riesz(std::span<const double> g, std::span<double> z) const override {
        Eigen::Map<const Eigen::VectorXd> gv(g.data(), static_cast<Eigen::Index>(g.size()));
        Eigen::Map<Eigen::VectorXd> zv(z.data(), static_cast<Eigen::Index>(z.size()));
        zv = solver_.solve(gv);
    }

private:
    struct Cell {
        int base, xn, yn;
    };

    static double at(std::span<const double> u, int i) { return i >= 0 ? u[static_cast<std::size_t>(i)] : 0.0; }

    double cell_power(std::span<const double> u, const Cell& c) const {
        const double ub = at(u, c.base);
        const double gx = (at(u, c.xn) - ub) / hx_;
        const double gy = two_d_ ? (at(u, c.yn) - ub) / hy_ : 0.0;
        const double g2 = gx * gx + gy * gy + eps2_;
        if (p_ == 2.0) return g2;
        return std::pow(g2, 0.5 * p_);
    }

    double p_, eps2_;
    Exponents e_;
    double hx_, hy_, vol_;
    bool two_d_, mass_;
    std::vector<double> wa_, wb_, wm_;
    std::vector<Cell> cells_;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver_;
};

void check_problem_exponents(double p, const Exponents& e, double eps_reg) {
    e.validate();
    if (std::abs(e.eta - p) > 1e-14 * p)
        throw ConfigError("the principal exponent eta must equal p for the p-Laplacian problems");
    if (p < 2.0 && !(eps_reg > 0.0)) throw ConfigError("p < 2 requires a positive smoothing eps_reg");
    if (eps_reg < 0.0) throw ConfigError("eps_reg must be non-negative");
}

void check_weights(const Grid& grid, const WeightField& w) {
    if (w.a.size() != grid.num_cells() || w.b.size() != grid.num_cells())
        throw ConfigError("weight arrays do not match the number of grid cells");
    for (std::size_t c = 0; c < w.a.size(); ++c)
        if (!std::isfinite(w.a[c]) || !std::isfinite(w.b[c])) throw ConfigError("weights must be finite");
}

}  // namespace

FunctionalTriple build_dirichlet_triple(const PLaplacianProblem& pr) {
    pr.grid.validate(pr.max_side_2d);
    check_problem_exponents(pr.p, pr.exponents, pr.eps_reg);
    check_weights(pr.grid, pr.weights);
    std::vector<std::string> diag;
    const int d = pr.grid.dimension;
    if (pr.p < d) {
        const double pstar = d * pr.p / (d - pr.p);
        if (pr.exponents.beta >= pstar) {
            std::ostringstream os;
            os << "beta = " << pr.exponents.beta << " is not below the critical exponent p* = " << pstar;
            diag.push_back(os.str());
        }
    }
    if (pr.eps_reg > 0.0) diag.push_back("gradient smoothing eps_reg > 0 breaks exact homogeneity of N");
    return FunctionalTriple(pr.exponents,
                            std::make_shared<GridModel>(pr.grid, pr.weights, pr.p, pr.exponents, pr.eps_reg, false),
                            std::move(diag));
}

FunctionalTriple build_truncated_rn_triple(const Grid& grid, const WeightField& w, double p, const Exponents& e,
                                           double L) {
    grid.validate();
    check_problem_exponents(p, e, 0.0);
    check_weights(grid, w);
    if (!(p > grid.dimension)) throw ConfigError("the whole-space problem requires p > dimension");
    const double tol = 1e-12 * std::max(1.0, L);
    if (!(L > 0.0) || std::abs(grid.x0 + L) > tol || std::abs(grid.x1 - L) > tol ||
        (grid.dimension == 2 && (std::abs(grid.y0 + L) > tol || std::abs(grid.y1 - L) > tol)))
        throw ConfigError("truncated whole-space grid must span [-L, L] on every axis");

    std::vector<std::string> diag;
    auto outer_share = [&](const std::vector<double>& f) {
        double total = 0.0, outer = 0.0;
        for (std::size_t c = 0; c < f.size(); ++c) {
            const auto [x, y] = grid.cell_midpoint(c);
            const double r = std::max(std::abs(x), std::abs(y));
            total += std::abs(f[c]);
            if (r > 0.5 * L) outer += std::abs(f[c]);
        }
        return total > 0 ? outer / total : 0.0;
    };
    for (auto [name, f] : {std::pair{"a", &w.a}, std::pair{"b", &w.b}}) {
        const double share = outer_share(*f);
        if (share > 0.05) {
            std::ostringstream os;
            os << "weight " << name << " keeps " << 100.0 * share
               << "% of its L1 mass in the outer half of [-L, L]; it may not decay fast enough for the truncation";
            diag.push_back(os.str());
        }
    }
    return FunctionalTriple(e, std::make_shared<GridModel>(grid, w, p, e, 0.0, true), std::move(diag));
}

std::vector<char> Instance::support(ConeTag tag) const {
    switch (tag) {
        case ConeTag::APos: return nodes_a_pos;
        case ConeTag::APosBPos: return mask_and(nodes_a_pos, nodes_b_pos);
        case ConeTag::ANeg: return nodes_a_neg;
        case ConeTag::ANegBPos: return mask_and(nodes_a_neg, nodes_b_pos);
        case ConeTag::BPos: return nodes_b_pos;
    }
    return {};
}

Instance Instance::flipped() const {
    Instance out = *this;
    out.triple = triple.with_negated_A();
    std::swap(out.masks.a_pos, out.masks.a_neg);
    std::swap(out.nodes_a_pos, out.nodes_a_neg);
    return out;
}

std::vector<std::vector<std::size_t>> Instance::runs(const std::vector<char>& mask) const {
    std::vector<std::vector<std::size_t>> out;
    const int rows = grid.dimension == 2 ? grid.ny : 1;
    for (int r = 0; r < rows; ++r) {
        std::vector<std::size_t> cur;
        for (int i = 0; i < grid.nx; ++i) {
            const std::size_t k = static_cast<std::size_t>(i + r * grid.nx);
            if (mask[k]) {
                cur.push_back(k);
            } else if (!cur.empty()) {
                out.push_back(std::move(cur));
                cur.clear();
            }
        }
        if (!cur.empty()) out.push_back(std::move(cur));
    }
    return out;
}

namespace {

Instance assemble(FunctionalTriple triple, const Grid& grid, const WeightField& w) {
    SignMasks m = sign_masks(w);
    auto na = node_mask(grid, m.a_pos);
    auto nneg = node_mask(grid, m.a_neg);
    auto nb = node_mask(grid, m.b_pos);
    return Instance{std::move(triple), grid, w, std::move(m), std::move(na), std::move(nneg), std::move(nb)};
}

}  // namespace

Instance make_instance(const PLaplacianProblem& problem) {
    return assemble(build_dirichlet_triple(problem), problem.grid, problem.weights);
}

Instance make_truncated_instance(const Grid& grid, const WeightField& weights, double p, const Exponents& e,
                                 double L) {
    return assemble(build_truncated_rn_triple(grid, weights, p, e, L), grid, weights);
}

}  // namespace pec
