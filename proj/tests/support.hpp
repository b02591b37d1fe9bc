#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "pecurves/model_problems.hpp"

namespace testing {

inline pec::Instance sign_changing_1d(int nx = 63, double p = 2.0, pec::Exponents e = {1.5, 2.0, 4.0}) {
    pec::PLaplacianProblem prob;
    prob.grid = pec::Grid::line(nx);
    prob.weights = pec::make_weights(prob.grid, pec::Expression::parse("sin(2*pi*x)+0.3"),
                                     pec::Expression::parse("cos(2*pi*x)+0.2"));
    prob.p = p;
    prob.exponents = e;
    return pec::make_instance(prob);
}

inline pec::Instance constant_1d(int nx = 31) {
    pec::PLaplacianProblem prob;
    prob.grid = pec::Grid::line(nx);
    prob.weights = pec::make_weights(prob.grid, pec::Expression::parse("1"), pec::Expression::parse("1"));
    return pec::make_instance(prob);
}

inline std::vector<double> random_vec(std::mt19937_64& rng, std::size_t n, double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> d(lo, hi);
    std::vector<double> v(n);
    for (auto& x : v) x = d(rng);
    return v;
}

// Independent 1D quadrature: forward differences per cell, trapezoidal
// nodal weights for the lower-order terms, zero boundary values.
struct Quad1D {
    double n, a, b;
};

inline Quad1D quad_1d(const std::vector<double>& u, const std::vector<double>& a_cell, const std::vector<double>& b_cell,
                      double h, double p, double alpha, double beta) {
    const std::size_t nx = u.size();
    auto val = [&](long i) { return (i < 0 || i >= static_cast<long>(nx)) ? 0.0 : u[static_cast<std::size_t>(i)]; };
    Quad1D q{0, 0, 0};
    for (long j = 0; j <= static_cast<long>(nx); ++j) q.n += std::pow(std::abs((val(j) - val(j - 1)) / h), p) * h;
    for (std::size_t i = 0; i < nx; ++i) {
        const double wa = 0.5 * h * (a_cell[i] + a_cell[i + 1]);
        const double wb = 0.5 * h * (b_cell[i] + b_cell[i + 1]);
        q.a += wa * std::pow(std::abs(u[i]), alpha);
        q.b += wb * std::pow(std::abs(u[i]), beta);
    }
    return q;
}

}  // namespace testing
