#include "pecurves/functional.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "pecurves/errors.hpp"

namespace pec {

void Exponents::validate() const {
    auto fail = [this](const char* what) {
        std::ostringstream os;
        os << "invalid exponents (alpha=" << alpha << ", eta=" << eta << ", beta=" << beta
           << "): ordering 1 < alpha < eta < beta violated: " << what;
        throw ConfigError(os.str());
    };
    if (!std::isfinite(alpha) || !std::isfinite(eta) || !std::isfinite(beta)) fail("non-finite exponent");
    if (!(alpha > 1.0)) fail("alpha <= 1");
    if (!(alpha < eta)) fail("alpha >= eta");
    if (!(eta < beta)) fail("eta >= beta");
}

void TripleModel::riesz(std::span<const double> g, std::span<double> z) const {
    std::copy(g.begin(), g.end(), z.begin());
}

FunctionalTriple::FunctionalTriple(Exponents exponents, std::shared_ptr<const TripleModel> model,
                                   std::vector<std::string> diagnostics)
    : exponents_(exponents), model_(std::move(model)), diagnostics_(std::move(diagnostics)) {
    exponents_.validate();
    if (!model_) throw ConfigError("functional triple without evaluation model");
    if (model_->dim() == 0) throw ConfigError("functional triple with zero degrees of freedom");
}

TripleValues FunctionalTriple::evaluate(std::span<const double> u) const {
    TripleValues v = model_->evaluate(u);
    v.a *= a_sign_;
    return v;
}

void FunctionalTriple::gradients(std::span<const double> u, std::span<double> grad_n,
                                 std::span<double> grad_a, std::span<double> grad_b) const {
    model_->gradient(u, grad_n, grad_a, grad_b);
    if (a_sign_ < 0) scale(grad_a, -1.0);
}

Vec FunctionalTriple::grad_N(std::span<const double> u) const {
    Vec gn(dim()), ga(dim()), gb(dim());
    gradients(u, gn, ga, gb);
    return gn;
}

Vec FunctionalTriple::grad_A(std::span<const double> u) const {
    Vec gn(dim()), ga(dim()), gb(dim());
    gradients(u, gn, ga, gb);
    return ga;
}

Vec FunctionalTriple::grad_B(std::span<const double> u) const {
    Vec gn(dim()), ga(dim()), gb(dim());
    gradients(u, gn, ga, gb);
    return gb;
}

void FunctionalTriple::riesz(std::span<const double> g, std::span<double> z) const {
    model_->riesz(g, z);
}

double FunctionalTriple::dual_norm(std::span<const double> g) const {
    Vec z(g.size());
    riesz(g, z);
    return std::sqrt(std::max(0.0, dot(g, z)));
}

double FunctionalTriple::norm(std::span<const double> u) const {
    return std::pow(std::max(0.0, eval_N(u)), 1.0 / exponents_.eta);
}

FunctionalTriple FunctionalTriple::with_negated_A() const {
    FunctionalTriple copy = *this;
    copy.a_sign_ = -a_sign_;
    return copy;
}

namespace {

class ScalarModel final : public TripleModel {
public:
    ScalarModel(const Exponents& e, double n0, double a0, double b0) : e_(e), n0_(n0), a0_(a0), b0_(b0) {}

    std::size_t dim() const override { return 1; }

    TripleValues evaluate(std::span<const double> u) const override {
        const double x = std::abs(u[0]);
        return {n0_ * std::pow(x, e_.eta), a0_ * std::pow(x, e_.alpha), b0_ * std::pow(x, e_.beta)};
    }

    void gradient(std::span<const double> u, std::span<double> gn, std::span<double> ga,
                  std::span<double> gb) const override {
        const double x = std::abs(u[0]);
        const double s = u[0] < 0 ? -1.0 : 1.0;
        gn[0] = s * n0_ * e_.eta * std::pow(x, e_.eta - 1.0);
        ga[0] = s * a0_ * e_.alpha * std::pow(x, e_.alpha - 1.0);
        gb[0] = s * b0_ * e_.beta * std::pow(x, e_.beta - 1.0);
    }

private:
    Exponents e_;
    double n0_, a0_, b0_;
};

}  // namespace

FunctionalTriple make_scalar_triple(const Exponents& exponents, double n0, double a0, double b0) {
    if (!(n0 > 0.0)) throw ConfigError("scalar triple requires n0 > 0");
    return FunctionalTriple(exponents, std::make_shared<ScalarModel>(exponents, n0, a0, b0));
}

double phi(const FunctionalTriple& triple, double lambda, std::span<const double> u) {
    const auto& e = triple.exponents();
    const TripleValues v = triple.evaluate(u);
    const double r = v.n / e.eta - lambda * v.a / e.alpha - v.b / e.beta;
    if (!std::isfinite(r)) throw NumericalError("phi: non-finite energy (invalid discretization data?)");
    return r;
}

Vec phi_grad(const FunctionalTriple& triple, double lambda, std::span<const double> u) {
    const auto& e = triple.exponents();
    const std::size_t n = triple.dim();
    Vec gn(n), ga(n), gb(n);
    triple.gradients(u, gn, ga, gb);
    Vec out(n);
    for (std::size_t i = 0; i < n; ++i)
        out[i] = gn[i] / e.eta - lambda * ga[i] / e.alpha - gb[i] / e.beta;
    return out;
}

double lambda_of(const Exponents& e, const TripleValues& v, double c) {
    if (v.a == 0.0) throw DomainError("lambda_of: A(u) = 0, u is outside the domain of lambda(c, .)");
    return (v.n / e.eta - v.b / e.beta - c) / (v.a / e.alpha);
}

double lambda_of(const FunctionalTriple& triple, double c, std::span<const double> u) {
    return lambda_of(triple.exponents(), triple.evaluate(u), c);
}

const char* to_string(ConeTag tag) {
    switch (tag) {
        case ConeTag::APos: return "C_A";
        case ConeTag::APosBPos: return "C_A^C_B";
        case ConeTag::ANeg: return "C_-A";
        case ConeTag::ANegBPos: return "C_-A^C_B";
        case ConeTag::BPos: return "C_B";
    }
    return "?";
}

ConeMembership cone_membership(const Exponents& e, const TripleValues& v, ConeTag tag, double eps) {
    const double n = std::max(v.n, 0.0);
    const double scale_a = eps * std::pow(n, e.alpha / e.eta);
    const double scale_b = eps * std::pow(n, e.beta / e.eta);
    bool inside = true;
    double margin = std::numeric_limits<double>::infinity();
    auto require = [&](double q, double threshold) {
        margin = std::min(margin, q);
        inside = inside && (q > threshold);
    };
    switch (tag) {
        case ConeTag::APos: require(v.a, scale_a); break;
        case ConeTag::APosBPos:
            require(v.a, scale_a);
            require(v.b, scale_b);
            break;
        case ConeTag::ANeg: require(-v.a, scale_a); break;
        case ConeTag::ANegBPos:
            require(-v.a, scale_a);
            require(v.b, scale_b);
            break;
        case ConeTag::BPos: require(v.b, scale_b); break;
    }
    if (!(n > 0.0)) inside = false;
    return {inside, margin};
}

ConeMembership cone_membership(const FunctionalTriple& triple, ConeTag tag, std::span<const double> u,
                               double eps) {
    return cone_membership(triple.exponents(), triple.evaluate(u), tag, eps);
}

double dot(std::span<const double> x, std::span<const double> y) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
    return s;
}

double norm2(std::span<const double> x) { return std::sqrt(dot(x, x)); }

void scale(std::span<double> x, double s) {
    for (double& v : x) v *= s;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

}  // namespace pec
