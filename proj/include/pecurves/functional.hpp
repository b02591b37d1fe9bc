#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace pec {

using Vec = std::vector<double>;

/// Homogeneity degrees of the concave (alpha), principal (eta) and convex
/// (beta) terms. Valid triples satisfy 1 < alpha < eta < beta.
struct Exponents {
    double alpha = 1.5;
    double eta = 2.0;
    double beta = 4.0;

    /// Throws ConfigError naming the violated inequality.
    void validate() const;
};

/// Values of the three functionals at one point.
struct TripleValues {
    double n = 0.0;
    double a = 0.0;
    double b = 0.0;
};

/// Evaluation backend for a homogeneous triple (N, A, B).
///
/// Implementations must be even and homogeneous of degrees (eta, alpha, beta),
/// and must be safe to call concurrently from several threads.
class TripleModel {
public:
    virtual ~TripleModel() = default;

    virtual std::size_t dim() const = 0;
    virtual TripleValues evaluate(std::span<const double> u) const = 0;
    virtual void gradient(std::span<const double> u, std::span<double> grad_n,
                          std::span<double> grad_a, std::span<double> grad_b) const = 0;

    /// Riesz map z = P^{-1} g of the discrete energy inner product.
    /// The default is the Euclidean identity.
    virtual void riesz(std::span<const double> g, std::span<double> z) const;
};

/// The functional triple behind Phi_lambda = N/eta - lambda A/alpha - B/beta.
///
/// Immutable value type; copies share the evaluation backend. The sign of A
/// can be flipped without touching the backend, which is how the C_{-A}
/// branches are reduced to C_A.
class FunctionalTriple {
public:
    FunctionalTriple(Exponents exponents, std::shared_ptr<const TripleModel> model,
                     std::vector<std::string> diagnostics = {});

    const Exponents& exponents() const { return exponents_; }
    std::size_t dim() const { return model_->dim(); }
    double a_sign() const { return a_sign_; }
    const std::vector<std::string>& diagnostics() const { return diagnostics_; }

    TripleValues evaluate(std::span<const double> u) const;
    double eval_N(std::span<const double> u) const { return evaluate(u).n; }
    double eval_A(std::span<const double> u) const { return evaluate(u).a; }
    double eval_B(std::span<const double> u) const { return evaluate(u).b; }

    void gradients(std::span<const double> u, std::span<double> grad_n, std::span<double> grad_a,
                   std::span<double> grad_b) const;
    Vec grad_N(std::span<const double> u) const;
    Vec grad_A(std::span<const double> u) const;
    Vec grad_B(std::span<const double> u) const;

    void riesz(std::span<const double> g, std::span<double> z) const;
    /// sqrt(<g, P^{-1} g>): the discrete dual norm used for residuals.
    double dual_norm(std::span<const double> g) const;
    /// N(u)^{1/eta}, the discrete W^{1,p} norm for the model problems.
    double norm(std::span<const double> u) const;

    /// Same triple with A replaced by -A.
    FunctionalTriple with_negated_A() const;

private:
    Exponents exponents_;
    std::shared_ptr<const TripleModel> model_;
    double a_sign_ = 1.0;
    std::vector<std::string> diagnostics_;
};

/// One-dimensional triple N = n0|u|^eta, A = a0|u|^alpha, B = b0|u|^beta.
/// At u = 1 the three functionals take the values (n0, a0, b0).
FunctionalTriple make_scalar_triple(const Exponents& exponents, double n0, double a0, double b0);

/// Phi_lambda(u) = N(u)/eta - lambda A(u)/alpha - B(u)/beta.
double phi(const FunctionalTriple& triple, double lambda, std::span<const double> u);

/// Phi'_lambda(u) = grad N/eta - lambda grad A/alpha - grad B/beta.
Vec phi_grad(const FunctionalTriple& triple, double lambda, std::span<const double> u);

/// The parameter lambda(c, u) = (N/eta - B/beta - c) / (A/alpha) for which
/// Phi_lambda(u) = c. Throws DomainError when A(u) = 0.
double lambda_of(const FunctionalTriple& triple, double c, std::span<const double> u);
double lambda_of(const Exponents& e, const TripleValues& v, double c);

enum class ConeTag {
    APos,      ///< C_A
    APosBPos,  ///< C_A ∩ C_B
    ANeg,      ///< C_{-A}
    ANegBPos,  ///< C_{-A} ∩ C_B
    BPos,      ///< C_B (used for the c0 minimizer set)
};

const char* to_string(ConeTag tag);

struct ConeMembership {
    bool inside = false;
    double margin = 0.0;  ///< min of the strict quantities required by the tag
};

inline constexpr double kDefaultConeEps = 1e-12;

/// Membership in the open cone. Each strict quantity Q of degree d must exceed
/// eps * N(u)^{d/eta}, which makes the test invariant under u -> t u.
ConeMembership cone_membership(const Exponents& e, const TripleValues& v, ConeTag tag,
                               double eps = kDefaultConeEps);
ConeMembership cone_membership(const FunctionalTriple& triple, ConeTag tag, std::span<const double> u,
                               double eps = kDefaultConeEps);

// Small vector helpers shared across modules.
double dot(std::span<const double> x, std::span<const double> y);
double norm2(std::span<const double> x);
void scale(std::span<double> x, double s);
void axpy(double alpha, std::span<const double> x, std::span<double> y);

}  // namespace pec
