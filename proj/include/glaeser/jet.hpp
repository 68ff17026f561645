#pragma once

#include <vector>

#include <Eigen/Core>

#include "glaeser/expression.hpp"
#include "glaeser/multi_index.hpp"

namespace glaeser {

/// An m-jet at a basepoint x in R^n with D components: the truncated
/// Taylor polynomial of each component, stored as monomial coefficients
/// c_{d,alpha} = (d^alpha P_d)(x) / alpha!, so the polynomial is
/// P_d(z) = sum_alpha c_{d,alpha} (z - x)^alpha.
///
/// Coefficients are flattened component-major in the canonical graded-lex
/// order: entry index = d * dim + a, with a the position of alpha in
/// JetLayout::indices().  This layout is the basis order of every
/// coefficient vector and matrix in the project.
///
/// Jets are immutable values; every operation is pure.
class Jet {
public:
    Jet(int n, int D, int m, Eigen::VectorXd basepoint, Eigen::VectorXd coeffs);

    static Jet zero(int n, int D, int m, const Eigen::VectorXd& basepoint);
    /// Constant jet with the given component values.
    static Jet constant(int n, int m, const Eigen::VectorXd& basepoint,
                        const Eigen::VectorXd& values);
    /// Scalar jet of the coordinate function z_i (value + unit slope).
    static Jet coordinate(int n, int m, const Eigen::VectorXd& basepoint, int i);

    int n() const { return n_; }
    int D() const { return D_; }
    int m() const { return m_; }
    const Eigen::VectorXd& basepoint() const { return basepoint_; }
    const JetLayout& layout() const { return *layout_; }
    int dim() const { return layout_->dim(); }

    const Eigen::VectorXd& coeffs() const { return coeffs_; }
    double coeff(int d, int a) const { return coeffs_[d * layout_->dim() + a]; }

    /// Component values of the stored polynomial at an arbitrary point z.
    Eigen::VectorXd evaluate(const Eigen::VectorXd& z) const;

    /// (d^alpha P_d)(z) for every component, by re-expansion of the
    /// polynomial; |alpha| <= m required.
    Eigen::VectorXd derivative_at(const MultiIndex& alpha, const Eigen::VectorXd& z) const;

    bool same_shape(const Jet& o, double basepoint_tol = 0.0) const;

private:
    int n_, D_, m_;
    Eigen::VectorXd basepoint_;
    Eigen::VectorXd coeffs_;
    const JetLayout* layout_;
};

/// Truncated jet product P ⊙ Q at the common basepoint; one factor must be
/// scalar (D = 1).  Coefficients of PQ with |alpha| > m are discarded.
Jet jet_multiply(const Jet& P, const Jet& Q);

/// Natural degree projection: retains coefficients with |alpha| <= m_target.
Jet jet_project(const Jet& P, int m_target);

/// Scalar derivative value (d^alpha P)(z) for a scalar jet.
double jet_derivative_at(const Jet& P, const MultiIndex& alpha, const Eigen::VectorXd& z);

/// Row of weights w with w . c = (d^alpha P)(z) for a single-component
/// coefficient segment c of a jet based at `basepoint`.  Used to assemble
/// linear functionals of jets into matrices.
Eigen::VectorXd derivative_weights(const JetLayout& layout, const Eigen::VectorXd& basepoint,
                                   const MultiIndex& alpha, const Eigen::VectorXd& z);

/// m-jet of a D-component expression list at x; exact (Taylor-mode jet
/// arithmetic) for polynomial and rational trees.  Derivatives through
/// min/max/abs/sign nodes fall back to nested central differences with
/// step eps^(1/3)*max(1,|x_i|) per level, supported for m <= 2 only.
Jet jet_from_expression(const std::vector<ScalarExpression>& e, const Eigen::VectorXd& x, int m);

/// Per-alpha transport error table: for each |alpha| <= m_lo and each
/// component, |d^alpha{ proj(J_y^(m_hi) F) - J_x^(m_lo) F }(x)|.
struct TransportErrorTable {
    std::vector<MultiIndex> indices; // |alpha| <= m_lo, canonical order
    Eigen::MatrixXd errors;          // D rows, one column per alpha
};
TransportErrorTable jet_transport_error(const std::vector<ScalarExpression>& F,
                                        const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                                        int m_hi, int m_lo);

} // namespace glaeser
