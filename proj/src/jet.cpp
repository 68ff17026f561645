#include "glaeser/jet.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "glaeser/errors.hpp"

namespace glaeser {

Jet::Jet(int n, int D, int m, Eigen::VectorXd basepoint, Eigen::VectorXd coeffs)
    : n_(n), D_(D), m_(m), basepoint_(std::move(basepoint)), coeffs_(std::move(coeffs)),
      layout_(&JetLayout::get(n, m)) {
    if (D_ < 1) throw ContractViolation("Jet: D must be >= 1");
    if (basepoint_.size() != n_) throw ContractViolation("Jet: basepoint dimension mismatch");
    if (coeffs_.size() != static_cast<Eigen::Index>(D_) * layout_->dim())
        throw ContractViolation("Jet: expected " + std::to_string(D_ * layout_->dim()) +
                                " coefficients, got " + std::to_string(coeffs_.size()));
}

Jet Jet::zero(int n, int D, int m, const Eigen::VectorXd& basepoint) {
    return Jet(n, D, m, basepoint, Eigen::VectorXd::Zero(D * jet_space_dim(n, m)));
}

Jet Jet::constant(int n, int m, const Eigen::VectorXd& basepoint, const Eigen::VectorXd& values) {
    const int D = static_cast<int>(values.size());
    const int dim = jet_space_dim(n, m);
    Eigen::VectorXd c = Eigen::VectorXd::Zero(D * dim);
    for (int d = 0; d < D; ++d) c[d * dim] = values[d];
    return Jet(n, D, m, basepoint, std::move(c));
}

Jet Jet::coordinate(int n, int m, const Eigen::VectorXd& basepoint, int i) {
    const auto& layout = JetLayout::get(n, m);
    Eigen::VectorXd c = Eigen::VectorXd::Zero(layout.dim());
    c[0] = basepoint[i];
    if (m >= 1) {
        const int a = layout.position(MultiIndex::unit(n, i));
        c[a] = 1.0;
    }
    return Jet(n, 1, m, basepoint, std::move(c));
}

Eigen::VectorXd Jet::evaluate(const Eigen::VectorXd& z) const {
    const Eigen::VectorXd h = z - basepoint_;
    const int dim = layout_->dim();
    Eigen::VectorXd mono(dim);
    for (int a = 0; a < dim; ++a) mono[a] = layout_->index(a).power(h);
    Eigen::VectorXd out(D_);
    for (int d = 0; d < D_; ++d) out[d] = coeffs_.segment(d * dim, dim).dot(mono);
    return out;
}

Eigen::VectorXd Jet::derivative_at(const MultiIndex& alpha, const Eigen::VectorXd& z) const {
    if (alpha.size() != n_) throw ContractViolation("derivative_at: multi-index dimension mismatch");
    if (alpha.order() > m_)
        throw ContractViolation("derivative_at: |alpha| exceeds jet degree " + std::to_string(m_));
    const Eigen::VectorXd h = z - basepoint_;
    const int dim = layout_->dim();
    // d^alpha (z-x)^gamma = gamma!/(gamma-alpha)! (z-x)^(gamma-alpha) for gamma >= alpha
    Eigen::VectorXd w = Eigen::VectorXd::Zero(dim);
    for (int a = 0; a < dim; ++a) {
        const MultiIndex& gamma = layout_->index(a);
        if (!gamma.dominates(alpha)) continue;
        w[a] = gamma.falling_factorial(alpha) * (gamma - alpha).power(h);
    }
    Eigen::VectorXd out(D_);
    for (int d = 0; d < D_; ++d) out[d] = coeffs_.segment(d * dim, dim).dot(w);
    return out;
}

bool Jet::same_shape(const Jet& o, double basepoint_tol) const {
    if (n_ != o.n_ || m_ != o.m_) return false;
    return (basepoint_ - o.basepoint_).norm() <= basepoint_tol;
}

Jet jet_multiply(const Jet& P, const Jet& Q) {
    if (P.D() != 1 && Q.D() != 1)
        throw ContractViolation("jet_multiply: one factor must be scalar");
    const Jet& S = (P.D() == 1) ? P : Q; // scalar factor
    const Jet& V = (P.D() == 1) ? Q : P;
    if (!S.same_shape(V))
        throw ContractViolation("jet_multiply: basepoint or (n, m) mismatch");
    const auto& layout = S.layout();
    const int dim = layout.dim();
    Eigen::VectorXd out = Eigen::VectorXd::Zero(V.D() * dim);
    for (int d = 0; d < V.D(); ++d) {
        const auto s = S.coeffs().segment(0, dim);
        const auto v = V.coeffs().segment(d * dim, dim);
        auto o = out.segment(d * dim, dim);
        for (const auto& e : layout.product_table()) o[e.c] += s[e.a] * v[e.b];
    }
    return Jet(S.n(), V.D(), S.m(), S.basepoint(), std::move(out));
}

Jet jet_project(const Jet& P, int m_target) {
    if (m_target > P.m())
        throw ContractViolation("jet_project: target degree exceeds jet degree");
    const auto& src = P.layout();
    const auto& dst = JetLayout::get(P.n(), m_target);
    Eigen::VectorXd out(static_cast<Eigen::Index>(P.D()) * dst.dim());
    for (int d = 0; d < P.D(); ++d)
        for (int a = 0; a < dst.dim(); ++a) {
            const int sa = src.position(dst.index(a));
            out[d * dst.dim() + a] = P.coeff(d, sa);
        }
    return Jet(P.n(), P.D(), m_target, P.basepoint(), std::move(out));
}

double jet_derivative_at(const Jet& P, const MultiIndex& alpha, const Eigen::VectorXd& z) {
    if (P.D() != 1) throw ContractViolation("jet_derivative_at: scalar jet required");
    return P.derivative_at(alpha, z)[0];
}

Eigen::VectorXd derivative_weights(const JetLayout& layout, const Eigen::VectorXd& basepoint,
                                   const MultiIndex& alpha, const Eigen::VectorXd& z) {
    const Eigen::VectorXd h = z - basepoint;
    Eigen::VectorXd w = Eigen::VectorXd::Zero(layout.dim());
    for (int a = 0; a < layout.dim(); ++a) {
        const MultiIndex& gamma = layout.index(a);
        if (!gamma.dominates(alpha)) continue;
        w[a] = gamma.falling_factorial(alpha) * (gamma - alpha).power(h);
    }
    return w;
}

namespace {

// Taylor-mode evaluation of a scalar expression in the jet ring at (x, m).
// Non-smooth subtrees are handled by the finite-difference fallback below.

Jet fd_jet(const ScalarExpression::Node* node, const Eigen::VectorXd& x, int n, int m);

Jet jet_of_node(const ScalarExpression::Node* node, const Eigen::VectorXd& x, int n, int m) {
    using N = ExprOp;
    const auto& layout = JetLayout::get(n, m);
    switch (node->op) {
        case N::Constant:
            return Jet::constant(n, m, x, Eigen::VectorXd::Constant(1, node->value));
        case N::Coord:
            if (node->coord >= n)
                throw EvalError("expression references x" + std::to_string(node->coord + 1) +
                                " but n = " + std::to_string(n));
            return Jet::coordinate(n, m, x, node->coord);
        case N::Add: {
            Eigen::VectorXd c = Eigen::VectorXd::Zero(layout.dim());
            for (const auto& k : node->children) c += jet_of_node(k.get(), x, n, m).coeffs();
            return Jet(n, 1, m, x, std::move(c));
        }
        case N::Sub: {
            Eigen::VectorXd c = jet_of_node(node->children[0].get(), x, n, m).coeffs() -
                                jet_of_node(node->children[1].get(), x, n, m).coeffs();
            return Jet(n, 1, m, x, std::move(c));
        }
        case N::Neg: {
            Eigen::VectorXd c = -jet_of_node(node->children[0].get(), x, n, m).coeffs();
            return Jet(n, 1, m, x, std::move(c));
        }
        case N::Mul: {
            Jet p = jet_of_node(node->children[0].get(), x, n, m);
            for (size_t i = 1; i < node->children.size(); ++i)
                p = jet_multiply(p, jet_of_node(node->children[i].get(), x, n, m));
            return p;
        }
        case N::Div: {
            Jet num = jet_of_node(node->children[0].get(), x, n, m);
            Jet den = jet_of_node(node->children[1].get(), x, n, m);
            const double c0 = den.coeffs()[0];
            if (c0 == 0.0) {
                std::ostringstream os;
                os << "division by zero at basepoint in jet of (div ...)";
                throw EvalError(os.str());
            }
            // 1/(c0 (1 + u)) with u nilpotent: geometric series up to degree m
            Eigen::VectorXd ucoef = den.coeffs() / c0;
            ucoef[0] = 0.0;
            Jet u(n, 1, m, x, ucoef);
            Eigen::VectorXd acc = Eigen::VectorXd::Zero(den.dim());
            acc[0] = 1.0;
            Jet inv(n, 1, m, x, acc); // running 1 - u + u^2 - ...
            Jet upow = u;
            double sign = -1.0;
            for (int k = 1; k <= m; ++k) {
                inv = Jet(n, 1, m, x, inv.coeffs() + sign * upow.coeffs());
                if (k < m) upow = jet_multiply(upow, u);
                sign = -sign;
            }
            inv = Jet(n, 1, m, x, inv.coeffs() / c0);
            return jet_multiply(num, inv);
        }
        case N::Pow: {
            const int k = node->exponent;
            Jet base = jet_of_node(node->children[0].get(), x, n, m);
            if (k == 0) return Jet::constant(n, m, x, Eigen::VectorXd::Constant(1, 1.0));
            const int a = std::abs(k);
            Jet acc = base;
            for (int i = 1; i < a; ++i) acc = jet_multiply(acc, base);
            if (k > 0) return acc;
            if (acc.coeffs()[0] == 0.0)
                throw EvalError("zero raised to negative power in jet evaluation");
            // reciprocal via the Div path
            Eigen::VectorXd one = Eigen::VectorXd::Zero(acc.dim());
            one[0] = 1.0;
            Jet unit(n, 1, m, x, one);
            Eigen::VectorXd ucoef = acc.coeffs() / acc.coeffs()[0];
            ucoef[0] = 0.0;
            Jet u(n, 1, m, x, ucoef);
            Jet inv = unit;
            Jet upow = u;
            double sign = -1.0;
            for (int i = 1; i <= m; ++i) {
                inv = Jet(n, 1, m, x, inv.coeffs() + sign * upow.coeffs());
                if (i < m) upow = jet_multiply(upow, u);
                sign = -sign;
            }
            return Jet(n, 1, m, x, inv.coeffs() / acc.coeffs()[0]);
        }
        case N::Min:
        case N::Max:
        case N::Abs:
        case N::Sign:
            return fd_jet(node, x, n, m);
    }
    throw EvalError("corrupt expression node");
}

double eval_subtree(const ScalarExpression::Node* node, const Eigen::VectorXd& x, int n, int m) {
    // exact tree evaluation, reusing the 0-jet path
    return jet_of_node(node, x, n, 0).coeffs()[0];
}

/// Central-difference jet for a subtree rooted at a non-smooth node.
/// Step h = eps^(1/3) * max(1, |x_i|) per differentiation level, nested at
/// most twice; mixed/higher derivatives beyond order 2 are unsupported.
Jet fd_jet(const ScalarExpression::Node* node, const Eigen::VectorXd& x, int n, int m) {
    if (m > 2)
        throw UnsupportedInput(
            "derivatives of order > 2 through a non-smooth node are unsupported");
    const auto& layout = JetLayout::get(n, m);
    const double eps13 = std::cbrt(std::numeric_limits<double>::epsilon());
    auto step = [&](int i) { return eps13 * std::max(1.0, std::abs(x[i])); };
    auto value_at = [&](const Eigen::VectorXd& z) { return eval_subtree(node, z, n, 0); };

    Eigen::VectorXd c = Eigen::VectorXd::Zero(layout.dim());
    for (int a = 0; a < layout.dim(); ++a) {
        const MultiIndex& alpha = layout.index(a);
        const int order = alpha.order();
        if (order == 0) {
            c[a] = value_at(x);
            continue;
        }
        // collect the (at most two) differentiation directions
        std::vector<int> dirs;
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < alpha.exponents[i]; ++k) dirs.push_back(i);
        double deriv = 0.0;
        if (order == 1) {
            const int i = dirs[0];
            const double h = step(i);
            Eigen::VectorXd zp = x, zm = x;
            zp[i] += h;
            zm[i] -= h;
            deriv = (value_at(zp) - value_at(zm)) / (2 * h);
        } else { // order == 2
            const int i = dirs[0], j = dirs[1];
            const double hi = step(i), hj = step(j);
            if (i == j) {
                Eigen::VectorXd zp = x, zm = x;
                zp[i] += hi;
                zm[i] -= hi;
                deriv = (value_at(zp) - 2 * value_at(x) + value_at(zm)) / (hi * hi);
            } else {
                Eigen::VectorXd zpp = x, zpm = x, zmp = x, zmm = x;
                zpp[i] += hi; zpp[j] += hj;
                zpm[i] += hi; zpm[j] -= hj;
                zmp[i] -= hi; zmp[j] += hj;
                zmm[i] -= hi; zmm[j] -= hj;
                deriv = (value_at(zpp) - value_at(zpm) - value_at(zmp) + value_at(zmm)) /
                        (4 * hi * hj);
            }
        }
        c[a] = deriv / alpha.factorial();
    }
    return Jet(n, 1, m, x, std::move(c));
}

} // namespace

Jet jet_from_expression(const std::vector<ScalarExpression>& e, const Eigen::VectorXd& x, int m) {
    if (e.empty()) throw ContractViolation("jet_from_expression: empty component list");
    const int n = static_cast<int>(x.size());
    const int D = static_cast<int>(e.size());
    const int dim = jet_space_dim(n, m);
    Eigen::VectorXd coeffs(static_cast<Eigen::Index>(D) * dim);
    for (int d = 0; d < D; ++d) {
        if (!e[d].valid()) throw ContractViolation("jet_from_expression: empty expression");
        Jet jd = jet_of_node(e[d].root(), x, n, m);
        coeffs.segment(d * dim, dim) = jd.coeffs();
    }
    return Jet(n, D, m, x, std::move(coeffs));
}

TransportErrorTable jet_transport_error(const std::vector<ScalarExpression>& F,
                                        const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                                        int m_hi, int m_lo) {
    if (m_hi < m_lo) throw ContractViolation("jet_transport_error: m_hi must be >= m_lo");
    const Jet Jy = jet_from_expression(F, y, m_hi);
    const Jet Jx = jet_from_expression(F, x, m_lo);
    const auto& layout = JetLayout::get(static_cast<int>(x.size()), m_lo);
    TransportErrorTable t;
    t.indices = layout.indices();
    t.errors.resize(Jx.D(), layout.dim());
    for (int a = 0; a < layout.dim(); ++a) {
        const MultiIndex& alpha = t.indices[a];
        // projection to m_lo keeps d^alpha at x unchanged for |alpha| <= m_lo
        const Eigen::VectorXd lhs = Jy.derivative_at(alpha, x);
        const Eigen::VectorXd rhs = Jx.derivative_at(alpha, x);
        t.errors.col(a) = (lhs - rhs).cwiseAbs();
    }
    return t;
}

} // namespace glaeser
