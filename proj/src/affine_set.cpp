#include "glaeser/affine_set.hpp"

#include <limits>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "glaeser/errors.hpp"

namespace glaeser {

Eigen::MatrixXd orthonormal_range(const Eigen::MatrixXd& A, double rank_tol) {
    if (A.cols() == 0 || A.norm() == 0.0) return Eigen::MatrixXd(A.rows(), 0);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU);
    const auto& sv = svd.singularValues();
    const double cut = rank_tol * sv[0];
    int r = 0;
    while (r < sv.size() && sv[r] > cut) ++r;
    Eigen::MatrixXd U = svd.matrixU().leftCols(r);
    // deterministic sign: largest-magnitude entry positive
    for (int c = 0; c < U.cols(); ++c) {
        int imax = 0;
        U.col(c).cwiseAbs().maxCoeff(&imax);
        if (U(imax, c) < 0) U.col(c) = -U.col(c);
    }
    return U;
}

AffineJetSet AffineJetSet::empty(const JetShape& shape) {
    return AffineJetSet(shape, true, Eigen::VectorXd::Zero(shape.coeff_dim()),
                        Eigen::MatrixXd(shape.coeff_dim(), 0));
}

AffineJetSet AffineJetSet::full(const JetShape& shape) {
    return AffineJetSet(shape, false, Eigen::VectorXd::Zero(shape.coeff_dim()),
                        Eigen::MatrixXd::Identity(shape.coeff_dim(), shape.coeff_dim()));
}

AffineJetSet AffineJetSet::singleton(const Jet& offset) {
    const JetShape shape = JetShape::of(offset);
    return AffineJetSet(shape, false, offset.coeffs(), Eigen::MatrixXd(shape.coeff_dim(), 0));
}

AffineJetSet AffineJetSet::make(const JetShape& shape, const Eigen::VectorXd& offset,
                                const Eigen::MatrixXd& span_cols, double rank_tol) {
    if (offset.size() != shape.coeff_dim() || span_cols.rows() != shape.coeff_dim())
        throw ContractViolation("AffineJetSet: coefficient dimension mismatch");
    Eigen::MatrixXd V = orthonormal_range(span_cols, rank_tol);
    Eigen::VectorXd o = offset;
    if (V.cols() > 0) o -= V * (V.transpose() * o);
    return AffineJetSet(shape, false, std::move(o), std::move(V));
}

AffineJetSet AffineJetSet::make(const Jet& offset, const std::vector<Jet>& span, double rank_tol) {
    const JetShape shape = JetShape::of(offset);
    Eigen::MatrixXd S(shape.coeff_dim(), static_cast<Eigen::Index>(span.size()));
    for (size_t i = 0; i < span.size(); ++i) {
        if (!span[i].same_shape(offset))
            throw ContractViolation("AffineJetSet: span jet shape mismatch");
        S.col(static_cast<Eigen::Index>(i)) = span[i].coeffs();
    }
    return make(shape, offset.coeffs(), S, rank_tol);
}

Jet AffineJetSet::offset_jet() const {
    if (empty_) throw ContractViolation("offset of empty fiber");
    return shape_.jet_from_coeffs(offset_);
}

std::vector<Jet> AffineJetSet::span_jets() const {
    if (empty_) throw ContractViolation("span of empty fiber");
    std::vector<Jet> out;
    out.reserve(span_.cols());
    for (int c = 0; c < span_.cols(); ++c) out.push_back(shape_.jet_from_coeffs(span_.col(c)));
    return out;
}

const Eigen::VectorXd& AffineJetSet::offset() const {
    if (empty_) throw ContractViolation("offset of empty fiber");
    return offset_;
}

const Eigen::MatrixXd& AffineJetSet::span() const {
    if (empty_) throw ContractViolation("span of empty fiber");
    return span_;
}

double AffineJetSet::membership_residual(const Eigen::VectorXd& coeffs) const {
    if (empty_) return std::numeric_limits<double>::infinity();
    Eigen::VectorXd r = coeffs - offset_;
    if (span_.cols() > 0) r -= span_ * (span_.transpose() * r);
    return r.norm();
}

double AffineJetSet::membership_residual(const Jet& P) const {
    return membership_residual(P.coeffs());
}

bool AffineJetSet::contains(const Jet& P, double tol) const {
    return membership_residual(P) <= tol;
}

double AffineJetSet::containment_residual(const AffineJetSet& other) const {
    if (other.empty_) return 0.0;
    if (empty_) return std::numeric_limits<double>::infinity();
    double worst = membership_residual(other.offset_);
    for (int c = 0; c < other.span_.cols(); ++c) {
        // direction membership: the span vector translated to the offset
        Eigen::VectorXd p = other.offset_ + other.span_.col(c);
        worst = std::max(worst, membership_residual(p));
    }
    return worst;
}

bool AffineJetSet::contains_set(const AffineJetSet& other, double tol) const {
    return containment_residual(other) <= tol;
}

Eigen::VectorXd AffineJetSet::project(const Eigen::VectorXd& coeffs) const {
    if (empty_) throw ContractViolation("projection onto empty fiber");
    Eigen::VectorXd r = coeffs - offset_;
    if (span_.cols() == 0) return offset_;
    return offset_ + span_ * (span_.transpose() * r);
}

AffineJetSet module_closure(const std::vector<Jet>& span, const Eigen::VectorXd& x, int m,
                            double rank_tol) {
    if (span.empty())
        throw ContractViolation("module_closure: need at least one jet to fix the shape");
    const JetShape shape = JetShape::of(span[0]);
    AffineJetSet current = AffineJetSet::make(Jet::zero(shape.n, shape.D, shape.m, x), span,
                                              rank_tol);
    std::vector<Jet> coords;
    for (int i = 0; i < shape.n; ++i) coords.push_back(Jet::coordinate(shape.n, m, x, i));
    for (;;) {
        const int before = current.dim();
        std::vector<Jet> grown = current.span_jets();
        const size_t base = grown.size();
        for (size_t b = 0; b < base; ++b)
            for (const Jet& ci : coords) grown.push_back(jet_multiply(ci, grown[b]));
        if (grown.empty()) break;
        current = AffineJetSet::make(Jet::zero(shape.n, shape.D, shape.m, x), grown, rank_tol);
        if (current.dim() == before) break;
    }
    return current;
}

AffineJetSet module_closure(const AffineJetSet& homogeneous, double rank_tol) {
    if (homogeneous.is_empty() || homogeneous.dim() == 0) return homogeneous;
    const JetShape& shape = homogeneous.shape();
    std::vector<Jet> span = homogeneous.span_jets();
    AffineJetSet closed = module_closure(span, shape.basepoint, shape.m, rank_tol);
    return closed;
}

} // namespace glaeser
