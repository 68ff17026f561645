#pragma once

#include <optional>
#include <vector>

#include <Eigen/Core>

#include "glaeser/jet.hpp"

namespace glaeser {

/// Common shape of all jets in one fiber.
struct JetShape {
    int n = 0, D = 0, m = 0;
    Eigen::VectorXd basepoint;

    int jet_dim() const { return jet_space_dim(n, m); }
    int coeff_dim() const { return D * jet_dim(); }
    Jet jet_from_coeffs(const Eigen::VectorXd& c) const { return Jet(n, D, m, basepoint, c); }
    static JetShape of(const Jet& j) { return {j.n(), j.D(), j.m(), j.basepoint()}; }
};

/// A fiber H_x in jet space: empty, or offset + span of a linear subspace
/// of the coefficient space.
///
/// The representation is canonical: span columns are orthonormal (relative
/// singular-value threshold rank_tol) and the offset is the minimal-norm
/// representative, i.e. orthogonal to the span.  Canonical form makes
/// equality of fibers testable even though the offset is only determined
/// modulo the span.
class AffineJetSet {
public:
    static AffineJetSet empty(const JetShape& shape);
    static AffineJetSet full(const JetShape& shape);
    /// Offset plus raw (not necessarily independent) span; canonicalizes.
    static AffineJetSet make(const Jet& offset, const std::vector<Jet>& span,
                             double rank_tol = 1e-10);
    static AffineJetSet make(const JetShape& shape, const Eigen::VectorXd& offset,
                             const Eigen::MatrixXd& span_cols, double rank_tol = 1e-10);
    static AffineJetSet singleton(const Jet& offset);

    bool is_empty() const { return empty_; }
    /// Dimension of the homogeneous part; -1 for the empty set.
    int dim() const { return empty_ ? -1 : static_cast<int>(span_.cols()); }
    const JetShape& shape() const { return shape_; }

    Jet offset_jet() const;
    std::vector<Jet> span_jets() const;
    const Eigen::VectorXd& offset() const;
    const Eigen::MatrixXd& span() const; // coeff_dim x dim, orthonormal columns

    /// Euclidean distance in coefficient space from P to the set
    /// (+infinity for the empty set).
    double membership_residual(const Jet& P) const;
    double membership_residual(const Eigen::VectorXd& coeffs) const;
    bool contains(const Jet& P, double tol) const;

    /// Max membership residual of other's offset and span points; empty
    /// sets are contained in everything.
    double containment_residual(const AffineJetSet& other) const;
    bool contains_set(const AffineJetSet& other, double tol) const;

    /// Point of the set closest to the given coefficients.
    Eigen::VectorXd project(const Eigen::VectorXd& coeffs) const;

private:
    AffineJetSet(JetShape shape, bool empty, Eigen::VectorXd offset, Eigen::MatrixXd span)
        : shape_(std::move(shape)), empty_(empty), offset_(std::move(offset)),
          span_(std::move(span)) {}
    JetShape shape_;
    bool empty_;
    Eigen::VectorXd offset_;
    Eigen::MatrixXd span_;
};

/// Orthonormal basis of the column space of A, with a deterministic sign
/// convention (largest-magnitude entry of each column positive).
Eigen::MatrixXd orthonormal_range(const Eigen::MatrixXd& A, double rank_tol = 1e-10);

/// Smallest linear subspace containing the given jets that is closed under
/// multiplication by the coordinate jets (z_j - x_j) and by constants;
/// the homogeneous part of an R_x^m-submodule.
AffineJetSet module_closure(const std::vector<Jet>& span, const Eigen::VectorXd& x, int m,
                            double rank_tol = 1e-10);
AffineJetSet module_closure(const AffineJetSet& homogeneous, double rank_tol = 1e-10);

} // namespace glaeser
