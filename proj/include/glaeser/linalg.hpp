#pragma once

#include <optional>
#include <vector>

#include <Eigen/Core>

#include "glaeser/affine_set.hpp"

namespace glaeser {

/// Orthogonal projector onto the column space of A; idempotent and
/// symmetric.  Rank decided by singular values >= rank_tol * sigma_max.
Eigen::MatrixXd range_projection(const Eigen::MatrixXd& A, double rank_tol = 1e-10);

/// Minimal-Euclidean-norm eta with A eta = range_projection(A) xi.
Eigen::VectorXd min_norm_lift(const Eigen::MatrixXd& A, const Eigen::VectorXd& xi,
                              double rank_tol = 1e-10);

/// Positive semidefinite quadratic form over the concatenated canonical
/// coefficient coordinates of a tuple of jet spaces: Q(w) = w^T M w.
class PSDQuadraticForm {
public:
    explicit PSDQuadraticForm(Eigen::MatrixXd matrix, bool validate = true);
    static PSDQuadraticForm zero(int dim);
    /// Gram form L^T L from stacked linear functionals (rows of L).
    static PSDQuadraticForm from_rows(const Eigen::MatrixXd& L);

    int dim() const { return static_cast<int>(matrix_.rows()); }
    const Eigen::MatrixXd& matrix() const { return matrix_; }
    double evaluate(const Eigen::VectorXd& w) const { return w.dot(matrix_ * w); }

private:
    Eigen::MatrixXd matrix_;
};

struct PSDMinResult {
    double min_value = 0.0;
    std::vector<Jet> argmin; // one jet per block
};

/// Exact minimizer of Q over the product of affine sets, one block per
/// set.  `fixed` optionally pins blocks (typically block 0 = P_0) to given
/// jets.  Solves the normal equations of the offset+span substitution with
/// a rank-revealing factorization; tiny negative minima (roundoff) clamp
/// to 0, larger ones raise InternalConsistencyError.  An empty block
/// raises EmptyFiberError.
PSDMinResult min_psd_over_affine(const PSDQuadraticForm& Q,
                                 const std::vector<AffineJetSet>& blocks,
                                 const std::vector<std::optional<Jet>>& fixed = {},
                                 double rank_tol = 1e-10);

} // namespace glaeser
