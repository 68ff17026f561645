#include "glaeser/linalg.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "glaeser/errors.hpp"

namespace glaeser {

Eigen::MatrixXd range_projection(const Eigen::MatrixXd& A, double rank_tol) {
    const Eigen::MatrixXd U = orthonormal_range(A, rank_tol);
    if (U.cols() == 0) return Eigen::MatrixXd::Zero(A.rows(), A.rows());
    return U * U.transpose();
}

Eigen::VectorXd min_norm_lift(const Eigen::MatrixXd& A, const Eigen::VectorXd& xi,
                              double rank_tol) {
    if (A.norm() == 0.0) return Eigen::VectorXd::Zero(A.cols());
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    const double cut = rank_tol * sv[0];
    Eigen::VectorXd y = svd.matrixU().transpose() * xi;
    for (int i = 0; i < sv.size(); ++i) y[i] = (sv[i] > cut) ? y[i] / sv[i] : 0.0;
    return svd.matrixV() * y;
}

PSDQuadraticForm::PSDQuadraticForm(Eigen::MatrixXd matrix, bool validate)
    : matrix_(std::move(matrix)) {
    if (matrix_.rows() != matrix_.cols())
        throw ContractViolation("PSDQuadraticForm: matrix must be square");
    if (!validate) return;
    const double scale = matrix_.cwiseAbs().maxCoeff();
    if (scale == 0.0) return;
    if ((matrix_ - matrix_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
        throw ContractViolation("PSDQuadraticForm: matrix not symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(matrix_, Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues().minCoeff();
    const double hi = es.eigenvalues().maxCoeff();
    if (lo < -1e-9 * std::max(hi, 0.0))
        throw ContractViolation("PSDQuadraticForm: matrix not positive semidefinite");
}

PSDQuadraticForm PSDQuadraticForm::zero(int dim) {
    return PSDQuadraticForm(Eigen::MatrixXd::Zero(dim, dim), false);
}

PSDQuadraticForm PSDQuadraticForm::from_rows(const Eigen::MatrixXd& L) {
    return PSDQuadraticForm(L.transpose() * L, false);
}

PSDMinResult min_psd_over_affine(const PSDQuadraticForm& Q,
                                 const std::vector<AffineJetSet>& blocks,
                                 const std::vector<std::optional<Jet>>& fixed,
                                 double rank_tol) {
    if (!fixed.empty() && fixed.size() != blocks.size())
        throw ContractViolation("min_psd_over_affine: fixed must match blocks");
    int total = 0;
    std::vector<int> block_start(blocks.size()), block_dim(blocks.size());
    for (size_t b = 0; b < blocks.size(); ++b) {
        if (blocks[b].is_empty()) throw EmptyFiberError("empty fiber");
        block_start[b] = total;
        block_dim[b] = blocks[b].shape().coeff_dim();
        total += block_dim[b];
    }
    if (Q.dim() != total)
        throw ContractViolation("min_psd_over_affine: form dimension mismatch");

    // w = w0 + S t, with S the block-diagonal of span bases of free blocks
    Eigen::VectorXd w0(total);
    int free_params = 0;
    std::vector<int> param_start(blocks.size(), -1);
    for (size_t b = 0; b < blocks.size(); ++b) {
        const bool pinned = !fixed.empty() && fixed[b].has_value();
        if (pinned) {
            w0.segment(block_start[b], block_dim[b]) = fixed[b]->coeffs();
        } else {
            w0.segment(block_start[b], block_dim[b]) = blocks[b].offset();
            param_start[b] = free_params;
            free_params += blocks[b].dim();
        }
    }
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(total, free_params);
    for (size_t b = 0; b < blocks.size(); ++b) {
        if (param_start[b] < 0 || blocks[b].dim() == 0) continue;
        S.block(block_start[b], param_start[b], block_dim[b], blocks[b].dim()) = blocks[b].span();
    }

    const Eigen::MatrixXd& M = Q.matrix();
    Eigen::VectorXd t;
    double value;
    if (free_params == 0) {
        t.resize(0);
        value = w0.dot(M * w0);
    } else {
        const Eigen::MatrixXd A = S.transpose() * M * S;
        const Eigen::VectorXd g = S.transpose() * (M * w0);
        // rank-revealing least-norm solve of A t = -g
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
        const auto& ev = es.eigenvalues();
        const double cut = rank_tol * std::max(ev.cwiseAbs().maxCoeff(), 0.0);
        Eigen::VectorXd y = es.eigenvectors().transpose() * (-g);
        for (int i = 0; i < y.size(); ++i) y[i] = (ev[i] > cut) ? y[i] / ev[i] : 0.0;
        t = es.eigenvectors() * y;
        value = w0.dot(M * w0) + 2.0 * g.dot(t) + t.dot(A * t);
    }

    const double scale = std::max({1.0, std::abs(w0.dot(M * w0)),
                                   M.cwiseAbs().maxCoeff() * (1.0 + w0.squaredNorm())});
    if (value < -1e-9 * scale)
        throw InternalConsistencyError("min_psd_over_affine: minimum " + std::to_string(value) +
                                       " is negative beyond roundoff");
    if (value < 0.0) value = 0.0;

    PSDMinResult res;
    res.min_value = value;
    for (size_t b = 0; b < blocks.size(); ++b) {
        Eigen::VectorXd cb = w0.segment(block_start[b], block_dim[b]);
        if (param_start[b] >= 0 && blocks[b].dim() > 0)
            cb += blocks[b].span() * t.segment(param_start[b], blocks[b].dim());
        res.argmin.push_back(blocks[b].shape().jet_from_coeffs(cb));
    }
    return res;
}

} // namespace glaeser
