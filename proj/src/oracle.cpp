#include "glaeser/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "glaeser/errors.hpp"

namespace glaeser {

nlohmann::json oracle_verdict_to_json(const OracleVerdict& v) {
    nlohmann::json j;
    j["solvable"] = v.solvable;
    j["method"] = v.method;
    j["witness"] = v.witness;
    j["residual"] = v.residual;
    j["scale"] = v.scale;
    j["worst_ratio"] = v.worst_ratio;
    j["witness_point"] = v.witness_point;
    return j;
}

OracleVerdict eh_criterion(const ScalarExpression& f) {
    if (!f.valid() || !f.is_polynomial())
        throw UnsupportedInput("eh_criterion: f must be a polynomial expression");
    if (f.arity() > 3)
        throw UnsupportedInput("eh_criterion: f must be a polynomial in (x, y, z)");

    OracleVerdict v;
    v.method = "eh-criterion";
    const int deg = f.polynomial_degree_bound();
    const double tol = 1e-9;

    // a polynomial of degree <= deg vanishing at deg+1 points of the z-axis
    // vanishes identically on the axis
    std::vector<Eigen::VectorXd> axis_samples;
    for (int i = 0; i <= deg + 1; ++i) {
        Eigen::VectorXd z = Eigen::VectorXd::Zero(3);
        z[2] = -1.0 + 2.0 * i / std::max(1, deg + 1);
        axis_samples.push_back(z);
    }

    struct Condition {
        std::string witness;
        MultiIndex alpha;
        bool axis; // checked along the axis, else at the origin only
    };
    const std::vector<Condition> conditions = {
        {"f != 0 on z-axis", MultiIndex({0, 0, 0}), true},
        {"df/dx != 0 on z-axis", MultiIndex({1, 0, 0}), true},
        {"df/dy != 0 on z-axis", MultiIndex({0, 1, 0}), true},
        {"d2f/dxdy != 0 at origin", MultiIndex({1, 1, 0}), false},
        {"d3f/dxdydz != 0 at origin", MultiIndex({1, 1, 1}), false},
    };

    for (const auto& cond : conditions) {
        const int order = cond.alpha.order();
        std::vector<Eigen::VectorXd> where;
        if (cond.axis) where = axis_samples;
        else where.push_back(Eigen::VectorXd::Zero(3));
        for (const auto& x : where) {
            const Jet j = jet_from_expression({f}, x, order);
            const double val = j.derivative_at(cond.alpha, x)[0];
            if (std::abs(val) > tol) {
                v.solvable = false;
                v.witness = cond.witness;
                v.residual = std::abs(val);
                v.witness_point.assign(x.data(), x.data() + x.size());
                return v;
            }
        }
    }
    v.solvable = true;
    return v;
}

OracleVerdict whitney_fit(const Bundle& B, const FitConfig& cfg, std::vector<Jet>* fitted) {
    OracleVerdict v;
    v.method = "whitney-fit";
    const SampledDomain& dom = B.domain();

    for (int i = 0; i < dom.size(); ++i) {
        if (B.fiber(i).is_empty()) {
            v.solvable = false;
            v.witness = "empty fiber";
            const auto& x = dom.point(i);
            v.witness_point.assign(x.data(), x.data() + x.size());
            return v;
        }
    }

    const int m_fit = B.m() + cfg.degree_lift;
    const auto& lo_layout = JetLayout::get(B.n(), B.m());
    const auto& hi_layout = JetLayout::get(B.n(), m_fit);
    const int lo_jd = lo_layout.dim();
    const int hi_jd = hi_layout.dim();

    const double total_coords = static_cast<double>(dom.size()) * B.D() * hi_jd;
    if (total_coords > cfg.max_unknowns)
        throw SizeError("whitney_fit: points x jet dimension = " + std::to_string(total_coords) +
                        " exceeds max_unknowns; use coarser sampling");

    // positions of the degree-<=m coordinates inside the lifted layout
    std::vector<int> lo_pos(lo_jd);
    for (int a = 0; a < lo_jd; ++a) lo_pos[a] = hi_layout.position(lo_layout.index(a));

    // lifted fiber parametrization: offset embeds, span embeds, and every
    // coordinate of order > m is a free column
    struct Lifted {
        Eigen::VectorXd offset;
        Eigen::MatrixXd span;
    };
    std::vector<Lifted> lifted(dom.size());
    std::vector<int> pstart(dom.size() + 1, 0);
    for (int i = 0; i < dom.size(); ++i) {
        const AffineJetSet& f = B.fiber(i);
        const int s_lo = f.dim();
        const int extra = B.D() * (hi_jd - lo_jd);
        Lifted& L = lifted[i];
        L.offset = Eigen::VectorXd::Zero(B.D() * hi_jd);
        L.span = Eigen::MatrixXd::Zero(B.D() * hi_jd, s_lo + extra);
        for (int d = 0; d < B.D(); ++d)
            for (int a = 0; a < lo_jd; ++a) {
                L.offset[d * hi_jd + lo_pos[a]] = f.offset()[d * lo_jd + a];
                for (int c = 0; c < s_lo; ++c)
                    L.span(d * hi_jd + lo_pos[a], c) = f.span()(d * lo_jd + a, c);
            }
        int col = s_lo;
        for (int d = 0; d < B.D(); ++d)
            for (int a = 0; a < hi_jd; ++a) {
                if (hi_layout.index(a).order() <= B.m()) continue;
                L.span(d * hi_jd + a, col++) = 1.0;
            }
        pstart[i + 1] = pstart[i] + s_lo + extra;
    }
    const int nparams = pstart[dom.size()];

    const double cutoff = cfg.cutoff_factor * dom.median_nn_spacing();

    // block-accumulated normal equations H t = -g over lifted Whitney rows
    std::map<std::pair<int, int>, Eigen::MatrixXd> blocks;
    Eigen::VectorXd g = Eigen::VectorXd::Zero(nparams);
    double r0 = 0.0;
    long long pair_count = 0;
    auto add_block = [&](int bi, int bj, const Eigen::MatrixXd& contrib) {
        auto key = std::make_pair(bi, bj);
        auto it = blocks.find(key);
        if (it == blocks.end()) blocks.emplace(key, contrib);
        else it->second += contrib;
    };

    auto pair_rows = [&](int i, int j, Eigen::MatrixXd& Ri, Eigen::MatrixXd& Rj,
                         Eigen::VectorXd& rc) {
        const double dist = (dom.point(i) - dom.point(j)).norm();
        const int si = static_cast<int>(lifted[i].span.cols());
        const int sj = static_cast<int>(lifted[j].span.cols());
        const int nrows = B.D() * hi_jd;
        Ri.resize(nrows, si);
        Rj.resize(nrows, sj);
        rc.resize(nrows);
        int row = 0;
        for (int a = 0; a < hi_jd; ++a) {
            const MultiIndex& alpha = hi_layout.index(a);
            const double denom = std::pow(dist, m_fit - alpha.order());
            const Eigen::VectorXd wi =
                derivative_weights(hi_layout, dom.point(i), alpha, dom.point(j)) / denom;
            const Eigen::VectorXd wj =
                derivative_weights(hi_layout, dom.point(j), alpha, dom.point(j)) / denom;
            for (int d = 0; d < B.D(); ++d, ++row) {
                for (int c = 0; c < si; ++c)
                    Ri(row, c) = wi.dot(lifted[i].span.col(c).segment(d * hi_jd, hi_jd));
                for (int c = 0; c < sj; ++c)
                    Rj(row, c) = -wj.dot(lifted[j].span.col(c).segment(d * hi_jd, hi_jd));
                rc[row] = wi.dot(lifted[i].offset.segment(d * hi_jd, hi_jd)) -
                          wj.dot(lifted[j].offset.segment(d * hi_jd, hi_jd));
            }
        }
    };

    Eigen::MatrixXd Ri, Rj;
    Eigen::VectorXd rc;
    for (int i = 0; i < dom.size(); ++i) {
        for (int j : dom.within_radius(dom.point(i), cutoff)) {
            if (j <= i) continue;
            ++pair_count;
            pair_rows(i, j, Ri, Rj, rc);
            r0 += rc.squaredNorm();
            add_block(i, i, Ri.transpose() * Ri);
            add_block(j, j, Rj.transpose() * Rj);
            if (i < j) add_block(i, j, Ri.transpose() * Rj);
            else add_block(j, i, Rj.transpose() * Ri);
            g.segment(pstart[i], Ri.cols()) += Ri.transpose() * rc;
            g.segment(pstart[j], Rj.cols()) += Rj.transpose() * rc;
        }
    }

    Eigen::VectorXd t = Eigen::VectorXd::Zero(nparams);
    double opt = r0;
    if (nparams > 0 && pair_count > 0) {
        std::vector<Eigen::Triplet<double>> trips;
        for (const auto& [key, Mb] : blocks) {
            const auto [bi, bj] = key;
            for (int r = 0; r < Mb.rows(); ++r)
                for (int c = 0; c < Mb.cols(); ++c) {
                    if (Mb(r, c) == 0.0) continue;
                    trips.emplace_back(pstart[bi] + r, pstart[bj] + c, Mb(r, c));
                    if (bi != bj) trips.emplace_back(pstart[bj] + c, pstart[bi] + r, Mb(r, c));
                }
        }
        Eigen::SparseMatrix<double> H(nparams, nparams);
        H.setFromTriplets(trips.begin(), trips.end());
        double maxdiag = 0.0;
        for (int c = 0; c < nparams; ++c) maxdiag = std::max(maxdiag, H.coeff(c, c));
        const double ridge = 1e-10 * std::max(maxdiag, 1.0);
        for (int c = 0; c < nparams; ++c) H.coeffRef(c, c) += ridge;
        Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(H);
        if (solver.info() == Eigen::Success) {
            t = solver.solve(-g);
            // objective = r0 + 2 g.t + t.H t (ridge removed from the report)
            opt = r0 + 2.0 * g.dot(t) + t.dot(H * t) - ridge * t.squaredNorm();
            opt = std::max(0.0, opt);
        }
    }

    // worst single pair at the optimum (diagnostic)
    double worst = 0.0;
    for (int i = 0; i < dom.size(); ++i) {
        for (int j : dom.within_radius(dom.point(i), cutoff)) {
            if (j <= i) continue;
            pair_rows(i, j, Ri, Rj, rc);
            const Eigen::VectorXd r = Ri * t.segment(pstart[i], Ri.cols()) +
                                      Rj * t.segment(pstart[j], Rj.cols()) + rc;
            worst = std::max(worst, r.squaredNorm());
        }
    }

    v.residual = opt;
    v.scale = 1.0 + r0;
    v.worst_ratio = worst;
    v.solvable = opt <= cfg.fit_tol * v.scale;
    if (!v.solvable)
        v.witness = "no compatible family of jets (fit residual above tolerance)";
    if (fitted) {
        fitted->clear();
        for (int i = 0; i < dom.size(); ++i) {
            const Eigen::VectorXd hi =
                lifted[i].offset + lifted[i].span * t.segment(pstart[i], lifted[i].span.cols());
            Eigen::VectorXd lo(B.D() * lo_jd);
            for (int d = 0; d < B.D(); ++d)
                for (int a = 0; a < lo_jd; ++a) lo[d * lo_jd + a] = hi[d * hi_jd + lo_pos[a]];
            fitted->push_back(B.shape_at(i).jet_from_coeffs(lo));
        }
    }
    return v;
}

bool verify_section(const std::vector<ScalarExpression>& F, const Bundle& B, double tol) {
    if (static_cast<int>(F.size()) != B.D())
        throw ContractViolation("verify_section: F must have D components");
    for (int i = 0; i < B.domain().size(); ++i) {
        const Jet j = jet_from_expression(F, B.domain().point(i), B.m());
        if (!(B.fiber(i).membership_residual(j) <= tol)) return false;
    }
    return true;
}

} // namespace glaeser
