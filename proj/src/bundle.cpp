#include "glaeser/bundle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include <Eigen/Dense>

#include "glaeser/errors.hpp"

namespace glaeser {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNoSupraSlope = 999.0; // sentinel: no supra-tolerance rung
} // namespace

Bundle::Bundle(DomainPtr domain, int D, int m, std::vector<AffineJetSet> fibers)
    : domain_(std::move(domain)), D_(D), m_(m), fibers_(std::move(fibers)) {
    if (!domain_) throw ContractViolation("Bundle: null domain");
    if (static_cast<int>(fibers_.size()) != domain_->size())
        throw ContractViolation("Bundle: one fiber per domain point required");
}

bool Bundle::proper() const {
    for (const auto& f : fibers_)
        if (f.is_empty()) return false;
    return true;
}

JetShape Bundle::shape_at(int i) const {
    return JetShape{domain_->n(), D_, m_, domain_->point(i)};
}

// ---- Whitney form --------------------------------------------------------

namespace {

/// Stacks the linear functionals of the Whitney form over the concatenated
/// coefficient blocks of jets at points[0..k]: one row per (pair i<j,
/// component d, |alpha| <= m), scaled by |x_i - x_j|^-(m-|alpha|).
Eigen::MatrixXd whitney_rows(const std::vector<Eigen::VectorXd>& points, const JetShape& shape) {
    const auto& layout = JetLayout::get(shape.n, shape.m);
    const int jd = layout.dim();
    const int bl = shape.coeff_dim();
    const int k1 = static_cast<int>(points.size());
    const int m = shape.m;

    int nrows = 0;
    for (int i = 0; i < k1; ++i)
        for (int j = i + 1; j < k1; ++j) nrows += shape.D * jd;
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(nrows, k1 * bl);

    int row = 0;
    for (int i = 0; i < k1; ++i) {
        for (int j = i + 1; j < k1; ++j) {
            const double dist = (points[i] - points[j]).norm();
            if (dist == 0.0)
                throw ContractViolation("whitney_form_matrix: coincident points in tuple");
            for (int a = 0; a < jd; ++a) {
                const MultiIndex& alpha = layout.index(a);
                const double denom = std::pow(dist, m - alpha.order());
                const Eigen::VectorXd wi =
                    derivative_weights(layout, points[i], alpha, points[j]) / denom;
                const Eigen::VectorXd wj =
                    derivative_weights(layout, points[j], alpha, points[j]) / denom;
                for (int d = 0; d < shape.D; ++d) {
                    L.row(row).segment(i * bl + d * jd, jd) = wi.transpose();
                    L.row(row).segment(j * bl + d * jd, jd) -= wj.transpose();
                    ++row;
                }
            }
        }
    }
    return L;
}

} // namespace

double whitney_form(const Eigen::VectorXd& x0, const Jet& P0,
                    const std::vector<Eigen::VectorXd>& pts, const std::vector<Jet>& jets,
                    int m) {
    if (pts.size() != jets.size())
        throw ContractViolation("whitney_form: one jet per point required");
    if (P0.m() != m) throw ContractViolation("whitney_form: P0 degree mismatch");
    std::vector<Eigen::VectorXd> points;
    points.push_back(x0);
    for (const auto& p : pts) points.push_back(p);
    std::vector<const Jet*> all;
    all.push_back(&P0);
    for (const auto& j : jets) {
        if (j.D() != P0.D() || j.m() != m || j.n() != P0.n())
            throw ContractViolation("whitney_form: jet shape mismatch");
        all.push_back(&j);
    }
    const auto& layout = JetLayout::get(P0.n(), m);
    double total = 0.0;
    for (size_t i = 0; i < all.size(); ++i) {
        for (size_t j = i + 1; j < all.size(); ++j) {
            const double dist = (points[i] - points[j]).norm();
            for (int a = 0; a < layout.dim(); ++a) {
                const MultiIndex& alpha = layout.index(a);
                const Eigen::VectorXd di = all[i]->derivative_at(alpha, points[j]);
                const Eigen::VectorXd dj = all[j]->derivative_at(alpha, points[j]);
                for (int d = 0; d < P0.D(); ++d) {
                    const double num = std::abs(di[d] - dj[d]);
                    if (dist == 0.0) {
                        // 0^0 = 0 convention: coincident points force agreement
                        if (num > 0.0) return kInf;
                        continue;
                    }
                    const double term = num / std::pow(dist, m - alpha.order());
                    total += term * term;
                }
            }
        }
    }
    return total;
}

PSDQuadraticForm whitney_form_matrix(const Eigen::VectorXd& x0,
                                     const std::vector<Eigen::VectorXd>& pts,
                                     const JetShape& shape) {
    std::vector<Eigen::VectorXd> points;
    points.push_back(x0);
    for (const auto& p : pts) points.push_back(p);
    return PSDQuadraticForm::from_rows(whitney_rows(points, shape));
}

double glaeser_min(const Bundle& B, const Eigen::VectorXd& x0, const Jet& P0,
                   const std::vector<int>& pts) {
    std::vector<Eigen::VectorXd> xs;
    std::vector<AffineJetSet> blocks;
    std::vector<std::optional<Jet>> fixed;
    const JetShape shape0{B.n(), B.D(), B.m(), x0};
    blocks.push_back(AffineJetSet::singleton(P0));
    fixed.emplace_back(P0);
    for (int idx : pts) {
        xs.push_back(B.domain().point(idx));
        if (B.fiber(idx).is_empty()) throw EmptyFiberError("empty fiber");
        blocks.push_back(B.fiber(idx));
        fixed.emplace_back(std::nullopt);
    }
    const PSDQuadraticForm Q = whitney_form_matrix(x0, xs, shape0);
    return min_psd_over_affine(Q, blocks, fixed).min_value;
}

ShellCache compute_shells(const SampledDomain& dom, const std::vector<double>& radii, int k,
                          int cap) {
    ShellCache cache(dom.size());
    for (int i = 0; i < dom.size(); ++i) cache[i] = shells(dom, dom.point(i), radii, k, cap);
    return cache;
}

// ---- refinement ----------------------------------------------------------

namespace {

/// Least-norm minimizer of the homogeneous-coordinate quadratic [t;1]^T Q [t;1].
Eigen::VectorXd homo_minimizer(const Eigen::MatrixXd& Q, double rank_tol) {
    const int s = static_cast<int>(Q.rows()) - 1;
    if (s == 0) return Eigen::VectorXd(0);
    const Eigen::MatrixXd A = Q.topLeftCorner(s, s);
    const Eigen::VectorXd b = Q.topRightCorner(s, 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
    const auto& ev = es.eigenvalues();
    const double cut = rank_tol * std::max(ev.cwiseAbs().maxCoeff(), 0.0);
    Eigen::VectorXd y = es.eigenvectors().transpose() * (-b);
    for (int i = 0; i < y.size(); ++i) y[i] = (ev[i] > cut) ? y[i] / ev[i] : 0.0;
    return es.eigenvectors() * y;
}

double homo_eval(const Eigen::MatrixXd& Q, const Eigen::VectorXd& t) {
    const int s = static_cast<int>(Q.rows()) - 1;
    Eigen::VectorXd v(s + 1);
    v.head(s) = t;
    v[s] = 1.0;
    return std::max(0.0, v.dot(Q * v));
}

struct RungData {
    int rung = -1;       // index into the radius ladder
    double radius = 0.0;
    bool infinite = false;              // some tuple touches an empty fiber
    std::vector<Eigen::MatrixXd> qhat;  // (s+1)x(s+1) reduced forms per tuple
    Eigen::MatrixXd mean;               // mean of qhat
    double rho = 0.0;                   // max quadratic-part magnitude over tuples
};

/// Builds the per-tuple Whitney form, substitutes the fiber
/// parametrizations, and eliminates the free parameters of the tuple
/// fibers (Schur complement), leaving a PSD quadratic in the fiber
/// parameters t of the refined point (homogeneous coordinates [t; 1]).
Eigen::MatrixXd reduced_tuple_form(const Bundle& B, int point, const AffineJetSet& fiber,
                                   const std::vector<int>& tuple, double rank_tol) {
    const JetShape shape = B.shape_at(point);
    const int bl = shape.coeff_dim();
    std::vector<Eigen::VectorXd> points;
    points.push_back(B.domain().point(point));
    for (int idx : tuple) points.push_back(B.domain().point(idx));
    const Eigen::MatrixXd L = whitney_rows(points, shape);

    const int s = fiber.dim();
    int udim = 0;
    for (int idx : tuple) udim += B.fiber(idx).dim();

    Eigen::MatrixXd R(L.rows(), s + udim + 1);
    R.setZero();
    Eigen::VectorXd w0 = Eigen::VectorXd::Zero(L.cols());
    w0.segment(0, bl) = fiber.offset();
    if (s > 0) R.leftCols(s) = L.leftCols(bl) * fiber.span();
    int ucol = s;
    for (size_t i = 0; i < tuple.size(); ++i) {
        const AffineJetSet& fi = B.fiber(tuple[i]);
        const int off = static_cast<int>(i + 1) * bl;
        w0.segment(off, bl) = fi.offset();
        if (fi.dim() > 0) {
            R.middleCols(ucol, fi.dim()) = L.middleCols(off, bl) * fi.span();
            ucol += fi.dim();
        }
    }
    R.col(s + udim) = L * w0;

    Eigen::MatrixXd G = R.transpose() * R;
    if (udim == 0) return G;

    // Schur-eliminate the u block (indices s .. s+udim-1)
    Eigen::MatrixXd A(s + 1, s + 1);
    A.topLeftCorner(s, s) = G.topLeftCorner(s, s);
    A.topRightCorner(s, 1) = G.block(0, s + udim, s, 1);
    A.bottomLeftCorner(1, s) = G.block(s + udim, 0, 1, s);
    A(s, s) = G(s + udim, s + udim);
    Eigen::MatrixXd X(s + 1, udim);
    X.topRows(s) = G.block(0, s, s, udim);
    X.bottomRows(1) = G.block(s + udim, s, 1, udim);
    const Eigen::MatrixXd Guu = G.block(s, s, udim, udim);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Guu);
    const auto& ev = es.eigenvalues();
    const double cut = rank_tol * std::max(ev.cwiseAbs().maxCoeff(), 0.0);
    Eigen::MatrixXd Y = es.eigenvectors().transpose() * X.transpose();
    for (int i = 0; i < ev.size(); ++i) {
        if (ev[i] > cut) Y.row(i) /= ev[i];
        else Y.row(i).setZero();
    }
    Eigen::MatrixXd Q = A - X * (es.eigenvectors() * Y);
    return 0.5 * (Q + Q.transpose());
}

struct LadderEntry {
    double radius;
    double value;
    double floor;
};

struct LadderOutcome {
    bool pass = false;
    bool ambiguous = false;
    double slope = 0.0;
    double max_value = 0.0;
    bool any_inf = false;
};

/// GR2-numeric: rungs at or below their tolerance floor carry no evidence;
/// the log-log slope is fitted over the supra-tolerance rungs and must
/// reach decay_slope_min.  An all-sub-tolerance ladder passes outright.
LadderOutcome ladder_test(const std::vector<LadderEntry>& entries, const RefineConfig& cfg) {
    LadderOutcome out;
    std::vector<double> lr, lv;
    for (const auto& e : entries) {
        if (std::isinf(e.value)) {
            out.any_inf = true;
            out.max_value = kInf;
            out.slope = -kInf;
            return out;
        }
        out.max_value = std::max(out.max_value, e.value);
        if (e.value > e.floor) {
            lr.push_back(std::log(e.radius));
            lv.push_back(std::log(e.value));
        }
    }
    if (lr.empty()) {
        out.pass = true;
        out.slope = kNoSupraSlope;
        return out;
    }
    if (lr.size() == 1) {
        out.slope = 0.0; // one supra rung: no evidence of decay
    } else {
        double mr = 0, mv = 0;
        for (size_t i = 0; i < lr.size(); ++i) {
            mr += lr[i];
            mv += lv[i];
        }
        mr /= lr.size();
        mv /= lv.size();
        double num = 0, den = 0;
        for (size_t i = 0; i < lr.size(); ++i) {
            num += (lr[i] - mr) * (lv[i] - mv);
            den += (lr[i] - mr) * (lr[i] - mr);
        }
        out.slope = (den > 0) ? num / den : 0.0;
    }
    out.pass = out.slope >= cfg.decay_slope_min;
    out.ambiguous = !out.pass && out.slope > cfg.ambiguous_slope_min;
    return out;
}

} // namespace

AffineJetSet refine_fiber(const Bundle& B, int point, RefineMode mode, const RefineConfig& cfg,
                          const ShellCache* shells_cache, PointRefineReport* report) {
    const AffineJetSet& fiber = B.fiber(point);
    PointRefineReport local;
    PointRefineReport& rep = report ? *report : local;
    rep.point = point;
    rep.dim_before = fiber.dim();
    rep.dim_after = fiber.dim();

    const std::vector<double> radii = cfg.ladder_for(B.domain().diameter());
    rep.ladder_values.assign(radii.size(), std::numeric_limits<double>::quiet_NaN());
    if (fiber.is_empty()) return fiber;

    const Eigen::VectorXd& x0 = B.domain().point(point);
    std::vector<std::vector<std::vector<int>>> local_shells;
    const std::vector<std::vector<std::vector<int>>>* tuples;
    if (shells_cache) {
        tuples = &(*shells_cache)[point];
    } else {
        local_shells = shells(B.domain(), x0, radii, cfg.k_bar, cfg.tuple_cap);
        tuples = &local_shells;
    }

    const int s = fiber.dim();
    std::vector<RungData> rungs;
    for (size_t ri = 0; ri < radii.size(); ++ri) {
        const auto& tups = (*tuples)[ri];
        if (tups.empty()) continue;
        RungData rd;
        rd.rung = static_cast<int>(ri);
        rd.radius = radii[ri];
        for (const auto& tup : tups) {
            bool empty_touch = false;
            for (int idx : tup)
                if (B.fiber(idx).is_empty()) empty_touch = true;
            if (empty_touch) {
                rd.infinite = true;
                break;
            }
            rd.qhat.push_back(reduced_tuple_form(B, point, fiber, tup, cfg.rank_tol));
        }
        if (!rd.infinite) {
            rd.mean = Eigen::MatrixXd::Zero(s + 1, s + 1);
            for (const auto& q : rd.qhat) {
                rd.mean += q;
                if (s > 0)
                    rd.rho = std::max(rd.rho, q.topLeftCorner(s, s).cwiseAbs().maxCoeff());
            }
            rd.mean /= static_cast<double>(rd.qhat.size());
        }
        rungs.push_back(std::move(rd));
    }
    if (rungs.empty()) {
        rep.vacuous = true; // isolated point: the limit holds vacuously
        return fiber;
    }

    // rung-normalized aggregate, finer rungs weighted up
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(s + 1, s + 1);
    for (const auto& rd : rungs) {
        if (rd.infinite) continue;
        const double nu = std::max(rd.mean.cwiseAbs().maxCoeff(), 1e-300);
        G += std::pow(2.0, rd.rung) / nu * rd.mean;
    }

    auto ladder_max = [&](const Eigen::VectorXd& t, int rung_idx) -> double {
        const RungData& rd = rungs[rung_idx];
        if (rd.infinite) return kInf;
        double v = 0.0;
        for (const auto& q : rd.qhat) v = std::max(v, homo_eval(q, t));
        return v;
    };
    auto candidate_outcome = [&](const Eigen::VectorXd& t) {
        const double sp = 1.0 + (fiber.offset() + (s > 0 ? (fiber.span() * t).eval()
                                                         : Eigen::VectorXd::Zero(
                                                               fiber.offset().size())))
                                    .squaredNorm();
        std::vector<LadderEntry> entries;
        for (size_t k = 0; k < rungs.size(); ++k)
            entries.push_back({rungs[k].radius, ladder_max(t, static_cast<int>(k)),
                               cfg.zero_tol * sp});
        LadderOutcome o = ladder_test(entries, cfg);
        return std::make_pair(o, sp);
    };

    // anchor candidates: aggregate minimizer, finest nontrivial rung
    // minimizer, original offset
    std::vector<Eigen::VectorXd> candidates;
    if (s > 0) {
        candidates.push_back(homo_minimizer(G, cfg.rank_tol));
        for (int k = static_cast<int>(rungs.size()) - 1; k >= 0; --k) {
            if (rungs[k].infinite || rungs[k].mean.cwiseAbs().maxCoeff() <= 0) continue;
            candidates.push_back(homo_minimizer(rungs[k].mean, cfg.rank_tol));
            break;
        }
        candidates.push_back(Eigen::VectorXd::Zero(s));
        // drop near-duplicates
        std::vector<Eigen::VectorXd> uniq;
        for (const auto& c : candidates) {
            bool dup = false;
            for (const auto& u : uniq)
                if ((c - u).norm() <= 1e-12 * (1.0 + u.norm())) dup = true;
            if (!dup) uniq.push_back(c);
        }
        candidates = std::move(uniq);
    } else {
        candidates.push_back(Eigen::VectorXd(0));
    }

    int anchor = -1;
    LadderOutcome anchor_out;
    double anchor_scale = 1.0;
    bool any_ambiguous = false;
    double best_slope = -kInf;
    int best = 0;
    for (size_t c = 0; c < candidates.size(); ++c) {
        auto [o, sp] = candidate_outcome(candidates[c]);
        any_ambiguous = any_ambiguous || o.ambiguous;
        if (o.slope > best_slope) {
            best_slope = o.slope;
            best = static_cast<int>(c);
        }
        if (o.pass) {
            anchor = static_cast<int>(c);
            anchor_out = o;
            anchor_scale = sp;
            break;
        }
    }

    auto record_ladder = [&](const Eigen::VectorXd& t, const LadderOutcome& o) {
        for (size_t k = 0; k < rungs.size(); ++k)
            rep.ladder_values[rungs[k].rung] = ladder_max(t, static_cast<int>(k));
        rep.decay_slope = o.slope;
    };

    if (anchor < 0) {
        auto [o, sp] = candidate_outcome(candidates[best]);
        (void)sp;
        record_ladder(candidates[best], o);
        rep.ambiguous = any_ambiguous || o.ambiguous;
        rep.emptied = true;
        rep.dim_after = -1;
        return AffineJetSet::empty(fiber.shape());
    }

    // GR1-numeric gate (strong mode): ladder maxima bounded
    if (mode == RefineMode::Strong && anchor_out.max_value > cfg.bound_factor * anchor_scale) {
        record_ladder(candidates[anchor], anchor_out);
        rep.emptied = true;
        rep.dim_after = -1;
        return AffineJetSet::empty(fiber.shape());
    }

    const Eigen::VectorXd& t_anchor = candidates[anchor];
    record_ladder(t_anchor, anchor_out);

    // direction classification over the eigenvectors of the aggregate form
    std::vector<Eigen::VectorXd> kept;
    if (s > 0) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G.topLeftCorner(s, s));
        for (int e = 0; e < s; ++e) {
            const Eigen::VectorXd v = es.eigenvectors().col(e);
            std::vector<LadderEntry> entries;
            for (const auto& rd : rungs) {
                double a = 0.0;
                for (const auto& q : rd.qhat)
                    a = std::max(a, std::max(0.0, v.dot(q.topLeftCorner(s, s) * v)));
                entries.push_back({rd.radius, a, cfg.kernel_tol * rd.rho + 1e-300});
            }
            LadderOutcome o = ladder_test(entries, cfg);
            bool keep = o.pass;
            if (keep && mode == RefineMode::Strong) {
                const double sdir =
                    1.0 + (fiber.offset() + fiber.span() * (t_anchor + v)).squaredNorm();
                if (o.max_value > cfg.bound_factor * sdir) keep = false;
            }
            if (!keep && o.ambiguous) rep.ambiguous = true;
            if (keep) kept.push_back(v);
        }
    }

    const JetShape shape = fiber.shape();
    Eigen::VectorXd offset = fiber.offset();
    if (s > 0) offset += fiber.span() * t_anchor;
    Eigen::MatrixXd span(shape.coeff_dim(), static_cast<Eigen::Index>(kept.size()));
    for (size_t i = 0; i < kept.size(); ++i)
        span.col(static_cast<Eigen::Index>(i)) = fiber.span() * kept[i];

    AffineJetSet result = AffineJetSet::make(shape, offset, span, cfg.rank_tol);
    if (result.dim() > 0) {
        // refined fibers are translates of modules; re-close the span
        AffineJetSet closed = module_closure(result, cfg.rank_tol);
        result = AffineJetSet::make(shape, offset, closed.span(), cfg.rank_tol);
    }
    rep.dim_after = result.dim();
    return result;
}

std::pair<Bundle, RefinementReport> refine(const Bundle& B, RefineMode mode,
                                           const RefineConfig& cfg,
                                           const ShellCache* shells_cache) {
    const int npts = B.domain().size();
    std::vector<AffineJetSet> out;
    out.reserve(npts);
    for (int i = 0; i < npts; ++i) out.push_back(B.fiber(i));
    RefinementReport report;
    report.points.resize(npts);

    const int nthreads = std::max(1, cfg.threads);
    std::vector<std::exception_ptr> errors(nthreads);
    auto work = [&](int tid) {
        try {
            for (int i = tid; i < npts; i += nthreads)
                out[i] = refine_fiber(B, i, mode, cfg, shells_cache, &report.points[i]);
        } catch (...) {
            errors[tid] = std::current_exception();
        }
    };
    if (nthreads == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < nthreads; ++t) pool.emplace_back(work, t);
        for (auto& th : pool) th.join();
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);

    for (const auto& pr : report.points) {
        report.any_ambiguous = report.any_ambiguous || pr.ambiguous;
        if (pr.dim_after < 0) report.proper = false;
    }
    return {Bundle(B.domain_ptr(), B.D(), B.m(), std::move(out)), std::move(report)};
}

namespace {

bool fiber_equal(const AffineJetSet& a, const AffineJetSet& b, double tol) {
    if (a.is_empty() || b.is_empty()) return a.is_empty() == b.is_empty();
    if (a.dim() != b.dim()) return false;
    return a.contains_set(b, tol) && b.contains_set(a, tol);
}

} // namespace

std::pair<Bundle, std::vector<RefinementReport>> iterate_refine(const Bundle& B, int l_star,
                                                                RefineMode mode,
                                                                const RefineConfig& cfg) {
    if (l_star < 0) throw ContractViolation("iterate_refine: l_star must be >= 0");
    std::vector<RefinementReport> reports;
    Bundle current = B;
    if (l_star == 0) return {std::move(current), std::move(reports)};

    const std::vector<double> radii = cfg.ladder_for(B.domain().diameter());
    const ShellCache cache = compute_shells(B.domain(), radii, cfg.k_bar, cfg.tuple_cap);

    for (int l = 1; l <= l_star; ++l) {
        auto [next, report] = refine(current, mode, cfg, &cache);
        report.iteration = l;
        bool fixed_point = true;
        for (int i = 0; i < current.domain().size() && fixed_point; ++i)
            fixed_point = fiber_equal(current.fiber(i), next.fiber(i), 1e-9);
        reports.push_back(std::move(report));
        current = std::move(next);
        if (fixed_point) break;
    }
    return {std::move(current), std::move(reports)};
}

Bundle bundle_scalar_product(const ScalarExpression& phi, const Bundle& B) {
    if (!B.proper())
        throw ContractViolation("bundle_scalar_product: proper bundle required");
    std::vector<AffineJetSet> out;
    out.reserve(B.domain().size());
    for (int i = 0; i < B.domain().size(); ++i) {
        const AffineJetSet& f = B.fiber(i);
        const Jet jphi = jet_from_expression({phi}, B.domain().point(i), B.m());
        const Jet offset = jet_multiply(jphi, f.offset_jet());
        out.push_back(AffineJetSet::make(f.shape(), offset.coeffs(), f.span()));
    }
    return Bundle(B.domain_ptr(), B.D(), B.m(), std::move(out));
}

nlohmann::json bundle_dump(const Bundle& B) {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["n"] = B.n();
    j["D"] = B.D();
    j["m"] = B.m();
    nlohmann::json fibers = nlohmann::json::array();
    for (int i = 0; i < B.domain().size(); ++i) {
        nlohmann::json rec;
        rec["point"] = std::vector<double>(B.domain().point(i).data(),
                                           B.domain().point(i).data() + B.n());
        const AffineJetSet& f = B.fiber(i);
        if (f.is_empty()) {
            rec["empty"] = true;
        } else {
            rec["offset_coeffs"] =
                std::vector<double>(f.offset().data(), f.offset().data() + f.offset().size());
            nlohmann::json span = nlohmann::json::array();
            for (int c = 0; c < f.dim(); ++c)
                span.push_back(std::vector<double>(f.span().col(c).data(),
                                                   f.span().col(c).data() + f.span().rows()));
            rec["span_coeffs"] = std::move(span);
        }
        fibers.push_back(std::move(rec));
    }
    j["fibers"] = std::move(fibers);
    return j;
}

bool bundle_equal(const Bundle& a, const Bundle& b, double tol) {
    if (a.domain().size() != b.domain().size() || a.D() != b.D() || a.m() != b.m()) return false;
    for (int i = 0; i < a.domain().size(); ++i)
        if (!fiber_equal(a.fiber(i), b.fiber(i), tol)) return false;
    return true;
}

} // namespace glaeser
