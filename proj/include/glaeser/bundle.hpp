#pragma once

#include <memory>
#include <vector>

#include <nlohmann/json.hpp>

#include "glaeser/affine_set.hpp"
#include "glaeser/domain.hpp"
#include "glaeser/linalg.hpp"

namespace glaeser {

/// A bundle over a sampled compact set: one fiber (empty or affine
/// translate of a module) per domain point, all of the same (n, D, m).
class Bundle {
public:
    Bundle(DomainPtr domain, int D, int m, std::vector<AffineJetSet> fibers);

    const SampledDomain& domain() const { return *domain_; }
    DomainPtr domain_ptr() const { return domain_; }
    int n() const { return domain_->n(); }
    int D() const { return D_; }
    int m() const { return m_; }
    const AffineJetSet& fiber(int i) const { return fibers_[i]; }
    const std::vector<AffineJetSet>& fibers() const { return fibers_; }
    bool proper() const;
    JetShape shape_at(int i) const;

private:
    DomainPtr domain_;
    int D_, m_;
    std::vector<AffineJetSet> fibers_;
};

enum class RefineMode { Standard, Strong };

struct RefineConfig {
    int k_bar = 1;              // tuple size, 1..3
    std::vector<double> radii;  // empty = default ladder diam * 2^-j, j=2..10
    int tuple_cap = 64;
    double decay_slope_min = 0.5;   // GR2-numeric: fitted log-log slope to pass
    double ambiguous_slope_min = 0.1; // slopes in (this, decay_slope_min) flag ambiguity
    double zero_tol = 1e-8;     // per-candidate relative floor for ladder maxima
    double kernel_tol = 1e-8;   // per-rung relative floor for direction Rayleigh values
    double bound_factor = 1e3;  // GR1-numeric bound multiple (strong mode)
    double rank_tol = 1e-10;
    int threads = 1;

    std::vector<double> ladder_for(double diameter) const {
        return radii.empty() ? default_radius_ladder(diameter) : radii;
    }
};

struct PointRefineReport {
    int point = -1;
    int dim_before = -1, dim_after = -1;
    bool vacuous = false;   // no tuples at any radius: limit holds vacuously
    bool emptied = false;
    bool ambiguous = false; // outcome rested on a slope in the ambiguous band
    double decay_slope = 0.0;
    std::vector<double> ladder_values; // max min-form per rung at the anchor (NaN = no tuples)
};

struct RefinementReport {
    int iteration = 0;
    bool proper = true;
    bool any_ambiguous = false;
    std::vector<PointRefineReport> points;
};

/// Whitney compatibility form: sum over pairs 0 <= i < j <= k, components
/// d, and |alpha| <= m of (|d^alpha(P_i - P_j)(x_j)| / |x_i - x_j|^(m-|alpha|))^2,
/// with P_0 = P0 at x_0 and the 0^0 = 0 convention at coincident points
/// (coincident points with mismatched derivatives yield +infinity).
double whitney_form(const Eigen::VectorXd& x0, const Jet& P0,
                    const std::vector<Eigen::VectorXd>& pts, const std::vector<Jet>& jets, int m);

/// PSD matrix of the Whitney form over the concatenated coefficient blocks
/// (P_0, P_1, ..., P_k); points must be pairwise distinct.
PSDQuadraticForm whitney_form_matrix(const Eigen::VectorXd& x0,
                                     const std::vector<Eigen::VectorXd>& pts,
                                     const JetShape& shape);

/// min over P_i in the fibers at pts of the Whitney form with P_0 pinned.
/// Throws EmptyFiberError if some fiber at pts is empty.
double glaeser_min(const Bundle& B, const Eigen::VectorXd& x0, const Jet& P0,
                   const std::vector<int>& pts);

/// Tuples per point per radius rung, computed once per (domain, cfg).
using ShellCache = std::vector<std::vector<std::vector<std::vector<int>>>>;
ShellCache compute_shells(const SampledDomain& dom, const std::vector<double>& radii, int k,
                          int cap);

/// One Glaeser refinement of the fiber at a point: the subset of jets
/// whose ladder of tuple-maxima of the partially minimized Whitney form
/// passes the numeric limit test (GR2: decay; strong adds GR1:
/// boundedness), returned as anchor + surviving eigen-directions.
AffineJetSet refine_fiber(const Bundle& B, int point, RefineMode mode, const RefineConfig& cfg,
                          const ShellCache* shells_cache = nullptr,
                          PointRefineReport* report = nullptr);

/// Pointwise refinement of the whole bundle (pure map over points; the
/// input snapshot is immutable, so points may be processed in parallel).
std::pair<Bundle, RefinementReport> refine(const Bundle& B, RefineMode mode,
                                           const RefineConfig& cfg,
                                           const ShellCache* shells_cache = nullptr);

/// l_star successive refinements with early exit at a fixed point.
std::pair<Bundle, std::vector<RefinementReport>> iterate_refine(const Bundle& B, int l_star,
                                                                RefineMode mode,
                                                                const RefineConfig& cfg);

/// phi ⊙ B: offsets multiplied by the m-jet of phi, modules unchanged.
/// Requires a proper bundle.
Bundle bundle_scalar_product(const ScalarExpression& phi, const Bundle& B);

/// Debug/golden dump: one record per point, empty or offset+span coeffs.
nlohmann::json bundle_dump(const Bundle& B);

/// Fiberwise equality within tol (mutual containment of spanning sets).
bool bundle_equal(const Bundle& a, const Bundle& b, double tol);

} // namespace glaeser
