#pragma once

#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "glaeser/expression.hpp"

namespace glaeser {

/// One parametrized piece of the compact base set: a map from a d-box into
/// R^n sampled on a grid.  Low-dimensional strata (where refinement limits
/// live) should be given more resolution than a uniform grid would get.
struct StratumDescription {
    std::string name;
    int param_dim = 0;                  // d; 0 = a single point
    std::vector<ScalarExpression> map;  // n expressions in x1..xd
    Eigen::VectorXd lo, hi;             // parameter box, size d
    std::vector<int> resolution;        // points per parameter axis, size d
};

/// The sampled compact set E: deduplicated points with stratum tags, a
/// kd-index for radius queries, and the exact diameter.  Immutable after
/// construction; queries are thread-safe.
class SampledDomain {
public:
    SampledDomain(std::vector<Eigen::VectorXd> points, std::vector<int> tags,
                  std::vector<std::string> stratum_names);

    int n() const { return n_; }
    int size() const { return static_cast<int>(points_.size()); }
    const Eigen::VectorXd& point(int i) const { return points_[i]; }
    const std::vector<Eigen::VectorXd>& points() const { return points_; }
    int tag(int i) const { return tags_[i]; }
    const std::vector<std::string>& stratum_names() const { return stratum_names_; }
    double diameter() const { return diameter_; }

    /// Indices of points within distance r of x (inclusive), ascending.
    std::vector<int> within_radius(const Eigen::VectorXd& x, double r) const;

    /// Median nearest-neighbor spacing (used by the fitting oracle cutoff).
    double median_nn_spacing() const;

private:
    struct KdNode {
        int point = -1;       // leaf payload
        int axis = -1;
        double split = 0.0;
        int left = -1, right = -1;
    };
    int build_kd(std::vector<int>& idx, int lo, int hi, int depth);
    void query_kd(int node, const Eigen::VectorXd& x, double r2, std::vector<int>& out) const;

    int n_;
    std::vector<Eigen::VectorXd> points_;
    std::vector<int> tags_;
    std::vector<std::string> stratum_names_;
    double diameter_;
    std::vector<KdNode> kd_;
    int kd_root_ = -1;
};

using DomainPtr = std::shared_ptr<const SampledDomain>;

/// Union of grid images over the strata, deduplicated (1e-12); on
/// collision the lowest-parameter-dimension stratum keeps the tag.
DomainPtr sample(const std::vector<StratumDescription>& strata);

/// JSON persistence; round-trips point coordinates bit-exactly.
void save_domain(const SampledDomain& dom, const std::string& path);
DomainPtr load_domain(const std::string& path);

/// Ordered k-tuples of distinct points of dom within each radius of x0
/// (excluding x0 itself), one list per radius.  Radii must be positive and
/// descending.  At most `cap` tuples per radius; beyond the cap, entries
/// come from deterministic farthest-point selection over the neighbor set.
std::vector<std::vector<std::vector<int>>> shells(const SampledDomain& dom,
                                                  const Eigen::VectorXd& x0,
                                                  const std::vector<double>& radii, int k,
                                                  int cap = 64);

/// Default radius ladder diameter * 2^-j, j = 2..10.
std::vector<double> default_radius_ladder(double diameter);

} // namespace glaeser
