#include "glaeser/domain.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <nlohmann/json.hpp>

#include "glaeser/errors.hpp"

namespace glaeser {

using nlohmann::json;

SampledDomain::SampledDomain(std::vector<Eigen::VectorXd> points, std::vector<int> tags,
                             std::vector<std::string> stratum_names)
    : points_(std::move(points)), tags_(std::move(tags)),
      stratum_names_(std::move(stratum_names)) {
    if (points_.empty()) throw ContractViolation("SampledDomain: at least one point required");
    if (tags_.size() != points_.size())
        throw ContractViolation("SampledDomain: one tag per point required");
    n_ = static_cast<int>(points_[0].size());
    for (const auto& p : points_)
        if (p.size() != n_) throw ContractViolation("SampledDomain: mixed point dimensions");

    diameter_ = 0.0;
    for (size_t i = 0; i < points_.size(); ++i)
        for (size_t j = i + 1; j < points_.size(); ++j)
            diameter_ = std::max(diameter_, (points_[i] - points_[j]).norm());

    std::vector<int> idx(points_.size());
    std::iota(idx.begin(), idx.end(), 0);
    kd_.reserve(2 * points_.size());
    kd_root_ = build_kd(idx, 0, static_cast<int>(idx.size()), 0);
}

int SampledDomain::build_kd(std::vector<int>& idx, int lo, int hi, int depth) {
    if (lo >= hi) return -1;
    const int node = static_cast<int>(kd_.size());
    kd_.emplace_back();
    if (hi - lo == 1) {
        kd_[node].point = idx[lo];
        return node;
    }
    const int axis = depth % n_;
    const int mid = (lo + hi) / 2;
    std::nth_element(idx.begin() + lo, idx.begin() + mid, idx.begin() + hi,
                     [&](int a, int b) {
                         if (points_[a][axis] != points_[b][axis])
                             return points_[a][axis] < points_[b][axis];
                         return a < b;
                     });
    kd_[node].axis = axis;
    kd_[node].split = points_[idx[mid]][axis];
    const int left = build_kd(idx, lo, mid, depth + 1);
    const int right = build_kd(idx, mid, hi, depth + 1);
    kd_[node].left = left;
    kd_[node].right = right;
    return node;
}

void SampledDomain::query_kd(int node, const Eigen::VectorXd& x, double r2,
                             std::vector<int>& out) const {
    if (node < 0) return;
    const KdNode& nd = kd_[node];
    if (nd.point >= 0) {
        if ((points_[nd.point] - x).squaredNorm() <= r2) out.push_back(nd.point);
        return;
    }
    const double d = x[nd.axis] - nd.split;
    if (d <= 0 || d * d <= r2) query_kd(nd.left, x, r2, out);
    if (d >= 0 || d * d <= r2) query_kd(nd.right, x, r2, out);
}

std::vector<int> SampledDomain::within_radius(const Eigen::VectorXd& x, double r) const {
    std::vector<int> out;
    query_kd(kd_root_, x, r * r, out);
    std::sort(out.begin(), out.end());
    return out;
}

double SampledDomain::median_nn_spacing() const {
    std::vector<double> nn(points_.size());
    for (size_t i = 0; i < points_.size(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (size_t j = 0; j < points_.size(); ++j)
            if (j != i) best = std::min(best, (points_[i] - points_[j]).norm());
        nn[i] = best;
    }
    std::sort(nn.begin(), nn.end());
    return nn[nn.size() / 2];
}

namespace {

void grid_recurse(const StratumDescription& s, int axis, Eigen::VectorXd& param,
                  std::vector<Eigen::VectorXd>& out) {
    if (axis == s.param_dim) {
        Eigen::VectorXd p(s.map.size());
        for (size_t c = 0; c < s.map.size(); ++c) {
            const double v = s.map[c].evaluate(param);
            if (!std::isfinite(v))
                throw EvalError("stratum '" + s.name + "': non-finite coordinate from " +
                                s.map[c].to_string());
            p[static_cast<Eigen::Index>(c)] = v;
        }
        out.push_back(std::move(p));
        return;
    }
    const int res = s.resolution[axis];
    for (int i = 0; i < res; ++i) {
        param[axis] = (res == 1) ? s.lo[axis]
                                 : s.lo[axis] + (s.hi[axis] - s.lo[axis]) * i / (res - 1);
        grid_recurse(s, axis + 1, param, out);
    }
}

} // namespace

DomainPtr sample(const std::vector<StratumDescription>& strata) {
    if (strata.empty()) throw ContractViolation("sample: at least one stratum required");
    struct Raw {
        Eigen::VectorXd p;
        int tag;
        int param_dim;
    };
    std::vector<Raw> raw;
    std::vector<std::string> names;
    for (size_t si = 0; si < strata.size(); ++si) {
        const auto& s = strata[si];
        names.push_back(s.name.empty() ? ("stratum" + std::to_string(si)) : s.name);
        if (s.param_dim < 0) throw ContractViolation("sample: negative parameter dimension");
        if (s.param_dim > 0 &&
            (s.lo.size() != s.param_dim || s.hi.size() != s.param_dim ||
             static_cast<int>(s.resolution.size()) != s.param_dim))
            throw ContractViolation("sample: stratum '" + s.name + "' box/resolution shape");
        std::vector<Eigen::VectorXd> pts;
        try {
            Eigen::VectorXd param = Eigen::VectorXd::Zero(std::max(s.param_dim, 1));
            grid_recurse(s, 0, param, pts);
        } catch (const EvalError&) {
            throw;
        } catch (const std::exception& e) {
            throw EvalError("stratum '" + s.name + "': " + e.what());
        }
        for (auto& p : pts) raw.push_back({std::move(p), static_cast<int>(si), s.param_dim});
    }
    // dedup within 1e-12: sort by first coordinate, scan a window
    std::vector<int> order(raw.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        for (int c = 0; c < raw[a].p.size(); ++c)
            if (raw[a].p[c] != raw[b].p[c]) return raw[a].p[c] < raw[b].p[c];
        return raw[a].param_dim < raw[b].param_dim;
    });
    const double tol = 1e-12;
    std::vector<Eigen::VectorXd> points;
    std::vector<int> tags;
    std::vector<int> dims;
    for (int oi : order) {
        const Raw& r = raw[oi];
        bool dup = false;
        for (int j = static_cast<int>(points.size()) - 1; j >= 0; --j) {
            if (points[j][0] < r.p[0] - tol) break;
            if ((points[j] - r.p).norm() <= tol) {
                // keep the tag of the lowest-dimensional stratum
                if (r.param_dim < dims[j]) {
                    tags[j] = r.tag;
                    dims[j] = r.param_dim;
                }
                dup = true;
                break;
            }
        }
        if (!dup) {
            points.push_back(r.p);
            tags.push_back(r.tag);
            dims.push_back(r.param_dim);
        }
    }
    return std::make_shared<SampledDomain>(std::move(points), std::move(tags), std::move(names));
}

void save_domain(const SampledDomain& dom, const std::string& path) {
    if (dom.size() == 0) throw ContractViolation("save_domain: empty domain");
    json j;
    j["schema_version"] = 1;
    j["n"] = dom.n();
    json pts = json::array();
    for (int i = 0; i < dom.size(); ++i) {
        json p = json::array();
        for (int c = 0; c < dom.n(); ++c) p.push_back(dom.point(i)[c]);
        pts.push_back(std::move(p));
    }
    j["points"] = std::move(pts);
    j["tags"] = json::array();
    for (int i = 0; i < dom.size(); ++i) j["tags"].push_back(dom.tag(i));
    j["stratum_names"] = dom.stratum_names();
    std::ofstream out(path);
    if (!out) throw ParseError("cannot open '" + path + "' for writing");
    out << j.dump(2) << "\n";
}

DomainPtr load_domain(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open domain file '" + path + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError("domain file '" + path + "': " + e.what());
    }
    try {
        const int n = j.at("n").get<int>();
        std::vector<Eigen::VectorXd> points;
        for (const auto& pj : j.at("points")) {
            Eigen::VectorXd p(n);
            if (static_cast<int>(pj.size()) != n)
                throw ParseError("domain file '" + path + "': point arity mismatch");
            for (int c = 0; c < n; ++c) {
                if (!pj[c].is_number())
                    throw ParseError("domain file '" + path + "': non-numeric coordinate");
                p[c] = pj[c].get<double>();
                if (!std::isfinite(p[c]))
                    throw ParseError("domain file '" + path + "': non-finite coordinate");
            }
            points.push_back(std::move(p));
        }
        std::vector<int> tags;
        if (j.contains("tags")) tags = j["tags"].get<std::vector<int>>();
        else tags.assign(points.size(), 0);
        std::vector<std::string> names;
        if (j.contains("stratum_names")) names = j["stratum_names"].get<std::vector<std::string>>();
        return std::make_shared<SampledDomain>(std::move(points), std::move(tags),
                                               std::move(names));
    } catch (const json::exception& e) {
        throw ParseError("domain file '" + path + "': " + e.what());
    }
}

namespace {

/// Deterministic farthest-point subsample: start from the neighbor nearest
/// to x0, then repeatedly add the neighbor maximizing the min distance to
/// the chosen set (ties broken by index).
std::vector<int> farthest_point_select(const SampledDomain& dom, const Eigen::VectorXd& x0,
                                       const std::vector<int>& nbrs, int want) {
    if (static_cast<int>(nbrs.size()) <= want) return nbrs;
    std::vector<int> chosen;
    int first = nbrs[0];
    double bestd = std::numeric_limits<double>::infinity();
    for (int i : nbrs) {
        const double d = (dom.point(i) - x0).norm();
        if (d < bestd) {
            bestd = d;
            first = i;
        }
    }
    chosen.push_back(first);
    std::vector<double> mind(nbrs.size());
    for (size_t k = 0; k < nbrs.size(); ++k)
        mind[k] = (dom.point(nbrs[k]) - dom.point(first)).norm();
    while (static_cast<int>(chosen.size()) < want) {
        int arg = -1;
        double best = -1.0;
        for (size_t k = 0; k < nbrs.size(); ++k) {
            if (mind[k] > best) {
                best = mind[k];
                arg = static_cast<int>(k);
            }
        }
        if (arg < 0 || best <= 0.0) break;
        chosen.push_back(nbrs[arg]);
        for (size_t k = 0; k < nbrs.size(); ++k)
            mind[k] = std::min(mind[k], (dom.point(nbrs[k]) - dom.point(nbrs[arg])).norm());
    }
    std::sort(chosen.begin(), chosen.end());
    return chosen;
}

void tuple_recurse(const std::vector<int>& pool, int k, std::vector<int>& cur,
                   std::vector<char>& used, int cap, std::vector<std::vector<int>>& out) {
    if (static_cast<int>(out.size()) >= cap) return;
    if (static_cast<int>(cur.size()) == k) {
        out.push_back(cur);
        return;
    }
    for (size_t i = 0; i < pool.size(); ++i) {
        if (used[i]) continue;
        used[i] = 1;
        cur.push_back(pool[i]);
        tuple_recurse(pool, k, cur, used, cap, out);
        cur.pop_back();
        used[i] = 0;
        if (static_cast<int>(out.size()) >= cap) return;
    }
}

} // namespace

std::vector<std::vector<std::vector<int>>> shells(const SampledDomain& dom,
                                                  const Eigen::VectorXd& x0,
                                                  const std::vector<double>& radii, int k,
                                                  int cap) {
    if (k < 1) throw ContractViolation("shells: k must be >= 1");
    for (size_t i = 0; i < radii.size(); ++i) {
        if (radii[i] <= 0) throw ContractViolation("shells: radii must be positive");
        if (i > 0 && radii[i] >= radii[i - 1])
            throw ContractViolation("shells: radii must be descending");
    }
    std::vector<std::vector<std::vector<int>>> out(radii.size());
    for (size_t ri = 0; ri < radii.size(); ++ri) {
        std::vector<int> nbrs;
        for (int i : dom.within_radius(x0, radii[ri]))
            if ((dom.point(i) - x0).norm() > 0.0) nbrs.push_back(i);
        if (static_cast<int>(nbrs.size()) < k) continue; // vacuous radius
        // shrink the pool so the full ordered-tuple count stays near cap
        int pool_size = static_cast<int>(nbrs.size());
        auto perm_count = [&](int c) {
            long long p = 1;
            for (int i = 0; i < k; ++i) {
                p *= (c - i);
                if (p > (1 << 20)) return p;
            }
            return p;
        };
        while (pool_size > k && perm_count(pool_size) > cap) --pool_size;
        if (perm_count(std::min(pool_size + 1, static_cast<int>(nbrs.size()))) <= cap)
            pool_size = static_cast<int>(nbrs.size());
        const std::vector<int> pool = farthest_point_select(dom, x0, nbrs, pool_size);
        std::vector<int> cur;
        std::vector<char> used(pool.size(), 0);
        tuple_recurse(pool, k, cur, used, cap, out[ri]);
    }
    return out;
}

std::vector<double> default_radius_ladder(double diameter) {
    std::vector<double> r;
    const double base = (diameter > 0) ? diameter : 1.0;
    for (int j = 2; j <= 10; ++j) r.push_back(base * std::pow(2.0, -j));
    return r;
}

} // namespace glaeser
