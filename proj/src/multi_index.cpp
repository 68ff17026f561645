#include "glaeser/multi_index.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>

#include "glaeser/errors.hpp"

namespace glaeser {

MultiIndex MultiIndex::unit(int n, int i) {
    std::vector<int> e(n, 0);
    e[i] = 1;
    return MultiIndex(std::move(e));
}

int MultiIndex::order() const {
    int s = 0;
    for (int e : exponents) s += e;
    return s;
}

double MultiIndex::factorial() const {
    double f = 1.0;
    for (int e : exponents)
        for (int k = 2; k <= e; ++k) f *= k;
    return f;
}

double MultiIndex::falling_factorial(const MultiIndex& alpha) const {
    double f = 1.0;
    for (size_t i = 0; i < exponents.size(); ++i) {
        const int g = exponents[i], a = alpha.exponents[i];
        for (int k = g - a + 1; k <= g; ++k) f *= k;
    }
    return f;
}

bool MultiIndex::dominates(const MultiIndex& alpha) const {
    for (size_t i = 0; i < exponents.size(); ++i)
        if (exponents[i] < alpha.exponents[i]) return false;
    return true;
}

MultiIndex MultiIndex::operator+(const MultiIndex& o) const {
    MultiIndex r = *this;
    for (size_t i = 0; i < exponents.size(); ++i) r.exponents[i] += o.exponents[i];
    return r;
}

MultiIndex MultiIndex::operator-(const MultiIndex& o) const {
    MultiIndex r = *this;
    for (size_t i = 0; i < exponents.size(); ++i) r.exponents[i] -= o.exponents[i];
    return r;
}

double MultiIndex::power(const Eigen::VectorXd& z) const {
    double p = 1.0;
    for (size_t i = 0; i < exponents.size(); ++i)
        for (int k = 0; k < exponents[i]; ++k) p *= z[static_cast<Eigen::Index>(i)];
    return p;
}

std::string MultiIndex::to_string() const {
    std::ostringstream os;
    os << "(";
    for (size_t i = 0; i < exponents.size(); ++i) {
        if (i) os << ",";
        os << exponents[i];
    }
    os << ")";
    return os.str();
}

bool graded_lex_less(const MultiIndex& a, const MultiIndex& b) {
    const int oa = a.order(), ob = b.order();
    if (oa != ob) return oa < ob;
    // same total order: larger leading exponent comes first
    return a.exponents > b.exponents;
}

int jet_space_dim(int n, int m) {
    // C(n + m, m)
    long long r = 1;
    for (int k = 1; k <= m; ++k) r = r * (n + k) / k;
    return static_cast<int>(r);
}

namespace {

void enumerate_order(int n, int pos, int remaining, std::vector<int>& cur,
                     std::vector<MultiIndex>& out) {
    if (pos == n - 1) {
        cur[pos] = remaining;
        out.emplace_back(cur);
        return;
    }
    // descending first exponent realizes the lex tie-break
    for (int e = remaining; e >= 0; --e) {
        cur[pos] = e;
        enumerate_order(n, pos + 1, remaining - e, cur, out);
    }
}

} // namespace

std::vector<MultiIndex> multi_indices(int n, int m) {
    if (n < 1) throw ContractViolation("multi_indices: n must be >= 1");
    if (m < 0) throw ContractViolation("multi_indices: m must be >= 0");
    std::vector<MultiIndex> out;
    out.reserve(jet_space_dim(n, m));
    std::vector<int> cur(n, 0);
    for (int order = 0; order <= m; ++order) enumerate_order(n, 0, order, cur, out);
    return out;
}

JetLayout::JetLayout(int n, int m) : n_(n), m_(m) {
    indices_ = multi_indices(n, m);
    dim_ = static_cast<int>(indices_.size());
    for (int a = 0; a < dim_; ++a) {
        for (int b = 0; b < dim_; ++b) {
            if (indices_[a].order() + indices_[b].order() > m) continue;
            const int c = position(indices_[a] + indices_[b]);
            products_.push_back({a, b, c});
        }
    }
}

int JetLayout::position(const MultiIndex& alpha) const {
    if (alpha.order() > m_) return -1;
    // dim is small; linear scan within the order block is plenty
    for (int i = 0; i < dim_; ++i)
        if (indices_[i] == alpha) return i;
    return -1;
}

const JetLayout& JetLayout::get(int n, int m) {
    static std::mutex mu;
    static std::map<std::pair<int, int>, std::unique_ptr<JetLayout>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto& slot = cache[{n, m}];
    if (!slot) slot.reset(new JetLayout(n, m));
    return *slot;
}

} // namespace glaeser
