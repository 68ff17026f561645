#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

namespace glaeser {

/// Exponent vector of a monomial in n variables.
///
/// The canonical ordering used by every coefficient vector and matrix in
/// this project is graded lexicographic: indices are sorted by total order
/// |alpha| first, and ties are broken lexicographically with the larger
/// leading exponent first.  For n = 2, m = 2 the order is
/// (0,0); (1,0), (0,1); (2,0), (1,1), (0,2).
struct MultiIndex {
    std::vector<int> exponents;

    MultiIndex() = default;
    explicit MultiIndex(std::vector<int> e) : exponents(std::move(e)) {}
    static MultiIndex zero(int n) { return MultiIndex(std::vector<int>(n, 0)); }
    static MultiIndex unit(int n, int i);

    int size() const { return static_cast<int>(exponents.size()); }
    int order() const;

    /// alpha!
    double factorial() const;
    /// gamma! / (gamma - alpha)! with *this = gamma; requires alpha <= gamma.
    double falling_factorial(const MultiIndex& alpha) const;
    bool dominates(const MultiIndex& alpha) const; // componentwise >=
    MultiIndex operator+(const MultiIndex& o) const;
    MultiIndex operator-(const MultiIndex& o) const; // requires dominates(o)
    bool operator==(const MultiIndex& o) const { return exponents == o.exponents; }

    /// (z)^alpha for z in R^n.
    double power(const Eigen::VectorXd& z) const;

    std::string to_string() const;
};

/// Graded-lex "before" predicate (see ordering note above).
bool graded_lex_less(const MultiIndex& a, const MultiIndex& b);

/// dim P^(m)(R^n) = C(n+m, m).
int jet_space_dim(int n, int m);

/// All multi-indices with |alpha| <= m over n variables, in canonical order.
std::vector<MultiIndex> multi_indices(int n, int m);

/// Cached per-(n, m) basis bookkeeping shared by all jets of that shape:
/// the canonical index list, index-of lookups, and the truncated
/// multiplication table.  Instances are immutable after construction and
/// safe to share across threads.
class JetLayout {
public:
    static const JetLayout& get(int n, int m);

    int n() const { return n_; }
    int m() const { return m_; }
    int dim() const { return dim_; }
    const std::vector<MultiIndex>& indices() const { return indices_; }
    const MultiIndex& index(int a) const { return indices_[a]; }

    /// Position of alpha in the canonical list, or -1 if |alpha| > m.
    int position(const MultiIndex& alpha) const;

    /// Entries (a, b, c) with index_a + index_b = index_c (all orders <= m).
    struct ProductEntry {
        int a, b, c;
    };
    const std::vector<ProductEntry>& product_table() const { return products_; }

private:
    JetLayout(int n, int m);
    int n_, m_, dim_;
    std::vector<MultiIndex> indices_;
    std::vector<ProductEntry> products_;
};

} // namespace glaeser
