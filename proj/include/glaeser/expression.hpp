#pragma once

#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace glaeser {

enum class ExprOp {
    Constant, // numeric literal
    Coord,    // x1 .. xn (1-based in the text form)
    Add,      // n-ary, >= 2
    Sub,      // binary
    Mul,      // n-ary, >= 2
    Div,      // binary
    Neg,      // unary
    Pow,      // base to an integer literal power
    Min,      // binary
    Max,      // binary
    Abs,      // unary
    Sign      // unary, values -1 / 0 / +1
};

/// Immutable scalar expression tree over the coordinates x1..xn.
///
/// Text form is parenthesized prefix, e.g. (add (mul x1 x1) (mul x2 x2));
/// see docs/expression_grammar.md for the full grammar.  Values are shared
/// and cheap to copy; all operations are const.
class ScalarExpression {
public:
    ScalarExpression() = default; // empty; only assignable

    static ScalarExpression constant(double v);
    static ScalarExpression coord(int i); // 0-based
    static ScalarExpression add(const ScalarExpression& a, const ScalarExpression& b);
    static ScalarExpression sub(const ScalarExpression& a, const ScalarExpression& b);
    static ScalarExpression mul(const ScalarExpression& a, const ScalarExpression& b);
    static ScalarExpression div(const ScalarExpression& a, const ScalarExpression& b);
    static ScalarExpression neg(const ScalarExpression& a);
    static ScalarExpression pow(const ScalarExpression& a, int k);

    /// Parses the prefix text form.  Throws ParseError with a position.
    static ScalarExpression parse(const std::string& text);

    std::string to_string() const;

    bool valid() const { return root_ != nullptr; }

    /// Smallest n such that every coordinate reference fits (max index + 1).
    int arity() const;

    /// Evaluates at z (size >= arity).  Throws EvalError on division by
    /// zero or 0 raised to a negative power, naming the node.
    double evaluate(const Eigen::VectorXd& z) const;

    /// True when the tree uses only +, -, *, integer powers >= 0 and
    /// constants/coordinates.
    bool is_polynomial() const;

    /// Degree bound for polynomial trees (no cancellation analysis).
    int polynomial_degree_bound() const;

    /// True when some node is min/max/abs/sign.
    bool has_nonsmooth_node() const;

    struct Node;
    const Node* root() const { return root_.get(); }

private:
    explicit ScalarExpression(std::shared_ptr<const Node> r) : root_(std::move(r)) {}
    std::shared_ptr<const Node> root_;
};

struct ScalarExpression::Node {
    ExprOp op = ExprOp::Constant;
    double value = 0.0;                                     // Constant
    int coord = 0;                                          // Coord (0-based)
    int exponent = 0;                                       // Pow
    std::vector<std::shared_ptr<const Node>> children;
};

} // namespace glaeser
