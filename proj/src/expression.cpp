#include "glaeser/expression.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <sstream>

#include "glaeser/errors.hpp"

namespace glaeser {

namespace {

using NodePtr = std::shared_ptr<const ScalarExpression::Node>;

NodePtr make_node(ExprOp op, std::vector<NodePtr> kids = {}) {
    auto n = std::make_shared<ScalarExpression::Node>();
    n->op = op;
    n->children = std::move(kids);
    return n;
}

const char* op_name(ExprOp op) {
    switch (op) {
        case ExprOp::Add: return "add";
        case ExprOp::Sub: return "sub";
        case ExprOp::Mul: return "mul";
        case ExprOp::Div: return "div";
        case ExprOp::Neg: return "neg";
        case ExprOp::Pow: return "pow";
        case ExprOp::Min: return "min";
        case ExprOp::Max: return "max";
        case ExprOp::Abs: return "abs";
        case ExprOp::Sign: return "sign";
        default: return "?";
    }
}

void print_node(const ScalarExpression::Node* n, std::ostream& os) {
    switch (n->op) {
        case ExprOp::Constant: {
            std::ostringstream tmp;
            tmp.precision(17);
            tmp << n->value;
            os << tmp.str();
            return;
        }
        case ExprOp::Coord:
            os << "x" << (n->coord + 1);
            return;
        default:
            break;
    }
    os << "(" << op_name(n->op);
    for (const auto& k : n->children) {
        os << " ";
        print_node(k.get(), os);
    }
    if (n->op == ExprOp::Pow) os << " " << n->exponent;
    os << ")";
}

std::string node_text(const ScalarExpression::Node* n) {
    std::ostringstream os;
    print_node(n, os);
    return os.str();
}

double eval_node(const ScalarExpression::Node* n, const Eigen::VectorXd& z) {
    switch (n->op) {
        case ExprOp::Constant: return n->value;
        case ExprOp::Coord:
            if (n->coord >= z.size())
                throw EvalError("expression references x" + std::to_string(n->coord + 1) +
                                " but the point has dimension " + std::to_string(z.size()));
            return z[n->coord];
        case ExprOp::Add: {
            double s = 0;
            for (const auto& k : n->children) s += eval_node(k.get(), z);
            return s;
        }
        case ExprOp::Sub:
            return eval_node(n->children[0].get(), z) - eval_node(n->children[1].get(), z);
        case ExprOp::Mul: {
            double p = 1;
            for (const auto& k : n->children) p *= eval_node(k.get(), z);
            return p;
        }
        case ExprOp::Div: {
            const double den = eval_node(n->children[1].get(), z);
            if (den == 0.0) throw EvalError("division by zero in " + node_text(n));
            return eval_node(n->children[0].get(), z) / den;
        }
        case ExprOp::Neg: return -eval_node(n->children[0].get(), z);
        case ExprOp::Pow: {
            const double b = eval_node(n->children[0].get(), z);
            if (b == 0.0 && n->exponent < 0)
                throw EvalError("zero raised to negative power in " + node_text(n));
            return std::pow(b, n->exponent);
        }
        case ExprOp::Min:
            return std::min(eval_node(n->children[0].get(), z), eval_node(n->children[1].get(), z));
        case ExprOp::Max:
            return std::max(eval_node(n->children[0].get(), z), eval_node(n->children[1].get(), z));
        case ExprOp::Abs: return std::abs(eval_node(n->children[0].get(), z));
        case ExprOp::Sign: {
            const double v = eval_node(n->children[0].get(), z);
            return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0);
        }
    }
    throw EvalError("corrupt expression node");
}

// ---- parser -------------------------------------------------------------

struct Token {
    enum Kind { LParen, RParen, Symbol, Number, End } kind;
    std::string text;
    double number = 0;
    size_t pos = 0;
};

class Lexer {
public:
    explicit Lexer(const std::string& s) : s_(s) {}

    Token next() {
        while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
        Token t;
        t.pos = i_;
        if (i_ >= s_.size()) {
            t.kind = Token::End;
            return t;
        }
        const char c = s_[i_];
        if (c == '(') {
            ++i_;
            t.kind = Token::LParen;
            return t;
        }
        if (c == ')') {
            ++i_;
            t.kind = Token::RParen;
            return t;
        }
        size_t j = i_;
        while (j < s_.size() && !std::isspace(static_cast<unsigned char>(s_[j])) && s_[j] != '(' &&
               s_[j] != ')')
            ++j;
        t.text = s_.substr(i_, j - i_);
        i_ = j;
        char* endp = nullptr;
        const double v = std::strtod(t.text.c_str(), &endp);
        if (endp && *endp == '\0' && endp != t.text.c_str()) {
            t.kind = Token::Number;
            t.number = v;
        } else {
            t.kind = Token::Symbol;
        }
        return t;
    }

private:
    const std::string& s_;
    size_t i_ = 0;
};

[[noreturn]] void parse_fail(const Token& t, const std::string& msg) {
    throw ParseError("expression parse error at offset " + std::to_string(t.pos) + ": " + msg);
}

NodePtr parse_expr(Lexer& lex, Token t);

NodePtr parse_coord_or_fail(const Token& t) {
    if (t.text.size() >= 2 && t.text[0] == 'x') {
        char* endp = nullptr;
        const long idx = std::strtol(t.text.c_str() + 1, &endp, 10);
        if (endp && *endp == '\0' && idx >= 1) {
            auto n = std::make_shared<ScalarExpression::Node>();
            n->op = ExprOp::Coord;
            n->coord = static_cast<int>(idx - 1);
            return n;
        }
    }
    parse_fail(t, "unknown symbol '" + t.text + "'");
}

NodePtr parse_form(Lexer& lex, const Token& open) {
    Token head = lex.next();
    if (head.kind != Token::Symbol) parse_fail(head, "expected operator name after '('");
    struct OpInfo {
        ExprOp op;
        int min_arity, max_arity; // max -1 = unbounded
    };
    static const std::pair<const char*, OpInfo> ops[] = {
        {"add", {ExprOp::Add, 2, -1}}, {"sub", {ExprOp::Sub, 2, 2}},
        {"mul", {ExprOp::Mul, 2, -1}}, {"div", {ExprOp::Div, 2, 2}},
        {"neg", {ExprOp::Neg, 1, 1}},  {"min", {ExprOp::Min, 2, 2}},
        {"max", {ExprOp::Max, 2, 2}},  {"abs", {ExprOp::Abs, 1, 1}},
        {"sign", {ExprOp::Sign, 1, 1}},
    };
    if (head.text == "pow") {
        Token bt = lex.next();
        NodePtr base = parse_expr(lex, bt);
        Token et = lex.next();
        if (et.kind != Token::Number || et.number != std::floor(et.number))
            parse_fail(et, "pow exponent must be an integer literal");
        Token close = lex.next();
        if (close.kind != Token::RParen) parse_fail(close, "expected ')' after pow exponent");
        auto n = std::make_shared<ScalarExpression::Node>();
        n->op = ExprOp::Pow;
        n->exponent = static_cast<int>(et.number);
        n->children = {base};
        return n;
    }
    for (const auto& [name, info] : ops) {
        if (head.text != name) continue;
        std::vector<NodePtr> kids;
        for (;;) {
            Token t = lex.next();
            if (t.kind == Token::RParen) break;
            if (t.kind == Token::End) parse_fail(t, "unexpected end of input inside form");
            kids.push_back(parse_expr(lex, t));
        }
        if (static_cast<int>(kids.size()) < info.min_arity ||
            (info.max_arity >= 0 && static_cast<int>(kids.size()) > info.max_arity))
            parse_fail(open, std::string("wrong arity for '") + name + "'");
        return make_node(info.op, std::move(kids));
    }
    parse_fail(head, "unknown operator '" + head.text + "'");
}

NodePtr parse_expr(Lexer& lex, Token t) {
    switch (t.kind) {
        case Token::Number: {
            auto n = std::make_shared<ScalarExpression::Node>();
            n->op = ExprOp::Constant;
            n->value = t.number;
            return n;
        }
        case Token::Symbol: return parse_coord_or_fail(t);
        case Token::LParen: return parse_form(lex, t);
        default: parse_fail(t, "expected expression");
    }
}

int arity_node(const ScalarExpression::Node* n) {
    if (n->op == ExprOp::Coord) return n->coord + 1;
    int a = 0;
    for (const auto& k : n->children) a = std::max(a, arity_node(k.get()));
    return a;
}

bool polynomial_node(const ScalarExpression::Node* n) {
    switch (n->op) {
        case ExprOp::Constant:
        case ExprOp::Coord: return true;
        case ExprOp::Add:
        case ExprOp::Sub:
        case ExprOp::Mul:
        case ExprOp::Neg: break;
        case ExprOp::Pow:
            if (n->exponent < 0) return false;
            break;
        default: return false;
    }
    for (const auto& k : n->children)
        if (!polynomial_node(k.get())) return false;
    return true;
}

int degree_node(const ScalarExpression::Node* n) {
    switch (n->op) {
        case ExprOp::Constant: return 0;
        case ExprOp::Coord: return 1;
        case ExprOp::Add:
        case ExprOp::Sub: {
            int d = 0;
            for (const auto& k : n->children) d = std::max(d, degree_node(k.get()));
            return d;
        }
        case ExprOp::Mul: {
            int d = 0;
            for (const auto& k : n->children) d += degree_node(k.get());
            return d;
        }
        case ExprOp::Neg: return degree_node(n->children[0].get());
        case ExprOp::Pow: return n->exponent * degree_node(n->children[0].get());
        default:
            throw UnsupportedInput("degree bound requested for non-polynomial expression " +
                                   node_text(n));
    }
}

bool nonsmooth_node(const ScalarExpression::Node* n) {
    switch (n->op) {
        case ExprOp::Min:
        case ExprOp::Max:
        case ExprOp::Abs:
        case ExprOp::Sign: return true;
        default: break;
    }
    for (const auto& k : n->children)
        if (nonsmooth_node(k.get())) return true;
    return false;
}

} // namespace

ScalarExpression ScalarExpression::constant(double v) {
    auto n = std::make_shared<Node>();
    n->op = ExprOp::Constant;
    n->value = v;
    return ScalarExpression(n);
}

ScalarExpression ScalarExpression::coord(int i) {
    if (i < 0) throw ContractViolation("coordinate index must be >= 0");
    auto n = std::make_shared<Node>();
    n->op = ExprOp::Coord;
    n->coord = i;
    return ScalarExpression(n);
}

ScalarExpression ScalarExpression::add(const ScalarExpression& a, const ScalarExpression& b) {
    return ScalarExpression(make_node(ExprOp::Add, {a.root_, b.root_}));
}
ScalarExpression ScalarExpression::sub(const ScalarExpression& a, const ScalarExpression& b) {
    return ScalarExpression(make_node(ExprOp::Sub, {a.root_, b.root_}));
}
ScalarExpression ScalarExpression::mul(const ScalarExpression& a, const ScalarExpression& b) {
    return ScalarExpression(make_node(ExprOp::Mul, {a.root_, b.root_}));
}
ScalarExpression ScalarExpression::div(const ScalarExpression& a, const ScalarExpression& b) {
    return ScalarExpression(make_node(ExprOp::Div, {a.root_, b.root_}));
}
ScalarExpression ScalarExpression::neg(const ScalarExpression& a) {
    return ScalarExpression(make_node(ExprOp::Neg, {a.root_}));
}
ScalarExpression ScalarExpression::pow(const ScalarExpression& a, int k) {
    auto n = std::make_shared<Node>();
    n->op = ExprOp::Pow;
    n->exponent = k;
    n->children = {a.root_};
    return ScalarExpression(n);
}

ScalarExpression ScalarExpression::parse(const std::string& text) {
    Lexer lex(text);
    Token t = lex.next();
    if (t.kind == Token::End) throw ParseError("empty expression");
    NodePtr root = parse_expr(lex, t);
    Token rest = lex.next();
    if (rest.kind != Token::End)
        throw ParseError("trailing input after expression at offset " + std::to_string(rest.pos));
    return ScalarExpression(root);
}

std::string ScalarExpression::to_string() const {
    if (!root_) return "<empty>";
    return node_text(root_.get());
}

int ScalarExpression::arity() const { return root_ ? arity_node(root_.get()) : 0; }

double ScalarExpression::evaluate(const Eigen::VectorXd& z) const {
    if (!root_) throw ContractViolation("evaluate on empty expression");
    return eval_node(root_.get(), z);
}

bool ScalarExpression::is_polynomial() const {
    return root_ && polynomial_node(root_.get());
}

int ScalarExpression::polynomial_degree_bound() const {
    if (!root_) return 0;
    return degree_node(root_.get());
}

bool ScalarExpression::has_nonsmooth_node() const {
    return root_ && nonsmooth_node(root_.get());
}

} // namespace glaeser
