#include "plfem/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <vector>

#include "plfem/errors.hpp"

namespace plfem {

struct Expr::Node {
    enum class Kind { constant, var_x, var_y, var_u, add, sub, mul, div, pow, neg,
                      abs, min, max, sin, cos, sqrt, exp };
    Kind kind;
    double value = 0.0;
    std::shared_ptr<const Node> lhs, rhs;
};

namespace {

using Node = Expr::Node;
using NodePtr = std::shared_ptr<const Node>;

NodePtr make(Node::Kind k, NodePtr l = nullptr, NodePtr r = nullptr) {
    auto n = std::make_shared<Node>();
    n->kind = k;
    n->lhs = std::move(l);
    n->rhs = std::move(r);
    return n;
}

NodePtr make_const(double v) {
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::constant;
    n->value = v;
    return n;
}

class Parser {
public:
    explicit Parser(const std::string& text) : s_(text) {}

    NodePtr parse() {
        auto e = parse_sum();
        skip_ws();
        if (pos_ != s_.size()) fail("unexpected trailing input");
        return e;
    }

private:
    [[noreturn]] void fail(const std::string& why) const {
        throw InvalidParameter("expression error: " + why + " in '" + s_ + "' at position " +
                               std::to_string(pos_));
    }

    void skip_ws() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    bool eat(char c) {
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    NodePtr parse_sum() {
        auto lhs = parse_product();
        for (;;) {
            if (eat('+')) lhs = make(Node::Kind::add, lhs, parse_product());
            else if (eat('-')) lhs = make(Node::Kind::sub, lhs, parse_product());
            else return lhs;
        }
    }

    NodePtr parse_product() {
        auto lhs = parse_unary();
        for (;;) {
            if (eat('*')) lhs = make(Node::Kind::mul, lhs, parse_unary());
            else if (eat('/')) lhs = make(Node::Kind::div, lhs, parse_unary());
            else return lhs;
        }
    }

    NodePtr parse_unary() {
        if (eat('-')) return make(Node::Kind::neg, parse_unary());
        if (eat('+')) return parse_unary();
        return parse_power();
    }

    NodePtr parse_power() {
        auto base = parse_atom();
        if (eat('^')) {
            // Right associative; the exponent may carry its own unary minus.
            return make(Node::Kind::pow, base, parse_unary());
        }
        return base;
    }

    NodePtr parse_atom() {
        skip_ws();
        if (pos_ >= s_.size()) fail("unexpected end of input");
        const char c = s_[pos_];
        if (c == '(') {
            ++pos_;
            auto e = parse_sum();
            if (!eat(')')) fail("missing ')'");
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            const char* begin = s_.c_str() + pos_;
            char* end = nullptr;
            const double v = std::strtod(begin, &end);
            if (end == begin) fail("malformed number");
            pos_ += static_cast<std::size_t>(end - begin);
            return make_const(v);
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            std::size_t start = pos_;
            while (pos_ < s_.size() &&
                   (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) {
                ++pos_;
            }
            const std::string name = s_.substr(start, pos_ - start);
            if (name == "x") return make(Node::Kind::var_x);
            if (name == "y") return make(Node::Kind::var_y);
            // The third slot doubles as time in forcing expressions.
            if (name == "u" || name == "t") return make(Node::Kind::var_u);
            if (name == "pi") return make_const(3.14159265358979323846);
            if (name == "abs") return parse_call(Node::Kind::abs, 1);
            if (name == "min") return parse_call(Node::Kind::min, 2);
            if (name == "max") return parse_call(Node::Kind::max, 2);
            if (name == "sin") return parse_call(Node::Kind::sin, 1);
            if (name == "cos") return parse_call(Node::Kind::cos, 1);
            if (name == "sqrt") return parse_call(Node::Kind::sqrt, 1);
            if (name == "exp") return parse_call(Node::Kind::exp, 1);
            fail("unknown identifier '" + name + "'");
        }
        fail(std::string("unexpected character '") + c + "'");
    }

    NodePtr parse_call(Node::Kind kind, int arity) {
        if (!eat('(')) fail("expected '(' after function name");
        auto a = parse_sum();
        NodePtr b;
        if (arity == 2) {
            if (!eat(',')) fail("expected ',' in two-argument function");
            b = parse_sum();
        }
        if (!eat(')')) fail("missing ')' after function arguments");
        return make(kind, a, b);
    }

    const std::string& s_;
    std::size_t pos_ = 0;
};

double eval_node(const Node& n, double x, double y, double u) {
    switch (n.kind) {
        case Node::Kind::constant: return n.value;
        case Node::Kind::var_x: return x;
        case Node::Kind::var_y: return y;
        case Node::Kind::var_u: return u;
        case Node::Kind::add: return eval_node(*n.lhs, x, y, u) + eval_node(*n.rhs, x, y, u);
        case Node::Kind::sub: return eval_node(*n.lhs, x, y, u) - eval_node(*n.rhs, x, y, u);
        case Node::Kind::mul: return eval_node(*n.lhs, x, y, u) * eval_node(*n.rhs, x, y, u);
        case Node::Kind::div: return eval_node(*n.lhs, x, y, u) / eval_node(*n.rhs, x, y, u);
        case Node::Kind::pow: return std::pow(eval_node(*n.lhs, x, y, u), eval_node(*n.rhs, x, y, u));
        case Node::Kind::neg: return -eval_node(*n.lhs, x, y, u);
        case Node::Kind::abs: return std::fabs(eval_node(*n.lhs, x, y, u));
        case Node::Kind::min:
            return std::fmin(eval_node(*n.lhs, x, y, u), eval_node(*n.rhs, x, y, u));
        case Node::Kind::max:
            return std::fmax(eval_node(*n.lhs, x, y, u), eval_node(*n.rhs, x, y, u));
        case Node::Kind::sin: return std::sin(eval_node(*n.lhs, x, y, u));
        case Node::Kind::cos: return std::cos(eval_node(*n.lhs, x, y, u));
        case Node::Kind::sqrt: return std::sqrt(eval_node(*n.lhs, x, y, u));
        case Node::Kind::exp: return std::exp(eval_node(*n.lhs, x, y, u));
    }
    return 0.0;
}

bool node_uses_u(const Node& n) {
    if (n.kind == Node::Kind::var_u) return true;
    if (n.lhs && node_uses_u(*n.lhs)) return true;
    if (n.rhs && node_uses_u(*n.rhs)) return true;
    return false;
}

} // namespace

Expr Expr::parse(const std::string& text) {
    Expr e;
    e.root_ = Parser(text).parse();
    e.text_ = text;
    e.uses_u_ = node_uses_u(*e.root_);
    return e;
}

double Expr::eval(double x, double y, double u) const {
    return eval_node(*root_, x, y, u);
}

} // namespace plfem
