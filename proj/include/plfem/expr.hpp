// Minimal arithmetic expression parser for user-supplied coefficient fields.
//
// Grammar: +, -, *, /, ^ (right associative), unary minus, parentheses,
// numeric literals, the variables x, y, u (t is an alias for the third
// slot, used by time-dependent forcing), the constant pi, and the
// functions abs, min, max, sin, cos, sqrt, exp.
#ifndef PLFEM_EXPR_HPP
#define PLFEM_EXPR_HPP

#include <memory>
#include <string>

namespace plfem {

class Expr {
public:
    // Throws InvalidParameter on syntax errors.
    static Expr parse(const std::string& text);

    double eval(double x, double y, double u = 0.0) const;

    // True when the expression references the variable u.
    bool depends_on_u() const { return uses_u_; }

    const std::string& text() const { return text_; }

    struct Node;

private:
    std::shared_ptr<const Node> root_;
    std::string text_;
    bool uses_u_ = false;
};

} // namespace plfem

#endif
