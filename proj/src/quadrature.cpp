#include "plfem/quadrature.hpp"

#include <cmath>

namespace plfem {

TriangleRule TriangleRule::make(int degree) {
    TriangleRule rule;
    if (degree <= 1) {
        rule.degree = 1;
        rule.points = {{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 1.0}};
    } else if (degree <= 2) {
        // Edge-midpoint rule, exact to degree 2.
        rule.degree = 2;
        rule.points = {
            {0.5, 0.5, 0.0, 1.0 / 3.0},
            {0.0, 0.5, 0.5, 1.0 / 3.0},
            {0.5, 0.0, 0.5, 1.0 / 3.0},
        };
    } else {
        // 7-point rule, exact to degree 5, positive weights.
        rule.degree = 5;
        const double a = (6.0 + std::sqrt(15.0)) / 21.0;
        const double b = (6.0 - std::sqrt(15.0)) / 21.0;
        const double wa = (155.0 + std::sqrt(15.0)) / 1200.0;
        const double wb = (155.0 - std::sqrt(15.0)) / 1200.0;
        rule.points = {
            {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 9.0 / 40.0},
            {a, a, 1.0 - 2.0 * a, wa},
            {a, 1.0 - 2.0 * a, a, wa},
            {1.0 - 2.0 * a, a, a, wa},
            {b, b, 1.0 - 2.0 * b, wb},
            {b, 1.0 - 2.0 * b, b, wb},
            {1.0 - 2.0 * b, b, b, wb},
        };
    }
    return rule;
}

EdgeRule EdgeRule::make(int degree) {
    EdgeRule rule;
    if (degree <= 1) {
        rule.degree = 1;
        rule.points = {{0.5, 1.0}};
    } else if (degree <= 3) {
        rule.degree = 3;
        const double d = 0.5 / std::sqrt(3.0);
        rule.points = {{0.5 - d, 0.5}, {0.5 + d, 0.5}};
    } else {
        rule.degree = 5;
        const double d = 0.5 * std::sqrt(3.0 / 5.0);
        rule.points = {{0.5 - d, 5.0 / 18.0}, {0.5, 8.0 / 18.0}, {0.5 + d, 5.0 / 18.0}};
    }
    return rule;
}

EdgeRule EdgeRule::vertex_rule() {
    EdgeRule rule;
    rule.degree = 1;
    rule.points = {{0.0, 0.5}, {1.0, 0.5}};
    return rule;
}

} // namespace plfem
