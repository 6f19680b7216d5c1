// Quadrature rules on the reference triangle and reference edge.
//
// Points are stored in barycentric coordinates and weights sum to one,
// so integrals are weight-sums scaled by the element measure.
#ifndef PLFEM_QUADRATURE_HPP
#define PLFEM_QUADRATURE_HPP

#include <array>
#include <vector>

#include "plfem/errors.hpp"

namespace plfem {

struct TriangleRule {
    struct Point {
        double l0, l1, l2;   // barycentric coordinates
        double weight;       // relative weight, all weights sum to 1
    };
    std::vector<Point> points;
    int degree = 0;          // exact for polynomials up to this degree

    // degree 1: centroid; degree 2: edge midpoints; degree 5: 7-point rule.
    // All rules have strictly positive weights.
    static TriangleRule make(int degree);
};

struct EdgeRule {
    struct Point {
        double t;            // position in (0,1) along the edge
        double weight;       // relative weight, all weights sum to 1
    };
    std::vector<Point> points;
    int degree = 0;

    // Gauss-Legendre with 1, 2 or 3 points (degree 1, 3, 5).
    static EdgeRule make(int degree);

    // Endpoint (trapezoid) rule; used for lumped zero-order boundary terms.
    static EdgeRule vertex_rule();
};

} // namespace plfem

#endif
