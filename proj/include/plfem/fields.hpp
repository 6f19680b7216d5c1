// Callable field handles used by the coefficient model and the assembler.
#ifndef PLFEM_FIELDS_HPP
#define PLFEM_FIELDS_HPP

#include <functional>
#include <utility>

#include "plfem/geometry.hpp"

namespace plfem {

using ScalarField = std::function<double(Vec2)>;
using VectorField = std::function<Vec2(Vec2)>;

// Evaluation context for boundary fields: position, unit tangent of the
// carrying edge, and its tag. The tangent lets transformed boundary data
// carry the length-stretch factor of a coordinate change.
struct BoundaryPoint {
    Vec2 pos;
    Vec2 tangent;
    int tag = 0;
};

using BoundaryField = std::function<double(const BoundaryPoint&)>;

inline ScalarField constant_field(double c) {
    return [c](Vec2) { return c; };
}

inline BoundaryField constant_boundary_field(double c) {
    return [c](const BoundaryPoint&) { return c; };
}

inline BoundaryField boundary_field_from_scalar(ScalarField f) {
    return [f = std::move(f)](const BoundaryPoint& p) { return f(p.pos); };
}

} // namespace plfem

#endif
