// P1 finite-element assembly of the weak form
//
//   R_i(u) = int grad(phi_i) . a(x, grad u) + int phi_i b(x, u)
//          + omega int phi_i u + int_bdry phi_i h(x, u)
//          - int phi_i f - int grad(phi_i) . F - int_bdry phi_i g,
//
// so R(u) = 0 characterizes the discrete weak solution. The flux integrand
// sees the element-constant P1 gradient; zero-order terms use the configured
// quadrature, or vertex rules in lumped mode (which keeps the discrete
// maximum principle intact on Delaunay meshes).
#ifndef PLFEM_FEM_HPP
#define PLFEM_FEM_HPP

#include <memory>
#include <vector>

#include "plfem/coeffs.hpp"
#include "plfem/mesh.hpp"
#include "plfem/quadrature.hpp"
#include "plfem/sparse.hpp"

namespace plfem {

// Nodal values of a piecewise-linear function on a mesh.
struct DiscreteField {
    std::shared_ptr<const Mesh> mesh;
    std::vector<double> values;

    DiscreteField() = default;
    DiscreteField(std::shared_ptr<const Mesh> m, std::vector<double> v);
    static DiscreteField zero(std::shared_ptr<const Mesh> m);
    static DiscreteField from_function(std::shared_ptr<const Mesh> m, const ScalarField& f);

    int size() const { return static_cast<int>(values.size()); }

    // Value at a barycentric point of triangle t.
    double value_at(int t, double l0, double l1, double l2) const;
    // Element-constant gradient on triangle t.
    Vec2 gradient(int t) const;

    double max_abs() const;
};

struct AssemblyOptions {
    int triangle_degree = 2;       // volume quadrature degree
    int edge_degree = 3;           // boundary quadrature degree
    bool lumped_zero_order = false; // vertex rules for b, h and omega terms

    TriangleRule triangle_rule() const { return TriangleRule::make(triangle_degree); }
    EdgeRule edge_rule() const { return EdgeRule::make(edge_degree); }
};

// Weak-form residual; component i tests against the hat function of vertex i.
std::vector<double> assemble_residual(const Mesh& mesh, const CoefficientSet& coeffs,
                                      const DiscreteField& u,
                                      const AssemblyOptions& opts = {});

// Directional derivative of assemble_residual at u. For radial fluxes the
// per-point block is m I + (m'/|z|) z z^T with |z| floored at 1e-8 (tangent
// only; the residual stays exact). Gradient-dependent lower-order terms are
// not differentiated; the solver handles them on the lagged path.
SparseMatrix assemble_tangent(const Mesh& mesh, const CoefficientSet& coeffs,
                              const DiscreteField& u, const AssemblyOptions& opts = {});

// Consistent P1 mass matrix, or its row-sum lumped diagonal.
SparseMatrix assemble_mass(const Mesh& mesh, bool lumped);

// Edge-wise P1 boundary mass weighted by beta; zero rows for interior
// vertices. Throws InvalidParameter when beta <= 0 at a quadrature point.
SparseMatrix assemble_boundary_mass(const Mesh& mesh, const BoundaryField& beta,
                                    bool lumped = false, int edge_degree = 3);

// Load vector: f, F and g moved to one side (the terms subtracted in the
// residual). F is evaluated at element midpoints.
std::vector<double> assemble_loads(const Mesh& mesh, const CoefficientSet& coeffs,
                                   const AssemblyOptions& opts = {});

// Lagged (Kacanov/Picard) linearization at state u: a symmetric operator
//   A_lag = K_{m(|grad u|)} + M_{secant b} + E_{secant h} + omega M
// plus the constant part  c_i = int phi_i b(x,0) + int_bdry phi_i h(x,0)
// (plus the fully lagged gradient-dependent term when present), so that
// the fixed-point step solves  M v + alpha (A_lag v + c - loads) = M rhs.
struct LaggedOperator {
    SparseMatrix matrix;
    std::vector<double> constant;
};
LaggedOperator assemble_lagged_operator(const Mesh& mesh, const CoefficientSet& coeffs,
                                        const DiscreteField& u,
                                        const AssemblyOptions& opts = {});

struct AssembledForms {
    std::vector<double> residual;
    SparseMatrix tangent;
    SparseMatrix mass_consistent;
    SparseMatrix mass_lumped;
    SparseMatrix mass_boundary;   // beta-weighted when coeffs.beta is set, else weight 1
};

AssembledForms assemble_forms(const Mesh& mesh, const CoefficientSet& coeffs,
                              const DiscreteField& u, const AssemblyOptions& opts = {});

} // namespace plfem

#endif
