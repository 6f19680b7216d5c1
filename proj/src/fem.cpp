#include "plfem/fem.hpp"

#include <cmath>

#include "plfem/errors.hpp"

namespace plfem {

namespace {

constexpr double kGradFloor = 1e-8;   // tangent-only regularization of |grad u|

Vec2 bary_point(const Mesh& mesh, int t, double l0, double l1, double l2) {
    const auto& tri = mesh.triangle(t);
    return mesh.vertex(tri.v[0]) * l0 + mesh.vertex(tri.v[1]) * l1 + mesh.vertex(tri.v[2]) * l2;
}

[[noreturn]] void element_eval_error(const char* what, int element, Vec2 x) {
    throw EvaluationError(std::string(what) + " on element " + std::to_string(element),
                          x.x, x.y);
}

// Flux Jacobian da/dz at (x, z): analytic, radial, or finite differences.
Mat2 flux_jacobian(const CoefficientSet& coeffs, Vec2 x, Vec2 z) {
    if (coeffs.radial) {
        const double y = std::fmax(norm(z), kGradFloor);
        const double m = coeffs.radial->m(x, y);
        const double mp = coeffs.radial->m_prime ? coeffs.radial->m_prime(x, y) : 0.0;
        const double c = mp / y;
        return {m + c * z.x * z.x, c * z.x * z.y,
                c * z.x * z.y, m + c * z.y * z.y};
    }
    if (coeffs.da_dz) return coeffs.da_dz(x, z);
    const double step = 1e-6 * std::fmax(1.0, norm(z));
    const Vec2 ax1 = coeffs.a(x, {z.x + step, z.y});
    const Vec2 ax0 = coeffs.a(x, {z.x - step, z.y});
    const Vec2 ay1 = coeffs.a(x, {z.x, z.y + step});
    const Vec2 ay0 = coeffs.a(x, {z.x, z.y - step});
    return {(ax1.x - ax0.x) / (2 * step), (ay1.x - ay0.x) / (2 * step),
            (ax1.y - ax0.y) / (2 * step), (ay1.y - ay0.y) / (2 * step)};
}

struct EdgeQuadPoint {
    BoundaryPoint bp;
    double l_a;       // hat value of edge vertex a
    double weight;    // edge length times relative weight
};

template <typename Fn>
void for_each_edge_qp(const Mesh& mesh, const EdgeRule& rule, Fn&& fn) {
    for (const auto& be : mesh.boundary_edges()) {
        const Vec2 pa = mesh.vertex(be.a);
        const Vec2 pb = mesh.vertex(be.b);
        const double len = mesh.edge_length(be);
        const Vec2 tangent = mesh.edge_tangent(be);
        for (const auto& qp : rule.points) {
            EdgeQuadPoint e;
            e.bp = {pa * (1.0 - qp.t) + pb * qp.t, tangent, be.tag};
            e.l_a = 1.0 - qp.t;
            e.weight = len * qp.weight;
            fn(be, e);
        }
    }
}

} // namespace

DiscreteField::DiscreteField(std::shared_ptr<const Mesh> m, std::vector<double> v)
    : mesh(std::move(m)), values(std::move(v)) {
    if (!mesh) throw InvalidParameter("DiscreteField: null mesh");
    if (static_cast<int>(values.size()) != mesh->num_vertices()) {
        throw InvalidParameter("DiscreteField: value count does not match vertex count");
    }
    for (double v_i : values) {
        if (!std::isfinite(v_i)) throw InvalidParameter("DiscreteField: non-finite value");
    }
}

DiscreteField DiscreteField::zero(std::shared_ptr<const Mesh> m) {
    const int n = m->num_vertices();
    return DiscreteField(std::move(m), std::vector<double>(n, 0.0));
}

DiscreteField DiscreteField::from_function(std::shared_ptr<const Mesh> m, const ScalarField& f) {
    std::vector<double> vals(m->num_vertices());
    for (int i = 0; i < m->num_vertices(); ++i) vals[i] = f(m->vertex(i));
    return DiscreteField(std::move(m), std::move(vals));
}

double DiscreteField::value_at(int t, double l0, double l1, double l2) const {
    const auto& tri = mesh->triangle(t);
    return l0 * values[tri.v[0]] + l1 * values[tri.v[1]] + l2 * values[tri.v[2]];
}

Vec2 DiscreteField::gradient(int t) const {
    const auto grads = mesh->hat_gradients(t);
    const auto& tri = mesh->triangle(t);
    return grads[0] * values[tri.v[0]] + grads[1] * values[tri.v[1]] + grads[2] * values[tri.v[2]];
}

double DiscreteField::max_abs() const {
    double m = 0.0;
    for (double v : values) m = std::fmax(m, std::fabs(v));
    return m;
}

std::vector<double> assemble_residual(const Mesh& mesh, const CoefficientSet& coeffs,
                                      const DiscreteField& u, const AssemblyOptions& opts) {
    std::vector<double> r(mesh.num_vertices(), 0.0);
    const TriangleRule tri_rule = opts.triangle_rule();
    const EdgeRule edge_rule = opts.lumped_zero_order ? EdgeRule::vertex_rule()
                                                      : opts.edge_rule();

    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const auto& tri = mesh.triangle(t);
        const double area = mesh.triangle_area(t);
        const auto grads = mesh.hat_gradients(t);
        const Vec2 z = u.gradient(t);

        // Flux and load terms at volume quadrature points.
        for (const auto& qp : tri_rule.points) {
            const Vec2 x = bary_point(mesh, t, qp.l0, qp.l1, qp.l2);
            const double w = area * qp.weight;
            const Vec2 az = coeffs.a ? coeffs.a(x, z) : Vec2{};
            if (!std::isfinite(az.x) || !std::isfinite(az.y)) {
                element_eval_error("flux evaluated non-finite", t, x);
            }
            const double uq = u.value_at(t, qp.l0, qp.l1, qp.l2);
            const double fq = coeffs.f ? coeffs.f(x) : 0.0;
            if (!std::isfinite(fq)) element_eval_error("load f evaluated non-finite", t, x);
            const double bg = coeffs.b_grad ? coeffs.b_grad(x, uq, z) : 0.0;
            const double hats[3] = {qp.l0, qp.l1, qp.l2};
            for (int k = 0; k < 3; ++k) {
                r[tri.v[k]] += w * (dot(grads[k], az) + hats[k] * (bg - fq));
            }
        }

        // Zero-order terms, optionally with the vertex rule.
        if (coeffs.b || coeffs.omega != 0.0) {
            auto add_zero_order = [&](double l0, double l1, double l2, double w) {
                const Vec2 x = bary_point(mesh, t, l0, l1, l2);
                const double uq = l0 * u.values[tri.v[0]] + l1 * u.values[tri.v[1]] +
                                  l2 * u.values[tri.v[2]];
                double val = coeffs.omega * uq;
                if (coeffs.b) {
                    const double bq = coeffs.b(x, uq);
                    if (!std::isfinite(bq)) element_eval_error("b evaluated non-finite", t, x);
                    val += bq;
                }
                const double hats[3] = {l0, l1, l2};
                for (int k = 0; k < 3; ++k) r[tri.v[k]] += w * hats[k] * val;
            };
            if (opts.lumped_zero_order) {
                add_zero_order(1.0, 0.0, 0.0, area / 3.0);
                add_zero_order(0.0, 1.0, 0.0, area / 3.0);
                add_zero_order(0.0, 0.0, 1.0, area / 3.0);
            } else {
                for (const auto& qp : tri_rule.points) {
                    add_zero_order(qp.l0, qp.l1, qp.l2, area * qp.weight);
                }
            }
        }

        // F load against element-constant test gradients, midpoint value.
        if (coeffs.F) {
            const Vec2 Fm = coeffs.F(mesh.triangle_centroid(t));
            if (!std::isfinite(Fm.x) || !std::isfinite(Fm.y)) {
                element_eval_error("load F evaluated non-finite", t, mesh.triangle_centroid(t));
            }
            for (int k = 0; k < 3; ++k) r[tri.v[k]] -= area * dot(grads[k], Fm);
        }
    }

    // Boundary terms.
    if (coeffs.h || coeffs.g) {
        for_each_edge_qp(mesh, edge_rule, [&](const BoundaryEdge& be, const EdgeQuadPoint& e) {
            const double uq = e.l_a * u.values[be.a] + (1.0 - e.l_a) * u.values[be.b];
            double val = 0.0;
            if (coeffs.h) val += coeffs.h(e.bp, uq);
            if (coeffs.g) val -= coeffs.g(e.bp);
            if (!std::isfinite(val)) {
                throw EvaluationError("boundary term evaluated non-finite", e.bp.pos.x,
                                      e.bp.pos.y);
            }
            r[be.a] += e.weight * e.l_a * val;
            r[be.b] += e.weight * (1.0 - e.l_a) * val;
        });
    }
    return r;
}

SparseMatrix assemble_tangent(const Mesh& mesh, const CoefficientSet& coeffs,
                              const DiscreteField& u, const AssemblyOptions& opts) {
    SparseMatrix::Builder builder(mesh.num_vertices());
    const TriangleRule tri_rule = opts.triangle_rule();
    const EdgeRule edge_rule = opts.lumped_zero_order ? EdgeRule::vertex_rule()
                                                      : opts.edge_rule();

    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const auto& tri = mesh.triangle(t);
        const double area = mesh.triangle_area(t);
        const auto grads = mesh.hat_gradients(t);
        const Vec2 z = u.gradient(t);

        if (coeffs.a) {
            for (const auto& qp : tri_rule.points) {
                const Vec2 x = bary_point(mesh, t, qp.l0, qp.l1, qp.l2);
                const Mat2 jac = flux_jacobian(coeffs, x, z);
                const double w = area * qp.weight;
                for (int kj = 0; kj < 3; ++kj) {
                    const Vec2 jg = jac.apply(grads[kj]);
                    for (int ki = 0; ki < 3; ++ki) {
                        builder.add(tri.v[ki], tri.v[kj], w * dot(grads[ki], jg));
                    }
                }
            }
        }

        if (coeffs.b || coeffs.omega != 0.0) {
            auto add_zero_order = [&](double l0, double l1, double l2, double w) {
                const Vec2 x = bary_point(mesh, t, l0, l1, l2);
                const double uq = l0 * u.values[tri.v[0]] + l1 * u.values[tri.v[1]] +
                                  l2 * u.values[tri.v[2]];
                double deriv = coeffs.omega;
                if (coeffs.b) {
                    if (coeffs.db_du) {
                        deriv += coeffs.db_du(x, uq);
                    } else {
                        const double du = 1e-7 * std::fmax(1.0, std::fabs(uq));
                        deriv += (coeffs.b(x, uq + du) - coeffs.b(x, uq - du)) / (2 * du);
                    }
                }
                const double hats[3] = {l0, l1, l2};
                for (int ki = 0; ki < 3; ++ki) {
                    for (int kj = 0; kj < 3; ++kj) {
                        builder.add(tri.v[ki], tri.v[kj], w * hats[ki] * hats[kj] * deriv);
                    }
                }
            };
            if (opts.lumped_zero_order) {
                add_zero_order(1.0, 0.0, 0.0, area / 3.0);
                add_zero_order(0.0, 1.0, 0.0, area / 3.0);
                add_zero_order(0.0, 0.0, 1.0, area / 3.0);
            } else {
                for (const auto& qp : tri_rule.points) {
                    add_zero_order(qp.l0, qp.l1, qp.l2, area * qp.weight);
                }
            }
        }
    }

    if (coeffs.h) {
        for_each_edge_qp(mesh, edge_rule, [&](const BoundaryEdge& be, const EdgeQuadPoint& e) {
            const double uq = e.l_a * u.values[be.a] + (1.0 - e.l_a) * u.values[be.b];
            double deriv;
            if (coeffs.dh_du) {
                deriv = coeffs.dh_du(e.bp, uq);
            } else {
                const double du = 1e-7 * std::fmax(1.0, std::fabs(uq));
                deriv = (coeffs.h(e.bp, uq + du) - coeffs.h(e.bp, uq - du)) / (2 * du);
            }
            const double la = e.l_a, lb = 1.0 - e.l_a;
            builder.add(be.a, be.a, e.weight * la * la * deriv);
            builder.add(be.a, be.b, e.weight * la * lb * deriv);
            builder.add(be.b, be.a, e.weight * lb * la * deriv);
            builder.add(be.b, be.b, e.weight * lb * lb * deriv);
        });
    }

    const bool symmetric = !coeffs.has_gradient_lower_order();
    return builder.build(symmetric);
}

SparseMatrix assemble_mass(const Mesh& mesh, bool lumped) {
    SparseMatrix::Builder builder(mesh.num_vertices());
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const auto& tri = mesh.triangle(t);
        const double area = mesh.triangle_area(t);
        if (lumped) {
            for (int k = 0; k < 3; ++k) builder.add(tri.v[k], tri.v[k], area / 3.0);
        } else {
            for (int ki = 0; ki < 3; ++ki) {
                for (int kj = 0; kj < 3; ++kj) {
                    builder.add(tri.v[ki], tri.v[kj], area / 12.0 * (ki == kj ? 2.0 : 1.0));
                }
            }
        }
    }
    return builder.build(true);
}

SparseMatrix assemble_boundary_mass(const Mesh& mesh, const BoundaryField& beta,
                                    bool lumped, int edge_degree) {
    SparseMatrix::Builder builder(mesh.num_vertices());
    const EdgeRule rule = lumped ? EdgeRule::vertex_rule() : EdgeRule::make(edge_degree);
    for_each_edge_qp(mesh, rule, [&](const BoundaryEdge& be, const EdgeQuadPoint& e) {
        const double bq = beta ? beta(e.bp) : 1.0;
        if (!(bq > 0.0)) {
            throw InvalidParameter("assemble_boundary_mass: beta must be positive (got " +
                                   std::to_string(bq) + ")");
        }
        const double la = e.l_a, lb = 1.0 - e.l_a;
        builder.add(be.a, be.a, e.weight * bq * la * la);
        builder.add(be.a, be.b, e.weight * bq * la * lb);
        builder.add(be.b, be.a, e.weight * bq * lb * la);
        builder.add(be.b, be.b, e.weight * bq * lb * lb);
    });
    return builder.build(true);
}

std::vector<double> assemble_loads(const Mesh& mesh, const CoefficientSet& coeffs,
                                   const AssemblyOptions& opts) {
    std::vector<double> loads(mesh.num_vertices(), 0.0);
    const TriangleRule tri_rule = opts.triangle_rule();

    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const auto& tri = mesh.triangle(t);
        const double area = mesh.triangle_area(t);
        const auto grads = mesh.hat_gradients(t);
        if (coeffs.f) {
            for (const auto& qp : tri_rule.points) {
                const Vec2 x = bary_point(mesh, t, qp.l0, qp.l1, qp.l2);
                const double fq = coeffs.f(x);
                const double w = area * qp.weight;
                const double hats[3] = {qp.l0, qp.l1, qp.l2};
                for (int k = 0; k < 3; ++k) loads[tri.v[k]] += w * hats[k] * fq;
            }
        }
        if (coeffs.F) {
            const Vec2 Fm = coeffs.F(mesh.triangle_centroid(t));
            for (int k = 0; k < 3; ++k) loads[tri.v[k]] += area * dot(grads[k], Fm);
        }
    }
    if (coeffs.g) {
        for_each_edge_qp(mesh, opts.edge_rule(), [&](const BoundaryEdge& be,
                                                     const EdgeQuadPoint& e) {
            const double gq = coeffs.g(e.bp);
            loads[be.a] += e.weight * e.l_a * gq;
            loads[be.b] += e.weight * (1.0 - e.l_a) * gq;
        });
    }
    return loads;
}

LaggedOperator assemble_lagged_operator(const Mesh& mesh, const CoefficientSet& coeffs,
                                        const DiscreteField& u, const AssemblyOptions& opts) {
    LaggedOperator out;
    SparseMatrix::Builder builder(mesh.num_vertices());
    out.constant.assign(mesh.num_vertices(), 0.0);
    const TriangleRule tri_rule = opts.triangle_rule();
    const EdgeRule edge_rule = opts.lumped_zero_order ? EdgeRule::vertex_rule()
                                                      : opts.edge_rule();

    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const auto& tri = mesh.triangle(t);
        const double area = mesh.triangle_area(t);
        const auto grads = mesh.hat_gradients(t);
        const Vec2 z = u.gradient(t);
        const double y = std::fmax(norm(z), kGradFloor);

        for (const auto& qp : tri_rule.points) {
            const Vec2 x = bary_point(mesh, t, qp.l0, qp.l1, qp.l2);
            const double w = area * qp.weight;
            double m_lag;
            if (coeffs.radial) {
                m_lag = coeffs.radial->m(x, y);
            } else {
                // Secant magnitude |a(x,z)| / |z| for non-radial fluxes.
                m_lag = coeffs.a ? norm(coeffs.a(x, z)) / y : 0.0;
            }
            for (int ki = 0; ki < 3; ++ki) {
                for (int kj = 0; kj < 3; ++kj) {
                    builder.add(tri.v[ki], tri.v[kj], w * m_lag * dot(grads[ki], grads[kj]));
                }
            }
        }

        auto add_zero_order = [&](double l0, double l1, double l2, double w) {
            const Vec2 x = bary_point(mesh, t, l0, l1, l2);
            const double uq = l0 * u.values[tri.v[0]] + l1 * u.values[tri.v[1]] +
                              l2 * u.values[tri.v[2]];
            double secant = coeffs.omega;
            double constant = 0.0;
            if (coeffs.b) {
                const double b0 = coeffs.b(x, 0.0);
                constant += b0;
                if (std::fabs(uq) > 1e-12) secant += (coeffs.b(x, uq) - b0) / uq;
            }
            if (coeffs.b_grad) constant += coeffs.b_grad(x, uq, z);   // fully lagged
            const double hats[3] = {l0, l1, l2};
            for (int ki = 0; ki < 3; ++ki) {
                out.constant[tri.v[ki]] += w * hats[ki] * constant;
                for (int kj = 0; kj < 3; ++kj) {
                    builder.add(tri.v[ki], tri.v[kj], w * hats[ki] * hats[kj] * secant);
                }
            }
        };
        if (opts.lumped_zero_order) {
            add_zero_order(1.0, 0.0, 0.0, area / 3.0);
            add_zero_order(0.0, 1.0, 0.0, area / 3.0);
            add_zero_order(0.0, 0.0, 1.0, area / 3.0);
        } else {
            for (const auto& qp : tri_rule.points) {
                add_zero_order(qp.l0, qp.l1, qp.l2, area * qp.weight);
            }
        }
    }

    if (coeffs.h) {
        for_each_edge_qp(mesh, edge_rule, [&](const BoundaryEdge& be, const EdgeQuadPoint& e) {
            const double uq = e.l_a * u.values[be.a] + (1.0 - e.l_a) * u.values[be.b];
            const double h0 = coeffs.h(e.bp, 0.0);
            double secant = 0.0;
            if (std::fabs(uq) > 1e-12) secant = (coeffs.h(e.bp, uq) - h0) / uq;
            const double la = e.l_a, lb = 1.0 - e.l_a;
            out.constant[be.a] += e.weight * la * h0;
            out.constant[be.b] += e.weight * lb * h0;
            builder.add(be.a, be.a, e.weight * la * la * secant);
            builder.add(be.a, be.b, e.weight * la * lb * secant);
            builder.add(be.b, be.a, e.weight * lb * la * secant);
            builder.add(be.b, be.b, e.weight * lb * lb * secant);
        });
    }

    out.matrix = builder.build(true);
    return out;
}

AssembledForms assemble_forms(const Mesh& mesh, const CoefficientSet& coeffs,
                              const DiscreteField& u, const AssemblyOptions& opts) {
    AssembledForms forms;
    forms.residual = assemble_residual(mesh, coeffs, u, opts);
    forms.tangent = assemble_tangent(mesh, coeffs, u, opts);
    forms.mass_consistent = assemble_mass(mesh, false);
    forms.mass_lumped = assemble_mass(mesh, true);
    forms.mass_boundary = assemble_boundary_mass(mesh, coeffs.beta, opts.lumped_zero_order,
                                                 opts.edge_degree);
    return forms;
}

} // namespace plfem
