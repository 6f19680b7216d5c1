#include "plfem/geomap.hpp"

#include <cmath>
#include <map>

#include "plfem/errors.hpp"
#include "plfem/expr.hpp"
#include "plfem/quadrature.hpp"

namespace plfem {

namespace {

std::vector<Vec2> default_sample_points() {
    std::vector<Vec2> pts;
    for (int i = 0; i <= 8; ++i) {
        for (int j = 0; j <= 8; ++j) pts.push_back({i / 8.0, j / 8.0});
    }
    return pts;
}

} // namespace

Mat2 BiLipschitzMap::jacobian_at(Vec2 x) const {
    if (jacobian) return jacobian(x);
    const double hx = 1e-6 * std::fmax(1.0, std::fabs(x.x));
    const double hy = 1e-6 * std::fmax(1.0, std::fabs(x.y));
    const Vec2 dx = (forward({x.x + hx, x.y}) - forward({x.x - hx, x.y})) / (2 * hx);
    const Vec2 dy = (forward({x.x, x.y + hy}) - forward({x.x, x.y - hy})) / (2 * hy);
    return {dx.x, dy.x, dx.y, dy.y};
}

BiLipschitzMap builtin_map(const std::string& name) {
    BiLipschitzMap map;
    map.name = name;
    if (name == "identity") {
        map.forward = [](Vec2 x) { return x; };
        map.inverse = [](Vec2 x) { return x; };
        map.jacobian = [](Vec2) { return Mat2::identity(); };
        return map;
    }
    if (name == "reflect_y") {
        map.forward = [](Vec2 x) { return Vec2{x.x, -x.y}; };
        map.inverse = [](Vec2 x) { return Vec2{x.x, -x.y}; };
        map.jacobian = [](Vec2) { return Mat2{1.0, 0.0, 0.0, -1.0}; };
        return map;
    }
    const auto colon = name.find(':');
    if (colon != std::string::npos) {
        const std::string kind = name.substr(0, colon);
        const double c = std::stod(name.substr(colon + 1));
        if (kind == "scale") {
            if (c == 0.0) throw InvalidParameter("builtin_map: scale factor must be nonzero");
            map.forward = [c](Vec2 x) { return x * c; };
            map.inverse = [c](Vec2 x) { return x / c; };
            map.jacobian = [c](Vec2) { return Mat2{c, 0.0, 0.0, c}; };
            map.lipschitz_forward = std::fabs(c);
            map.lipschitz_inverse = 1.0 / std::fabs(c);
            return map;
        }
        if (kind == "shear") {
            map.forward = [c](Vec2 x) { return Vec2{x.x + c * x.y, x.y}; };
            map.inverse = [c](Vec2 x) { return Vec2{x.x - c * x.y, x.y}; };
            const Mat2 jac{1.0, c, 0.0, 1.0};
            map.jacobian = [jac](Vec2) { return jac; };
            map.lipschitz_forward = jac.operator_norm();
            map.lipschitz_inverse = jac.inverse().operator_norm();
            return map;
        }
    }
    throw InvalidParameter("builtin_map: unknown map '" + name + "'");
}

BiLipschitzMap map_from_expressions(const std::string& fwd_x, const std::string& fwd_y,
                                    const std::string& inv_x, const std::string& inv_y,
                                    double lipschitz_forward, double lipschitz_inverse) {
    if (!(lipschitz_forward > 0.0) || !(lipschitz_inverse > 0.0)) {
        throw InvalidParameter("map_from_expressions: Lipschitz bounds must be positive");
    }
    const Expr fx = Expr::parse(fwd_x), fy = Expr::parse(fwd_y);
    const Expr ix = Expr::parse(inv_x), iy = Expr::parse(inv_y);
    BiLipschitzMap map;
    map.name = "expr(" + fwd_x + "," + fwd_y + ")";
    map.forward = [fx, fy](Vec2 p) { return Vec2{fx.eval(p.x, p.y), fy.eval(p.x, p.y)}; };
    map.inverse = [ix, iy](Vec2 p) { return Vec2{ix.eval(p.x, p.y), iy.eval(p.x, p.y)}; };
    map.lipschitz_forward = lipschitz_forward;
    map.lipschitz_inverse = lipschitz_inverse;
    return map;
}

double inverse_consistency(const BiLipschitzMap& map, const std::vector<Vec2>& points) {
    double worst = 0.0;
    for (const Vec2& x : points) {
        worst = std::fmax(worst, norm(map.forward(map.inverse(x)) - x));
        worst = std::fmax(worst, norm(map.inverse(map.forward(x)) - x));
    }
    return worst;
}

JacobianReport jacobian_bounds_check(const BiLipschitzMap& map,
                                     const std::vector<Vec2>& sample_points) {
    if (sample_points.empty()) {
        throw InvalidParameter("jacobian_bounds_check: need at least one sample point");
    }
    JacobianReport rep;
    rep.lower_bound = 1.0 / (map.lipschitz_inverse * map.lipschitz_inverse);
    rep.upper_bound = 2.0 * map.lipschitz_forward * map.lipschitz_forward;

    bool seen = false;
    int sign = 0;
    const double tol = 1e-9;
    for (const Vec2& x : sample_points) {
        const Mat2 jac = map.jacobian_at(x);
        const double det = jac.det();
        const double scale = jac.operator_norm();
        if (!std::isfinite(det) || std::fabs(det) <= 1e-14 * std::fmax(1.0, scale * scale)) {
            ++rep.singular_samples;
            rep.violations.push_back(x);
            rep.pass = false;
            continue;
        }
        const double mag = std::fabs(det);
        if (!seen) {
            rep.det_min = rep.det_max = mag;
            sign = det > 0.0 ? 1 : -1;
            seen = true;
        } else {
            rep.det_min = std::fmin(rep.det_min, mag);
            rep.det_max = std::fmax(rep.det_max, mag);
            if ((det > 0.0 ? 1 : -1) != sign) rep.sign_constant = false;
        }
        if (mag < rep.lower_bound - tol || mag > rep.upper_bound + tol) {
            rep.violations.push_back(x);
            rep.pass = false;
        }
    }
    if (!rep.sign_constant) rep.pass = false;
    return rep;
}

BoundaryDensity boundary_density(const BiLipschitzMap& map, const Mesh& source_mesh,
                                 int edge_degree) {
    BoundaryDensity density;
    const EdgeRule rule = EdgeRule::make(edge_degree);
    bool seen = false;
    for (int e = 0; e < source_mesh.num_boundary_edges(); ++e) {
        const auto& be = source_mesh.boundary_edges()[e];
        const Vec2 pa = source_mesh.vertex(be.a);
        const Vec2 pb = source_mesh.vertex(be.b);
        const Vec2 tangent = source_mesh.edge_tangent(be);
        for (const auto& qp : rule.points) {
            const Vec2 x = pa * (1.0 - qp.t) + pb * qp.t;
            const double m = norm(map.jacobian_at(x).apply(tangent));
            if (!(m > 1e-14)) {
                throw EvaluationError("boundary_density: degenerate tangent image", x.x, x.y);
            }
            density.samples.push_back({e, x, m});
            if (!seen) {
                density.m_min = density.m_max = m;
                seen = true;
            } else {
                density.m_min = std::fmin(density.m_min, m);
                density.m_max = std::fmax(density.m_max, m);
            }
        }
    }
    return density;
}

StructureParams rescaled_structure_params(const StructureParams& params,
                                          const BiLipschitzMap& map,
                                          const std::vector<Vec2>& sample_points) {
    const std::vector<Vec2> pts = sample_points.empty() ? default_sample_points() : sample_points;
    double det_inf = 0.0, det_sup = 0.0, fwd_sup = 0.0, inv_sup = 0.0;
    bool seen = false;
    for (const Vec2& x : pts) {
        const Mat2 jac = map.jacobian_at(x);
        const double det = std::fabs(jac.det());
        if (det <= 1e-14) {
            throw EvaluationError("rescaled_structure_params: singular Jacobian", x.x, x.y);
        }
        const double nf = jac.operator_norm();
        const double ni = jac.inverse().operator_norm();
        if (!seen) {
            det_inf = det_sup = det;
            fwd_sup = nf;
            inv_sup = ni;
            seen = true;
        } else {
            det_inf = std::fmin(det_inf, det);
            det_sup = std::fmax(det_sup, det);
            fwd_sup = std::fmax(fwd_sup, nf);
            inv_sup = std::fmax(inv_sup, ni);
        }
    }

    StructureParams out;
    out.p = params.p;
    out.eps = params.eps;
    out.nu = det_inf * params.nu / std::pow(fwd_sup, params.p);
    out.mu = det_sup * std::pow(inv_sup, params.p) * params.mu;
    const auto fwd = map.forward;
    const double p = params.p;
    out.psi1 = [psi = params.psi1, fwd, det_sup](Vec2 x) { return det_sup * psi(fwd(x)); };
    out.psi2 = [psi = params.psi2, fwd, det_sup, inv_sup](Vec2 x) {
        return det_sup * inv_sup * psi(fwd(x));
    };
    out.psi3 = [psi = params.psi3, fwd, det_sup, inv_sup, p](Vec2 x) {
        return det_sup * std::pow(inv_sup, p - 1.0) * psi(fwd(x));
    };
    out.psi4 = [psi = params.psi4, map, fwd_sup](const BoundaryPoint& bp) {
        BoundaryPoint image = bp;
        image.pos = map.forward(bp.pos);
        const Vec2 pushed = map.jacobian_at(bp.pos).apply(bp.tangent);
        const double m = norm(pushed);
        image.tangent = m > 0.0 ? pushed / m : bp.tangent;
        return fwd_sup * psi(image);
    };
    return out;
}

CoefficientSet transform_coefficients(const CoefficientSet& coeffs, const BiLipschitzMap& map,
                                      const std::vector<Vec2>& sample_points) {
    CoefficientSet out;
    const auto jac_at = [map](Vec2 x) {
        const Mat2 jac = map.jacobian_at(x);
        const double det = jac.det();
        if (!(std::fabs(det) > 1e-14)) {
            throw EvaluationError("transform_coefficients: singular Jacobian", x.x, x.y);
        }
        return jac;
    };

    if (coeffs.a) {
        out.a = [a = coeffs.a, map, jac_at](Vec2 x, Vec2 z) {
            const Mat2 jac = jac_at(x);
            const Mat2 inv = jac.inverse();
            // row vector z: z J^-1 = (J^-T z)
            const Vec2 pulled = inv.apply_transposed(z);
            return inv.apply(a(map.forward(x), pulled)) * std::fabs(jac.det());
        };
    }
    const double omega = coeffs.omega;
    if (coeffs.b || omega != 0.0) {
        out.b = [b = coeffs.b, omega, map, jac_at](Vec2 x, double u) {
            const double det = std::fabs(jac_at(x).det());
            const double base = b ? b(map.forward(x), u) : 0.0;
            return (base + omega * u) * det;
        };
        if (coeffs.db_du || omega != 0.0) {
            out.db_du = [db = coeffs.db_du, omega, map, jac_at](Vec2 x, double u) {
                const double det = std::fabs(jac_at(x).det());
                return ((db ? db(map.forward(x), u) : 0.0) + omega) * det;
            };
        }
    }
    if (coeffs.b_grad) {
        out.b_grad = [bg = coeffs.b_grad, map, jac_at](Vec2 x, double u, Vec2 z) {
            const Mat2 jac = jac_at(x);
            const Vec2 pulled = jac.inverse().apply_transposed(z);
            return bg(map.forward(x), u, pulled) * std::fabs(jac.det());
        };
    }
    out.omega = 0.0;

    auto push_boundary_point = [map](const BoundaryPoint& bp, double& stretch) {
        BoundaryPoint image = bp;
        image.pos = map.forward(bp.pos);
        const Vec2 pushed = map.jacobian_at(bp.pos).apply(bp.tangent);
        stretch = norm(pushed);
        image.tangent = stretch > 0.0 ? pushed / stretch : bp.tangent;
        return image;
    };
    if (coeffs.h) {
        out.h = [h = coeffs.h, push_boundary_point](const BoundaryPoint& bp, double u) {
            double m = 0.0;
            const BoundaryPoint image = push_boundary_point(bp, m);
            return h(image, u) * m;
        };
        if (coeffs.dh_du) {
            out.dh_du = [dh = coeffs.dh_du, push_boundary_point](const BoundaryPoint& bp,
                                                                 double u) {
                double m = 0.0;
                const BoundaryPoint image = push_boundary_point(bp, m);
                return dh(image, u) * m;
            };
        }
    }
    if (coeffs.f) {
        out.f = [f = coeffs.f, map, jac_at](Vec2 x) {
            return f(map.forward(x)) * std::fabs(jac_at(x).det());
        };
    }
    if (coeffs.F) {
        out.F = [F = coeffs.F, map, jac_at](Vec2 x) {
            const Mat2 jac = jac_at(x);
            return jac.inverse().apply(F(map.forward(x))) * std::fabs(jac.det());
        };
    }
    if (coeffs.g) {
        out.g = [g = coeffs.g, push_boundary_point](const BoundaryPoint& bp) {
            double m = 0.0;
            const BoundaryPoint image = push_boundary_point(bp, m);
            return g(image) * m;
        };
    }
    if (coeffs.beta) {
        out.beta = [beta = coeffs.beta, push_boundary_point](const BoundaryPoint& bp) {
            double m = 0.0;
            const BoundaryPoint image = push_boundary_point(bp, m);
            return beta(image) * m;
        };
    }

    out.structure = rescaled_structure_params(coeffs.structure, map, sample_points);
    return out;
}

StructureReport verify_structure_preservation(const CoefficientSet& coeffs,
                                              const BiLipschitzMap& map,
                                              const SampleGrid& grid) {
    CoefficientSet transformed = transform_coefficients(coeffs, map, grid.points);
    return check_structure(transformed, grid);
}

Mesh mirror_mesh(const Mesh& mesh, double tol) {
    bool has_axis_edge = false;
    for (const auto& be : mesh.boundary_edges()) {
        if (std::fabs(mesh.vertex(be.a).y) <= tol && std::fabs(mesh.vertex(be.b).y) <= tol) {
            has_axis_edge = true;
        }
    }
    if (!has_axis_edge) {
        throw MeshError("mirror_mesh: boundary has no straight segment on the axis y = 0");
    }
    for (const auto& v : mesh.vertices()) {
        if (v.y < -tol) {
            throw MeshError("mirror_mesh: mesh crosses the reflection axis (vertex below y = 0)");
        }
    }

    std::vector<Vec2> verts = mesh.vertices();
    std::vector<int> mirrored(mesh.num_vertices());
    for (int i = 0; i < mesh.num_vertices(); ++i) {
        const Vec2 v = mesh.vertex(i);
        if (std::fabs(v.y) <= tol) {
            mirrored[i] = i;      // axis vertices are shared
        } else {
            mirrored[i] = static_cast<int>(verts.size());
            verts.push_back({v.x, -v.y});
        }
    }

    std::vector<Triangle> tris = mesh.triangles();
    for (const auto& tri : mesh.triangles()) {
        // Mirroring flips orientation; swap two vertices to restore it.
        tris.push_back({{mirrored[tri.v[0]], mirrored[tri.v[2]], mirrored[tri.v[1]]}});
    }

    std::vector<BoundaryEdge> bedges;
    for (const auto& be : mesh.boundary_edges()) {
        const bool on_axis = std::fabs(mesh.vertex(be.a).y) <= tol &&
                             std::fabs(mesh.vertex(be.b).y) <= tol;
        if (on_axis) continue;   // becomes interior
        bedges.push_back({be.a, be.b, be.tag, -1});
        bedges.push_back({mirrored[be.b], mirrored[be.a], be.tag, -1});
    }

    return Mesh(std::move(verts), std::move(tris), std::move(bedges));
}

DiscreteField reflect_extend(const DiscreteField& field, double tol) {
    const Mesh& mesh = *field.mesh;
    auto doubled = std::make_shared<Mesh>(mirror_mesh(mesh, tol));

    std::vector<double> values(doubled->num_vertices());
    // The mirror construction keeps original vertex ids and appends mirrors
    // of the off-axis vertices in the original order.
    for (int i = 0; i < mesh.num_vertices(); ++i) values[i] = field.values[i];
    int next = mesh.num_vertices();
    for (int i = 0; i < mesh.num_vertices(); ++i) {
        if (std::fabs(mesh.vertex(i).y) > tol) values[next++] = field.values[i];
    }
    return DiscreteField(std::move(doubled), std::move(values));
}

} // namespace plfem
