// Bi-Lipschitz coordinate changes: Jacobian bounds, boundary measure
// density, coefficient push-forward, and the flat-boundary reflection
// extension.
//
// Convention: the map psi sends the computational (source) domain onto the
// domain where the original coefficients live. Gradients transform as row
// vectors, grad(u o psi) = (grad u o psi) J.
#ifndef PLFEM_GEOMAP_HPP
#define PLFEM_GEOMAP_HPP

#include <functional>
#include <string>
#include <vector>

#include "plfem/coeffs.hpp"
#include "plfem/fem.hpp"
#include "plfem/mesh.hpp"

namespace plfem {

struct BiLipschitzMap {
    std::function<Vec2(Vec2)> forward;
    std::function<Vec2(Vec2)> inverse;
    // Analytic Jacobian of forward; when absent a central finite-difference
    // fallback with relative step 1e-6 is used.
    std::function<Mat2(Vec2)> jacobian;
    double lipschitz_forward = 1.0;
    double lipschitz_inverse = 1.0;
    std::string name;

    Mat2 jacobian_at(Vec2 x) const;
};

// Built-in maps: "identity", "scale:<c>", "shear:<c>", "reflect_y".
BiLipschitzMap builtin_map(const std::string& name);

// User map from expression strings over x, y (forward and inverse pair).
BiLipschitzMap map_from_expressions(const std::string& fwd_x, const std::string& fwd_y,
                                    const std::string& inv_x, const std::string& inv_y,
                                    double lipschitz_forward, double lipschitz_inverse);

// Largest |forward(inverse(x)) - x| over the samples.
double inverse_consistency(const BiLipschitzMap& map, const std::vector<Vec2>& points);

struct JacobianReport {
    bool pass = true;
    double det_min = 0.0;
    double det_max = 0.0;
    double lower_bound = 0.0;   // lipschitz_inverse^-2
    double upper_bound = 0.0;   // 2 lipschitz_forward^2
    bool sign_constant = true;
    int singular_samples = 0;
    std::vector<Vec2> violations;
};

// Verifies |det J| in [L_inv^-2, 2 L_fwd^2] and invertibility of J at each
// sample (the planar specialization of the two-sided Jacobian bounds).
// Singular Jacobians are reported, not fatal.
JacobianReport jacobian_bounds_check(const BiLipschitzMap& map,
                                     const std::vector<Vec2>& sample_points);

// Length-stretch factor of the map restricted to the boundary: at each edge
// quadrature point, m = |J tau| for the unit edge tangent tau. This is the
// density converting boundary integrals, int_{target} g = int_{source} (g o psi) m.
struct BoundaryDensity {
    struct Sample {
        int edge = 0;         // boundary edge index in the source mesh
        Vec2 pos;             // quadrature point position
        double m = 0.0;
    };
    std::vector<Sample> samples;
    double m_min = 0.0;
    double m_max = 0.0;
};

BoundaryDensity boundary_density(const BiLipschitzMap& map, const Mesh& source_mesh,
                                 int edge_degree = 3);

// Push-forward of a full coefficient set:
//   a_hat(x,z) = J^-1 a(psi(x), J^-T z) |det J|,   b_hat = (b o psi) |det J|,
//   f_hat = (f o psi)|det J|,  F_hat = J^-1 (F o psi)|det J|,
//   g_hat = (g o psi) m,       h_hat = (h o psi) m,  beta_hat = (beta o psi) m.
// The omega u term is folded into b_hat (omega becomes x-dependent under the
// volume factor), so the result carries omega = 0. Structure parameters are
// rescaled from Jacobian bounds sampled on sample_points (default: a 9x9
// grid on the unit square).
CoefficientSet transform_coefficients(const CoefficientSet& coeffs, const BiLipschitzMap& map,
                                      const std::vector<Vec2>& sample_points = {});

// Rescaled growth parameters valid for the transformed coefficients:
//   nu_hat = inf|det J| nu / sup|J|^p,  mu_hat = sup|det J| sup|J^-1|^p mu,
// with the psi fields composed and scaled accordingly.
StructureParams rescaled_structure_params(const StructureParams& params,
                                          const BiLipschitzMap& map,
                                          const std::vector<Vec2>& sample_points);

// check_structure applied to the transformed coefficients with the rescaled
// parameters.
StructureReport verify_structure_preservation(const CoefficientSet& coeffs,
                                              const BiLipschitzMap& map,
                                              const SampleGrid& grid);

// Even reflection of a piecewise-linear field across the line y = 0. The
// input mesh must lie in the closed upper half plane and touch the axis in
// at least one boundary edge; the result lives on the mirrored double mesh
// and satisfies v(x,-y) = v(x,y).
DiscreteField reflect_extend(const DiscreteField& field, double tol = 1e-12);

// The mirrored double mesh itself (axis edges become interior).
Mesh mirror_mesh(const Mesh& mesh, double tol = 1e-12);

} // namespace plfem

#endif
