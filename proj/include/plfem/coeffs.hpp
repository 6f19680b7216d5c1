// Coefficient model for quasi-linear problems of p-Laplace type:
//
//   -div a(x, grad u) + b(x, u) + omega u = f - div F   in the domain,
//    a(x, grad u) . nu + h(x, u) = g + F . nu           on the boundary,
//
// together with growth/ellipticity bounds and the sampling-based checkers
// that certify them.
#ifndef PLFEM_COEFFS_HPP
#define PLFEM_COEFFS_HPP

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "plfem/fields.hpp"
#include "plfem/geometry.hpp"

namespace plfem {

// Growth and ellipticity parameters:
//   z.a(x,z)  >= nu |z|^p - psi1(x)
//   |a(x,z)|  <= mu |z|^(p-1) + psi2(x)
//   |b(x,u)|  <= psi1(x)|u|^(p-1) + psi1(x)
//   |h(x,u)|  <= psi4(x)|u|^(p-1) + psi4(x)
// The psi fields are nonnegative callables sampled at quadrature points;
// their integrability class is a user contract, not verified here. eps is
// integrability bookkeeping metadata and never enters any computation.
struct StructureParams {
    double p = 2.0;
    double nu = 1.0;
    double mu = 1.0;
    double eps = 0.5;
    ScalarField psi1 = constant_field(0.0);
    ScalarField psi2 = constant_field(0.0);
    ScalarField psi3 = constant_field(0.0);
    BoundaryField psi4 = constant_boundary_field(0.0);

    void validate() const;
};

// Flux of the form a(x,z) = m(x,|z|) z. Monotonicity of such a flux is
// equivalent to y -> m(x,y) y being nondecreasing, which is what
// check_monotone_radial samples.
struct RadialFluxModel {
    // m(x, y) with y = |z| >= 0.
    std::function<double(Vec2, double)> m;
    // dm/dy; optional, used by the Newton tangent.
    std::function<double(Vec2, double)> m_prime;
    // Representative spatial sample points; empty means the origin only.
    std::vector<Vec2> points;
};

struct CoefficientSet {
    // Flux a(x, z).
    std::function<Vec2(Vec2, Vec2)> a;
    // Optional analytic flux Jacobian da/dz (2x2), used by the tangent.
    std::function<Mat2(Vec2, Vec2)> da_dz;
    // Radial form of the flux when available.
    std::optional<RadialFluxModel> radial;

    // Zero-order term b(x, u) and its optional u-derivative.
    std::function<double(Vec2, double)> b;
    std::function<double(Vec2, double)> db_du;

    // Gradient-dependent lower-order term B(x,u,z) - b(x,u); accepted by the
    // elliptic assembly, rejected by the parabolic module.
    std::function<double(Vec2, double, Vec2)> b_grad;

    // Boundary term h(x, u) and its optional u-derivative.
    std::function<double(const BoundaryPoint&, double)> h;
    std::function<double(const BoundaryPoint&, double)> dh_du;

    double omega = 0.0;

    // Loads.
    ScalarField f = constant_field(0.0);
    VectorField F;
    BoundaryField g = constant_boundary_field(0.0);

    // Wentzell weight; bounded between positive constants when used.
    BoundaryField beta;

    StructureParams structure;

    bool has_gradient_lower_order() const { return static_cast<bool>(b_grad); }
};

enum class PLaplaceVariant {
    additive,    // a0(x) (s + |z|^(p-2)) z
    quadratic,   // a0(x) (s^2 + |z|^2)^((p-2)/2) z
};

// The built-in p-Laplace family with b = b0 |u|^(p-2) u and
// h = h0 |u|^(p-2) u; structure parameters are filled from bounds of a0, b0,
// h0 on [0,1]^2-scale sample boxes. For p < 2, a(x,0) is defined as 0 (the
// limit value); the tangent regularization lives in the assembler. Note the
// additive variant with s > 0 and p < 2 has no globally valid upper growth
// bound; the declared one covers |z| <= 1 and check_structure reports
// honestly beyond that.
CoefficientSet make_p_laplace(double p, double s, PLaplaceVariant variant,
                              ScalarField a0 = constant_field(1.0),
                              ScalarField b0 = constant_field(0.0),
                              BoundaryField h0 = constant_boundary_field(0.0));

// Linear diffusion a = a0(x) z, b = b0(x) u, h = h0(x) u (the p = 2 case,
// kept separate so configs can ask for it by name).
CoefficientSet make_linear_diffusion(ScalarField a0 = constant_field(1.0),
                                     ScalarField b0 = constant_field(0.0),
                                     BoundaryField h0 = constant_boundary_field(0.0));

// One sample of a structure-condition violation (or the worst margin seen).
struct SampleWitness {
    Vec2 x;
    double u = 0.0;
    Vec2 z1, z2;     // z-samples; z2 unused by single-point checks
    double u2 = 0.0; // second u-sample for pairwise checks
};

struct StructureReport {
    struct Check {
        std::string name;
        bool pass = true;
        double worst_margin = 0.0;   // negative means violated
        SampleWitness worst_at;
    };
    Check lower_coercivity;   // z.a >= nu|z|^p - psi1
    Check upper_growth;       // |a| <= mu|z|^(p-1) + psi2
    Check zero_order_growth;  // |b| <= psi1|u|^(p-1) + psi1
    Check boundary_growth;    // |h| <= psi4|u|^(p-1) + psi4
    bool pass = false;

    // The sample grid, recorded for reproducibility.
    std::vector<Vec2> points;
    std::vector<double> u_values;
    std::vector<Vec2> z_values;
};

struct SampleGrid {
    std::vector<Vec2> points;
    std::vector<double> u_values;
    std::vector<Vec2> z_values;
};

// Evaluates all four growth inequalities on the grid product
// points x u_values x z_values. Non-finite evaluations throw
// EvaluationError carrying the sample point.
StructureReport check_structure(const CoefficientSet& coeffs, const SampleGrid& grid);

struct MonotonicityReport {
    bool pass = true;
    // Strict if the worst margin over distinct samples stays above tolerance.
    bool strictly_monotone = true;
    double worst_margin = 0.0;
    SampleWitness worst_at;
    long failing_index = -1;  // index of the first failing sample, -1 if none
    std::string note;         // e.g. "boundary case: >= 0 with equality"
};

// Checks that y -> m(x,y) y is nondecreasing over consecutive samples of a
// strictly increasing nonnegative grid, for each x in model.points.
MonotonicityReport check_monotone_radial(const RadialFluxModel& model,
                                         const std::vector<double>& y_samples);

struct PairSamples {
    // (x, z1, z2) triples for the flux inequality.
    std::vector<SampleWitness> flux_pairs;
    // (x, u1, u2) triples for the zero-order and boundary inequalities.
    std::vector<SampleWitness> scalar_pairs;
};

// Evaluates the three pairwise monotonicity inequalities
//   (z1-z2).(a(x,z1)-a(x,z2)) >= 0,
//   (u1-u2)(b(x,u1)-b(x,u2)) >= 0,
//   (u1-u2)(h(x,u1)-h(x,u2)) >= 0
// on the given samples.
MonotonicityReport check_monotone_pairwise(const CoefficientSet& coeffs,
                                           const PairSamples& samples);

} // namespace plfem

#endif
