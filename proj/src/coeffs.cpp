#include "plfem/coeffs.hpp"

#include <algorithm>
#include <cmath>

#include "plfem/errors.hpp"

namespace plfem {

namespace {

// Margin tolerance: equality cases of the growth bounds must pass.
constexpr double kMarginTol = 1e-12;

double sample_sup(const ScalarField& f) {
    // Coarse bound of a coefficient field over the unit-square scale box;
    // used only to fill declared structure constants for built-in families.
    double s = 0.0;
    for (int i = 0; i <= 8; ++i) {
        for (int j = 0; j <= 8; ++j) {
            s = std::fmax(s, f({i / 8.0, j / 8.0}));
        }
    }
    return s;
}

double sample_inf(const ScalarField& f) {
    double s = f({0.0, 0.0});
    for (int i = 0; i <= 8; ++i) {
        for (int j = 0; j <= 8; ++j) {
            s = std::fmin(s, f({i / 8.0, j / 8.0}));
        }
    }
    return s;
}

void require_nonnegative_samples(const ScalarField& f, const char* what) {
    for (int i = 0; i <= 8; ++i) {
        for (int j = 0; j <= 8; ++j) {
            if (f({i / 8.0, j / 8.0}) < 0.0) {
                throw InvalidParameter(std::string(what) + " must be nonnegative");
            }
        }
    }
}

double odd_power(double u, double p) {
    // |u|^(p-2) u with the limit value 0 at u = 0 for p < 2.
    if (u == 0.0) return 0.0;
    return std::pow(std::fabs(u), p - 2.0) * u;
}

} // namespace

void StructureParams::validate() const {
    if (!(p > 1.0)) throw InvalidParameter("structure: p must be in (1, inf)");
    if (!(nu > 0.0) || !(mu >= nu)) throw InvalidParameter("structure: need 0 < nu <= mu");
    if (!(eps > 0.0 && eps < 1.0)) throw InvalidParameter("structure: eps must be in (0,1)");
}

CoefficientSet make_p_laplace(double p, double s, PLaplaceVariant variant,
                              ScalarField a0, ScalarField b0, BoundaryField h0) {
    if (!(p > 1.0)) throw InvalidParameter("make_p_laplace: p must be in (1, inf)");
    if (!(s >= 0.0)) throw InvalidParameter("make_p_laplace: regularization s must be >= 0");
    require_nonnegative_samples(b0, "make_p_laplace: b0");
    for (int i = 0; i <= 8; ++i) {
        const BoundaryPoint bp{{i / 8.0, 0.0}, {1.0, 0.0}, 0};
        if (h0(bp) < 0.0) throw InvalidParameter("make_p_laplace: h0 must be nonnegative");
    }

    CoefficientSet cs;

    auto m_of = [p, s, variant, a0](Vec2 x, double y) {
        if (variant == PLaplaceVariant::additive) {
            const double grow = (y == 0.0 && p < 2.0) ? 0.0 : std::pow(y, p - 2.0);
            return a0(x) * (s + grow);
        }
        return a0(x) * std::pow(s * s + y * y, 0.5 * (p - 2.0));
    };
    auto m_prime_of = [p, s, variant, a0](Vec2 x, double y) {
        if (variant == PLaplaceVariant::additive) {
            return a0(x) * (p - 2.0) * std::pow(y, p - 3.0);
        }
        return a0(x) * (p - 2.0) * y * std::pow(s * s + y * y, 0.5 * (p - 2.0) - 1.0);
    };

    cs.a = [m_of](Vec2 x, Vec2 z) {
        const double y = norm(z);
        if (y == 0.0) return Vec2{0.0, 0.0};   // limit value, exact for the residual
        return z * m_of(x, y);
    };
    cs.radial = RadialFluxModel{m_of, m_prime_of, {}};

    // Derivatives are for the Newton tangent only; |u| is floored so the
    // singular case p < 2 stays finite (the residual itself is exact).
    cs.b = [p, b0](Vec2 x, double u) { return b0(x) * odd_power(u, p); };
    cs.db_du = [p, b0](Vec2 x, double u) {
        const double ur = std::fmax(std::fabs(u), 1e-8);
        return b0(x) * (p - 1.0) * std::pow(ur, p - 2.0);
    };
    cs.h = [p, h0](const BoundaryPoint& bp, double u) { return h0(bp) * odd_power(u, p); };
    cs.dh_du = [p, h0](const BoundaryPoint& bp, double u) {
        const double ur = std::fmax(std::fabs(u), 1e-8);
        return h0(bp) * (p - 1.0) * std::pow(ur, p - 2.0);
    };

    // Declared structure constants covering the family:
    //   z.a = a0 m(|z|) |z|^2 >= (inf a0) |z|^p - psi1,
    //   |a| = a0 m(|z|) |z| <= mu |z|^(p-1) + psi2.
    const double a0_inf = sample_inf(a0);
    const double a0_sup = sample_sup(a0);
    if (a0_inf <= 0.0) throw InvalidParameter("make_p_laplace: a0 must be positive");

    StructureParams sp;
    sp.p = p;
    sp.nu = a0_inf;
    double psi1_const = 0.0;
    if (variant == PLaplaceVariant::additive) {
        sp.mu = a0_sup * (1.0 + s);
        sp.psi2 = constant_field(a0_sup * s);
    } else if (p >= 2.0) {
        const double c = std::pow(2.0, 0.5 * (p - 2.0));
        sp.mu = a0_sup * c;
        sp.psi2 = constant_field(a0_sup * c * std::pow(s, p - 1.0));
    } else {
        sp.mu = a0_sup;
        sp.psi2 = constant_field(0.0);
        // (s^2+y^2)^((p-2)/2) y^2 dips below y^p by at most s^p for p < 2.
        psi1_const = a0_sup * std::pow(s, p);
    }
    sp.psi1 = [b0, psi1_const](Vec2 x) { return std::fmax(b0(x), psi1_const); };
    sp.psi4 = h0;
    sp.eps = 0.5;
    cs.structure = sp;
    return cs;
}

CoefficientSet make_linear_diffusion(ScalarField a0, ScalarField b0, BoundaryField h0) {
    return make_p_laplace(2.0, 0.0, PLaplaceVariant::additive,
                          std::move(a0), std::move(b0), std::move(h0));
}

StructureReport check_structure(const CoefficientSet& coeffs, const SampleGrid& grid) {
    if (grid.points.empty() || grid.u_values.empty() || grid.z_values.empty()) {
        throw InvalidParameter("check_structure: sample grid must be nonempty");
    }
    coeffs.structure.validate();
    const auto& sp = coeffs.structure;

    StructureReport rep;
    rep.points = grid.points;
    rep.u_values = grid.u_values;
    rep.z_values = grid.z_values;
    rep.lower_coercivity.name = "lower_coercivity";
    rep.upper_growth.name = "upper_growth";
    rep.zero_order_growth.name = "zero_order_growth";
    rep.boundary_growth.name = "boundary_growth";

    bool seen[4] = {false, false, false, false};
    auto update_n = [&](int k, StructureReport::Check& chk, double margin, const SampleWitness& at) {
        if (!seen[k] || margin < chk.worst_margin) {
            chk.worst_margin = margin;
            chk.worst_at = at;
            seen[k] = true;
        }
        if (margin < -kMarginTol) chk.pass = false;
    };

    for (const Vec2& x : grid.points) {
        const double psi1 = sp.psi1(x);
        const double psi2 = sp.psi2(x);
        const BoundaryPoint bp{x, {1.0, 0.0}, 0};
        const double psi4 = sp.psi4(bp);
        if (psi1 < 0.0 || psi2 < 0.0 || psi4 < 0.0) {
            throw InvalidParameter("check_structure: psi fields must be nonnegative");
        }

        for (const Vec2& z : grid.z_values) {
            const Vec2 az = coeffs.a(x, z);
            if (!std::isfinite(az.x) || !std::isfinite(az.y)) {
                throw EvaluationError("check_structure: flux evaluated non-finite", x.x, x.y);
            }
            const double zp = std::pow(norm(z), sp.p);
            const double zp1 = std::pow(norm(z), sp.p - 1.0);
            SampleWitness at{x, 0.0, z, {}, 0.0};
            update_n(0, rep.lower_coercivity, dot(z, az) - (sp.nu * zp - psi1), at);
            update_n(1, rep.upper_growth, (sp.mu * zp1 + psi2) - norm(az), at);
        }
        for (double u : grid.u_values) {
            const double bu = coeffs.b ? coeffs.b(x, u) : 0.0;
            const double hu = coeffs.h ? coeffs.h(bp, u) : 0.0;
            if (!std::isfinite(bu) || !std::isfinite(hu)) {
                throw EvaluationError("check_structure: lower-order term evaluated non-finite",
                                      x.x, x.y);
            }
            const double up1 = std::pow(std::fabs(u), sp.p - 1.0);
            SampleWitness at{x, u, {}, {}, 0.0};
            update_n(2, rep.zero_order_growth, (psi1 * up1 + psi1) - std::fabs(bu), at);
            update_n(3, rep.boundary_growth, (psi4 * up1 + psi4) - std::fabs(hu), at);
        }
    }

    rep.pass = rep.lower_coercivity.pass && rep.upper_growth.pass &&
               rep.zero_order_growth.pass && rep.boundary_growth.pass;
    return rep;
}

MonotonicityReport check_monotone_radial(const RadialFluxModel& model,
                                         const std::vector<double>& y_samples) {
    if (y_samples.size() < 2) {
        throw InvalidParameter("check_monotone_radial: need at least two samples");
    }
    for (std::size_t i = 0; i < y_samples.size(); ++i) {
        if (y_samples[i] < 0.0 || (i > 0 && y_samples[i] <= y_samples[i - 1])) {
            throw InvalidParameter(
                "check_monotone_radial: samples must be nonnegative and strictly increasing");
        }
    }
    std::vector<Vec2> xs = model.points;
    if (xs.empty()) xs.push_back({0.0, 0.0});

    MonotonicityReport rep;
    bool seen = false;
    long index = 0;
    for (const Vec2& x : xs) {
        for (std::size_t i = 0; i + 1 < y_samples.size(); ++i, ++index) {
            const double y0 = y_samples[i], y1 = y_samples[i + 1];
            const double g0 = model.m(x, y0) * y0;
            const double g1 = model.m(x, y1) * y1;
            if (!std::isfinite(g0) || !std::isfinite(g1)) {
                throw EvaluationError("check_monotone_radial: m evaluated non-finite", x.x, x.y);
            }
            const double margin = g1 - g0;
            if (!seen || margin < rep.worst_margin) {
                rep.worst_margin = margin;
                rep.worst_at = {x, y0, {y0, 0.0}, {y1, 0.0}, y1};
                seen = true;
            }
            if (margin < -kMarginTol) {
                rep.pass = false;
                if (rep.failing_index < 0) rep.failing_index = index;
            }
            if (margin <= kMarginTol) rep.strictly_monotone = false;
        }
    }
    if (!rep.pass) {
        rep.note = "y*m(x,y) decreases between consecutive samples";
    } else if (!rep.strictly_monotone) {
        rep.note = "boundary case: >= 0 with equality";
    }
    return rep;
}

MonotonicityReport check_monotone_pairwise(const CoefficientSet& coeffs,
                                           const PairSamples& samples) {
    MonotonicityReport rep;
    bool seen = false;
    long index = 0;
    auto update = [&](double margin, const SampleWitness& at) {
        if (!std::isfinite(margin)) {
            throw EvaluationError("check_monotone_pairwise: non-finite evaluation", at.x.x, at.x.y);
        }
        if (!seen || margin < rep.worst_margin) {
            rep.worst_margin = margin;
            rep.worst_at = at;
            seen = true;
        }
        if (margin < -kMarginTol) {
            rep.pass = false;
            if (rep.failing_index < 0) rep.failing_index = index;
        }
        if (margin <= kMarginTol) rep.strictly_monotone = false;
        ++index;
    };

    for (const auto& s : samples.flux_pairs) {
        const Vec2 d = s.z1 - s.z2;
        update(dot(d, coeffs.a(s.x, s.z1) - coeffs.a(s.x, s.z2)), s);
    }
    for (const auto& s : samples.scalar_pairs) {
        const double du = s.u - s.u2;
        if (coeffs.b) update(du * (coeffs.b(s.x, s.u) - coeffs.b(s.x, s.u2)), s);
        if (coeffs.h) {
            const BoundaryPoint bp{s.x, {1.0, 0.0}, 0};
            update(du * (coeffs.h(bp, s.u) - coeffs.h(bp, s.u2)), s);
        }
    }
    if (!rep.pass) {
        rep.note = "monotonicity violated";
    } else if (!rep.strictly_monotone) {
        rep.note = "boundary case: >= 0 with equality";
    }
    return rep;
}

} // namespace plfem
