#include <doctest.h>

#include <cmath>
#include <limits>
#include <memory>
#include <sstream>

#include "plfem/diag.hpp"
#include "support/oracles.hpp"

using namespace plfem;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::shared_ptr<const Mesh> square_mesh(int n) {
    return std::make_shared<const Mesh>(generate_unit_square(n));
}

std::shared_ptr<const Mesh> scaled_square(int n, double scale) {
    const Mesh base = generate_unit_square(n);
    std::vector<Vec2> verts;
    for (const auto& v : base.vertices()) verts.push_back(v * scale);
    return std::make_shared<const Mesh>(
        Mesh(std::move(verts), base.triangles(), base.boundary_edges()));
}

} // namespace

TEST_CASE("discrete Lq norms") {
    auto mesh = square_mesh(8);
    const DiscreteField one = DiscreteField::from_function(mesh, [](Vec2) { return 1.0; });
    CHECK(lq_norm(one, 2.0, NormDomain::domain) == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(lq_norm(one, 2.0, NormDomain::boundary) == doctest::Approx(2.0).epsilon(1e-13));
    CHECK(lq_norm(one, kInf, NormDomain::domain) == 1.0);

    const DiscreteField x = DiscreteField::from_function(mesh, [](Vec2 v) { return v.x; });
    CHECK(std::fabs(lq_norm(x, 2.0, NormDomain::domain) - 1.0 / std::sqrt(3.0)) <= 1e-6);
    CHECK(lq_norm(x, kInf, NormDomain::domain) == 1.0);

    CHECK_THROWS_AS(lq_norm(one, 0.5, NormDomain::domain), InvalidParameter);
}

TEST_CASE("domain Lq norm is nondecreasing in q on the unit-area square") {
    auto mesh = square_mesh(6);
    oracles::Rng rng(11);
    DiscreteField u = DiscreteField::zero(mesh);
    for (auto& v : u.values) v = rng.uniform(-2, 2);
    double prev = 0.0;
    bool first = true;
    for (double q : {1.0, 1.5, 2.0, 3.0, 4.0, 8.0}) {
        const double val = lq_norm(u, q, NormDomain::domain);
        if (!first) CHECK(val >= prev - 1e-12);
        prev = val;
        first = false;
    }
    CHECK(lq_norm(u, kInf, NormDomain::domain) >= prev - 1e-12);
}

TEST_CASE("hoelder seminorm estimates") {
    auto mesh = square_mesh(6);
    SUBCASE("constants have zero seminorm") {
        const DiscreteField c = DiscreteField::from_function(mesh, [](Vec2) { return 4.2; });
        CHECK(hoelder_seminorm(c, 0.5, 1'000'000).seminorm == 0.0);
    }
    SUBCASE("u = x has seminorm 1 at alpha = 1 and alpha = 0.5") {
        const DiscreteField x = DiscreteField::from_function(mesh, [](Vec2 v) { return v.x; });
        const HoelderEstimate h1 = hoelder_seminorm(x, 1.0, 1'000'000);
        CHECK(h1.exhaustive);
        CHECK(h1.seminorm == doctest::Approx(1.0).epsilon(1e-12));
        // sup of d^(1-alpha) over horizontal pairs is attained at d = 1.
        const HoelderEstimate h05 = hoelder_seminorm(x, 0.5, 1'000'000);
        CHECK(h05.seminorm == doctest::Approx(1.0).epsilon(1e-12));
        const Vec2 pi_ = mesh->vertex(h05.pair_i), pj = mesh->vertex(h05.pair_j);
        CHECK(std::fabs(std::fabs(pi_.x - pj.x) - 1.0) < 1e-12);
    }
    SUBCASE("monotone in alpha when all pair distances stay below one") {
        auto small = scaled_square(5, 0.5);
        oracles::Rng rng(13);
        DiscreteField u = DiscreteField::zero(small);
        for (auto& v : u.values) v = rng.uniform(-1, 1);
        double prev = -1.0;
        for (double alpha : {0.25, 0.5, 0.75, 1.0}) {
            const double s = hoelder_seminorm(u, alpha, 1'000'000).seminorm;
            if (prev >= 0.0) CHECK(s >= prev * (1.0 - 1e-12));
            prev = s;
        }
    }
    SUBCASE("subsampled estimate never exceeds the exhaustive one") {
        oracles::Rng rng(17);
        DiscreteField u = DiscreteField::zero(mesh);
        for (auto& v : u.values) v = rng.uniform(-1, 1);
        const HoelderEstimate full = hoelder_seminorm(u, 0.5, 10'000'000);
        REQUIRE(full.exhaustive);
        const HoelderEstimate sub = hoelder_seminorm(u, 0.5, 400);
        CHECK_FALSE(sub.exhaustive);
        CHECK(sub.seminorm <= full.seminorm * (1.0 + 1e-15));
        CHECK(sub.seminorm > 0.0);
    }
    SUBCASE("threaded scan matches the sequential one exactly") {
        oracles::Rng rng(19);
        DiscreteField u = DiscreteField::zero(mesh);
        for (auto& v : u.values) v = rng.uniform(-1, 1);
        const HoelderEstimate seq = hoelder_seminorm(u, 0.25, 10'000'000, 1);
        const HoelderEstimate par = hoelder_seminorm(u, 0.25, 10'000'000, 4);
        CHECK(seq.seminorm == par.seminorm);
        CHECK(seq.pair_i == par.pair_i);
        CHECK(seq.pair_j == par.pair_j);
    }
    SUBCASE("input validation") {
        const DiscreteField c = DiscreteField::from_function(mesh, [](Vec2) { return 0.0; });
        CHECK_THROWS_AS(hoelder_seminorm(c, 0.0, 100), InvalidParameter);
        CHECK_THROWS_AS(hoelder_seminorm(c, 1.5, 100), InvalidParameter);
        CHECK_THROWS_AS(hoelder_seminorm(c, 0.5, 0), InvalidParameter);
        auto tiny = std::make_shared<const Mesh>(
            Mesh({{0, 0}, {1, 0}, {0, 1}}, {{{0, 1, 2}}},
                 {{0, 1, 1, -1}, {1, 2, 1, -1}, {2, 0, 1, -1}}));
        DiscreteField ok(tiny, {0.0, 1.0, 2.0});
        CHECK_NOTHROW(hoelder_seminorm(ok, 0.5, 100));
    }
}

TEST_CASE("moser exponent ladder") {
    const MoserLadder l1 = moser_ladder(2.0, 3, 2);
    REQUIRE(l1.exponents.size() == 3);
    CHECK(l1.exponents[0] == doctest::Approx(2.0));
    CHECK(l1.exponents[1] == doctest::Approx(6.0));
    CHECK(l1.exponents[2] == doctest::Approx(18.0));

    const MoserLadder l2 = moser_ladder(2.0, 4, 2);
    CHECK(l2.exponents[1] == doctest::Approx(4.0));
    CHECK(l2.exponents[2] == doctest::Approx(8.0));

    // Consecutive ratios equal N/(N-p) exactly.
    const MoserLadder l3 = moser_ladder(1.5, 2, 4);
    for (std::size_t k = 0; k + 1 < l3.exponents.size(); ++k) {
        CHECK(l3.exponents[k + 1] / l3.exponents[k] == doctest::Approx(4.0).epsilon(1e-15));
    }

    CHECK_THROWS_AS(moser_ladder(3.0, 3, 1), UnsupportedCase);
    CHECK_THROWS_AS(moser_ladder(2.0, 2, 1), UnsupportedCase);
    CHECK_THROWS_AS(moser_ladder(2.0, 3, -1), InvalidParameter);
}

TEST_CASE("ladder norm monitor") {
    auto mesh = square_mesh(16);
    const MoserLadder ladder = moser_ladder(1.5, 2, 3);

    SUBCASE("constants give bounded rungs") {
        const DiscreteField one = DiscreteField::from_function(mesh, [](Vec2) { return 1.0; });
        const LadderMonitor mon = ladder_norm_monitor(one, ladder);
        REQUIRE(mon.rows.size() == ladder.exponents.size());
        CHECK_FALSE(mon.any_flagged);
        for (const auto& row : mon.rows) {
            CHECK(row.domain_norm == doctest::Approx(1.0).epsilon(1e-10));
            CHECK(row.boundary_norm ==
                  doctest::Approx(std::pow(4.0, 1.0 / row.q)).epsilon(1e-10));
        }
    }
    SUBCASE("a large interior spike raises the flag") {
        DiscreteField spike = DiscreteField::from_function(mesh, [](Vec2) { return 0.01; });
        spike.values[mesh->num_vertices() / 2] = 100.0;
        const LadderMonitor mon = ladder_norm_monitor(spike, ladder);
        CHECK(mon.any_flagged);
    }
}

TEST_CASE("refinement studies") {
    SUBCASE("manufactured linear solution converges at second order in L2") {
        StudyParams params;
        const double pi = 3.14159265358979323846;
        // -u'' + u = (pi^2 + 1) cos(pi x) with natural Neumann boundary.
        params.coeffs = make_p_laplace(2.0, 0.0, PLaplaceVariant::additive);
        params.coeffs.omega = 1.0;
        params.coeffs.f = [pi](Vec2 v) { return (pi * pi + 1.0) * std::cos(pi * v.x); };
        params.exact = [pi](Vec2 v) { return std::cos(pi * v.x); };
        const RefinementStudy study = refinement_study(
            [](int level) {
                Mesh m = generate_unit_square(4);
                for (int k = 0; k < level; ++k) m = refine_uniform(m);
                return m;
            },
            3, StudyQuantity::error, params);
        REQUIRE(study.rows.size() == 3);
        for (int level = 1; level < 3; ++level) {
            CHECK(study.rows[level].observed_order >= 1.8);
        }
    }
    SUBCASE("contraction ratios stay below one across levels") {
        StudyParams params;
        params.coeffs = make_p_laplace(3.0, 0.0, PLaplaceVariant::additive,
                                       constant_field(1.0), constant_field(0.0),
                                       constant_boundary_field(1.0));
        params.alpha = 1.0;
        params.rhs1 = [](Vec2 v) { return std::sin(3.0 * v.x) + v.y; };
        params.rhs2 = [](Vec2 v) { return v.x * v.y - 0.5; };
        const RefinementStudy study = refinement_study(
            [](int level) {
                Mesh m = generate_unit_square(4);
                for (int k = 0; k < level; ++k) m = refine_uniform(m);
                return m;
            },
            3, StudyQuantity::contraction, params);
        for (const auto& row : study.rows) {
            CHECK(row.value <= 1.0 + 1e-8);
            CHECK(row.value > 0.0);
        }
    }
    SUBCASE("csv emission names the columns") {
        RefinementStudy study;
        study.quantity = "error";
        study.rows.push_back({0, 0.25, 1.0, std::numeric_limits<double>::quiet_NaN()});
        std::ostringstream out;
        write_study_csv(study, out);
        CHECK(out.str().rfind("level,h,error,observed_order\n", 0) == 0);
    }
    SUBCASE("level validation") {
        StudyParams params;
        params.coeffs = make_p_laplace(2.0, 0.0, PLaplaceVariant::additive);
        CHECK_THROWS_AS(refinement_study([](int) { return generate_unit_square(2); }, 1,
                                         StudyQuantity::hoelder, params),
                        InvalidParameter);
    }
}
