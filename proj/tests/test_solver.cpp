#include <doctest.h>

#include <cmath>
#include <memory>

#include "plfem/solver.hpp"
#include "support/oracles.hpp"

using namespace plfem;

namespace {

std::shared_ptr<const Mesh> square_mesh(int n) {
    return std::make_shared<const Mesh>(generate_unit_square(n));
}

DiscreteField random_field(std::shared_ptr<const Mesh> mesh, oracles::Rng& rng, double lo = -1.0,
                           double hi = 1.0) {
    DiscreteField f = DiscreteField::zero(mesh);
    for (auto& v : f.values) v = rng.uniform(lo, hi);
    return f;
}

ResolventProblem robin_problem(std::shared_ptr<const Mesh> mesh, double p, double alpha,
                               DiscreteField rhs, MassMode mode = MassMode::consistent) {
    ResolventProblem problem;
    problem.mesh = mesh;
    problem.coeffs = make_p_laplace(p, 0.0, PLaplaceVariant::additive, constant_field(1.0),
                                    constant_field(1.0), constant_boundary_field(1.0));
    problem.alpha = alpha;
    problem.rhs = std::move(rhs);
    problem.mass_mode = mode;
    return problem;
}

} // namespace

TEST_CASE("conjugate gradients basics") {
    SUBCASE("identity returns rhs") {
        SparseMatrix::Builder b(3);
        for (int i = 0; i < 3; ++i) b.add(i, i, 1.0);
        const auto x = solve_linear_spd(b.build(true), {1.0, -2.0, 3.0}, 1e-14, 100);
        CHECK(x[0] == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(x[1] == doctest::Approx(-2.0).epsilon(1e-12));
        CHECK(x[2] == doctest::Approx(3.0).epsilon(1e-12));
    }
    SUBCASE("2x2 diagonal solve") {
        SparseMatrix::Builder b(2);
        b.add(0, 0, 2.0);
        b.add(1, 1, 4.0);
        const auto x = solve_linear_spd(b.build(true), {2.0, 4.0}, 1e-14, 100);
        CHECK(x[0] == doctest::Approx(1.0).epsilon(1e-13));
        CHECK(x[1] == doctest::Approx(1.0).epsilon(1e-13));
    }
    SUBCASE("random SPD system against a dense Cholesky oracle") {
        const int n = 50;
        oracles::Rng rng(123);
        std::vector<std::vector<double>> dense(n, std::vector<double>(n, 0.0));
        SparseMatrix::Builder b(n);
        // A = B^T B + n I assembled as a dense SPD matrix.
        std::vector<std::vector<double>> raw(n, std::vector<double>(n));
        for (auto& row : raw) {
            for (auto& v : row) v = rng.uniform(-1, 1);
        }
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                double s = i == j ? static_cast<double>(n) : 0.0;
                for (int k = 0; k < n; ++k) s += raw[k][i] * raw[k][j];
                dense[i][j] = s;
                b.add(i, j, s);
            }
        }
        std::vector<double> rhs(n);
        for (auto& v : rhs) v = rng.uniform(-2, 2);
        const auto x_cg = solve_linear_spd(b.build(true), rhs, 1e-12, 10000);
        const auto x_dense = oracles::dense_spd_solve(dense, rhs);
        for (int i = 0; i < n; ++i) {
            CHECK(x_cg[i] == doctest::Approx(x_dense[i]).epsilon(1e-8));
        }
    }
    SUBCASE("iteration budget exhaustion raises with the last residual") {
        SparseMatrix::Builder b(4);
        for (int i = 0; i < 4; ++i) b.add(i, i, 1.0 + i);
        b.add(0, 1, 0.5);
        b.add(1, 0, 0.5);
        CHECK_THROWS_AS(solve_linear_spd(b.build(true), {1, 1, 1, 1}, 1e-15, 1),
                        NonConvergence);
    }
}

TEST_CASE("resolvent with alpha = 0 is the identity projection") {
    auto mesh = square_mesh(3);
    oracles::Rng rng(5);
    const DiscreteField rhs = random_field(mesh, rng);
    const auto [u, report] = solve_resolvent(robin_problem(mesh, 3.0, 0.0, rhs));
    CHECK(report.converged);
    CHECK(report.iterations == 0);
    CHECK(report.strategy == "projection");
    for (int i = 0; i < u.size(); ++i) CHECK(u.values[i] == rhs.values[i]);
}

TEST_CASE("linear Robin resolvent agrees with a dense direct solve") {
    auto mesh = square_mesh(2);
    const int n = mesh->num_vertices();
    oracles::Rng rng(17);
    const DiscreteField rhs = random_field(mesh, rng);
    const double alpha = 0.37;

    ResolventProblem problem = robin_problem(mesh, 2.0, alpha, rhs);
    problem.coeffs.b = nullptr;   // pure diffusion with a Robin boundary term
    problem.coeffs.db_du = nullptr;
    const auto [u, report] = solve_resolvent(problem);
    CHECK(report.converged);

    // Dense path: (M + alpha K + alpha M_bdry) u = M rhs.
    CoefficientSet flux_only;
    flux_only.a = problem.coeffs.a;
    flux_only.radial = problem.coeffs.radial;
    const SparseMatrix k = assemble_tangent(*mesh, flux_only, DiscreteField::zero(mesh));
    const SparseMatrix m = assemble_mass(*mesh, false);
    const SparseMatrix mb = assemble_boundary_mass(*mesh, constant_boundary_field(1.0));
    std::vector<std::vector<double>> dense(n, std::vector<double>(n, 0.0));
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            dense[i][j] = m.at(i, j) + alpha * (k.at(i, j) + mb.at(i, j));
        }
    }
    const auto x = oracles::dense_spd_solve(dense, m.multiply(rhs.values));
    for (int i = 0; i < n; ++i) {
        CHECK(u.values[i] == doctest::Approx(x[i]).epsilon(1e-8));
    }
}

TEST_CASE("manufactured p = 3 solution is reproduced at the vertices") {
    // u* = x solves -div a(grad u) + u = x with g = a(grad u*) . nu; the
    // state lies in the P1 space, so the Galerkin solution matches it.
    for (int level = 0; level < 3; ++level) {
        auto mesh = std::make_shared<const Mesh>([&]() {
            Mesh m = generate_unit_square(4);
            for (int k = 0; k < level; ++k) m = refine_uniform(m);
            return m;
        }());
        CoefficientSet cs = make_p_laplace(3.0, 0.0, PLaplaceVariant::additive);
        cs.omega = 1.0;
        cs.f = [](Vec2 pnt) { return pnt.x; };
        cs.g = [](const BoundaryPoint& bp) {
            if (bp.tag == 2) return 1.0;    // right edge: a(grad u*) . nu = 1
            if (bp.tag == 4) return -1.0;   // left edge
            return 0.0;
        };
        const auto [u, report] = solve_elliptic(mesh, cs);
        CHECK(report.converged);
        for (int i = 0; i < u.size(); ++i) {
            CHECK(std::fabs(u.values[i] - mesh->vertex(i).x) <= 1e-6);
        }
    }
}

TEST_CASE("solver uniqueness: independent initial guesses agree") {
    auto mesh = square_mesh(4);
    oracles::Rng rng(29);
    const DiscreteField rhs = random_field(mesh, rng);
    for (double p : {1.5, 3.0}) {
        ResolventProblem problem = robin_problem(mesh, p, 0.8, rhs);
        SolverOptions opts;
        const auto [u1, r1] = solve_resolvent(problem, opts);
        const DiscreteField zero_guess = DiscreteField::zero(mesh);
        opts.initial_guess = &zero_guess;
        const auto [u2, r2] = solve_resolvent(problem, opts);
        const SparseMatrix mass = problem_mass(problem);
        std::vector<double> d(u1.values);
        for (int i = 0; i < u1.size(); ++i) d[i] -= u2.values[i];
        CHECK(m_norm(mass, d) <= 10.0 * opts.tol);
    }
}

TEST_CASE("contraction ratios") {
    SUBCASE("translation invariance gives ratio 1 for pure Neumann diffusion") {
        auto mesh = square_mesh(4);
        oracles::Rng rng(31);
        const DiscreteField f1 = random_field(mesh, rng);
        DiscreteField f2 = f1;
        for (auto& v : f2.values) v += 0.75;
        ResolventProblem p1;
        p1.mesh = mesh;
        p1.coeffs = make_p_laplace(2.0, 0.0, PLaplaceVariant::additive);
        p1.alpha = 0.5;
        p1.rhs = f1;
        ResolventProblem p2 = p1;
        p2.rhs = f2;
        CHECK(contraction_ratio(p1, p2, 2.0) == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(contraction_ratio(p1, p2, std::numeric_limits<double>::infinity()) ==
              doctest::Approx(1.0).epsilon(1e-9));
    }
    SUBCASE("L2 contraction for the p = 3 Robin problem") {
        auto mesh = square_mesh(4);
        oracles::Rng rng(37);
        for (int rep = 0; rep < 3; ++rep) {
            ResolventProblem p1 = robin_problem(mesh, 3.0, 1.0, random_field(mesh, rng));
            ResolventProblem p2 = p1;
            p2.rhs = random_field(mesh, rng);
            CHECK(contraction_ratio(p1, p2, 2.0) <= 1.0 + 1e-8);
        }
    }
    SUBCASE("max-norm contraction with lumped mass on a Delaunay mesh") {
        auto mesh = square_mesh(4);
        REQUIRE(mesh->is_delaunay());
        oracles::Rng rng(41);
        for (int rep = 0; rep < 3; ++rep) {
            ResolventProblem p1 =
                robin_problem(mesh, 2.0, 1.0, random_field(mesh, rng), MassMode::lumped);
            ResolventProblem p2 = p1;
            p2.rhs = random_field(mesh, rng);
            CHECK(contraction_ratio(p1, p2, std::numeric_limits<double>::infinity()) <=
                  1.0 + 1e-6);
        }
    }
    SUBCASE("intermediate exponents use the lumped weighted norm") {
        auto mesh = square_mesh(3);
        oracles::Rng rng(43);
        ResolventProblem p1 = robin_problem(mesh, 3.0, 1.0, random_field(mesh, rng));
        ResolventProblem p2 = p1;
        p2.rhs = random_field(mesh, rng);
        CHECK(contraction_ratio(p1, p2, 4.0) <= 1.0 + 1e-6);
    }
    SUBCASE("identical right-hand sides are rejected") {
        auto mesh = square_mesh(2);
        oracles::Rng rng(47);
        ResolventProblem p1 = robin_problem(mesh, 2.0, 1.0, random_field(mesh, rng));
        CHECK_THROWS_AS(contraction_ratio(p1, p1, 2.0), UndefinedRatio);
    }
}

TEST_CASE("order preservation with lumped mass on a Delaunay mesh") {
    auto mesh = square_mesh(4);
    oracles::Rng rng(53);
    for (double p : {2.0, 3.0}) {
        const DiscreteField f1 = random_field(mesh, rng);
        DiscreteField f2 = f1;
        for (auto& v : f2.values) v += rng.uniform(0.0, 1.0);   // f1 <= f2 pointwise
        ResolventProblem p1 = robin_problem(mesh, p, 1.0, f1, MassMode::lumped);
        ResolventProblem p2 = p1;
        p2.rhs = f2;
        const auto [u1, r1] = solve_resolvent(p1);
        const auto [u2, r2] = solve_resolvent(p2);
        for (int i = 0; i < u1.size(); ++i) {
            CHECK(u1.values[i] <= u2.values[i] + 1e-6);
        }
    }
}

TEST_CASE("newton converges in one step on the linear problem") {
    auto mesh = square_mesh(4);
    oracles::Rng rng(59);
    ResolventProblem problem = robin_problem(mesh, 2.0, 1.0, random_field(mesh, rng));
    const auto [u, report] = solve_resolvent(problem);
    CHECK(report.converged);
    CHECK(report.strategy == "newton");
    CHECK(report.iterations == 1);
}

TEST_CASE("newton tail is superlinear for p = 3") {
    auto mesh = square_mesh(4);
    oracles::Rng rng(61);
    ResolventProblem problem = robin_problem(mesh, 3.0, 1.0, random_field(mesh, rng));
    SolverOptions opts;
    opts.tol = 1e-12;
    const auto [u, report] = solve_resolvent(problem, opts);
    CHECK(report.converged);
    const auto& hist = report.residual_history;
    REQUIRE(hist.size() >= 3);
    for (std::size_t k = hist.size() - 2; k < hist.size(); ++k) {
        CHECK(hist[k] < 0.5 * hist[k - 1]);
    }
}

TEST_CASE("gradient-dependent lower-order terms take the lagged path") {
    auto mesh = square_mesh(3);
    oracles::Rng rng(67);
    ResolventProblem problem = robin_problem(mesh, 2.0, 0.5, random_field(mesh, rng, -0.2, 0.2));
    // B(x, u, z) = 0.1 |z| u is monotone in u and gradient dependent.
    problem.coeffs.b_grad = [](Vec2, double u, Vec2 z) { return 0.1 * norm(z) * u; };
    const auto [u, report] = solve_resolvent(problem);
    CHECK(report.converged);
    CHECK(report.strategy == "lagged");
    // The converged state satisfies the full residual equation.
    AssemblyOptions asm_opts;
    auto r = assemble_residual(*mesh, problem.coeffs, u, asm_opts);
    const SparseMatrix mass = problem_mass(problem);
    const auto mu = mass.multiply(u.values);
    const auto mrhs = mass.multiply(problem.rhs.values);
    double worst = 0.0;
    for (int i = 0; i < u.size(); ++i) {
        worst = std::fmax(worst, std::fabs(mu[i] + problem.alpha * r[i] - mrhs[i]));
    }
    CHECK(worst <= 1e-8);
}

TEST_CASE("invalid resolvent inputs") {
    auto mesh = square_mesh(2);
    oracles::Rng rng(71);
    ResolventProblem problem = robin_problem(mesh, 2.0, -1.0, random_field(mesh, rng));
    CHECK_THROWS_AS(solve_resolvent(problem), InvalidParameter);

    auto other = square_mesh(3);
    ResolventProblem mismatched = robin_problem(mesh, 2.0, 1.0, random_field(mesh, rng));
    mismatched.rhs = DiscreteField::zero(other);
    CHECK_THROWS_AS(solve_resolvent(mismatched), InvalidParameter);
}
