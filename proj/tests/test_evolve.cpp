#include <doctest.h>

#include <cmath>
#include <memory>
#include <sstream>

#include "plfem/evolve.hpp"
#include "plfem/robin_series.hpp"
#include "support/oracles.hpp"

using namespace plfem;

namespace {

std::shared_ptr<const Mesh> square_mesh(int n) {
    return std::make_shared<const Mesh>(generate_unit_square(n));
}

CoefficientSet neumann_diffusion(double p) {
    return make_p_laplace(p, 0.0, PLaplaceVariant::additive);
}

CoefficientSet robin_diffusion(double p, double h0 = 1.0) {
    return make_p_laplace(p, 0.0, PLaplaceVariant::additive, constant_field(1.0),
                          constant_field(0.0), constant_boundary_field(h0));
}

double mass_integral(const SparseMatrix& mass, const std::vector<double>& values) {
    double q = 0.0;
    for (double v : mass.multiply(values)) q += v;
    return q;
}

} // namespace

TEST_CASE("constant initial data is a fixed point of the Neumann flow") {
    auto mesh = square_mesh(4);
    const DiscreteField u0 = DiscreteField::from_function(mesh, [](Vec2) { return 1.7; });
    for (double p : {2.0, 3.0}) {
        EvolutionConfig cfg;
        cfg.t_final = 0.5;
        cfg.n_steps = 8;
        const Trajectory traj = evolve(u0, neumann_diffusion(p), cfg);
        REQUIRE(traj.fields.size() == 9);
        for (const auto& field : traj.fields) {
            for (double v : field.values) CHECK(v == doctest::Approx(1.7).epsilon(1e-12));
        }
        for (const auto& rep : traj.reports) CHECK(rep.converged);
    }
}

TEST_CASE("pure Neumann diffusion conserves the mean") {
    auto mesh = square_mesh(8);
    const DiscreteField u0 = DiscreteField::from_function(
        mesh, [](Vec2 v) { return std::cos(3.14159265358979323846 * v.x) + 0.3 * v.y; });
    EvolutionConfig cfg;
    cfg.t_final = 0.1;
    cfg.n_steps = 10;
    for (double p : {2.0, 3.0}) {
        const Trajectory traj = evolve(u0, neumann_diffusion(p), cfg);
        const SparseMatrix mass = assemble_mass(*mesh, false);
        const double q0 = mass_integral(mass, traj.fields.front().values);
        for (const auto& field : traj.fields) {
            CHECK(std::fabs(mass_integral(mass, field.values) - q0) <= 1e-9);
        }
    }
}

TEST_CASE("constant forcing adds mass at the exact rate") {
    auto mesh = square_mesh(4);
    const DiscreteField u0 = DiscreteField::zero(mesh);
    EvolutionConfig cfg;
    cfg.t_final = 0.2;
    cfg.n_steps = 5;
    cfg.forcing = [](double, Vec2) { return 1.0; };
    const Trajectory traj = evolve(u0, neumann_diffusion(2.0), cfg);
    const SparseMatrix mass = assemble_mass(*mesh, false);
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
        CHECK(mass_integral(mass, traj.fields[k].values) ==
              doctest::Approx(traj.times[k]).epsilon(1e-10));
    }
}

TEST_CASE("separable Robin heat run tracks the product series reference") {
    // Robin coefficient 1 on all four sides; u0 = cos(pi x) separates into
    // the product of two 1D problems with initial data cos(pi x) and 1.
    const int n = 16;
    auto mesh = square_mesh(n);
    const double pi = 3.14159265358979323846;
    const DiscreteField u0 =
        DiscreteField::from_function(mesh, [pi](Vec2 v) { return std::cos(pi * v.x); });
    EvolutionConfig cfg;
    cfg.t_final = 0.1;
    cfg.n_steps = 128;
    cfg.store_stride = cfg.n_steps;
    const Trajectory traj = evolve(u0, robin_diffusion(2.0), cfg);

    const RobinSeries1D sx(1.0, [pi](double x) { return std::cos(pi * x); }, 50);
    const RobinSeries1D sy(1.0, [](double) { return 1.0; }, 50);
    double err = 0.0;
    const auto& uf = traj.final_field();
    for (int i = 0; i < uf.size(); ++i) {
        const Vec2 v = mesh->vertex(i);
        err = std::fmax(err, std::fabs(uf.values[i] - sx.eval(v.x, 0.1) * sy.eval(v.y, 0.1)));
    }
    CHECK(err <= 5e-3);   // coarse run; the acceptance suite pins the tight bound
}

TEST_CASE("product formula self-convergence table") {
    auto mesh = square_mesh(8);
    const double pi = 3.14159265358979323846;
    const DiscreteField u0 =
        DiscreteField::from_function(mesh, [pi](Vec2 v) { return std::cos(pi * v.x); });

    SUBCASE("linear case converges at first order") {
        const ConvergenceTable table =
            crandall_liggett_probe(u0, robin_diffusion(2.0), 0.1, {4, 8, 16, 32});
        REQUIRE(table.rows.size() == 3);
        for (std::size_t i = 0; i + 1 < table.rows.size(); ++i) {
            CHECK(table.rows[i + 1].diff_maxnorm < table.rows[i].diff_maxnorm);
        }
        double mean_order = 0.0;
        for (double o : table.observed_orders) mean_order += o;
        mean_order /= table.observed_orders.size();
        CHECK(mean_order >= 0.8);
        CHECK(mean_order <= 1.3);
    }
    SUBCASE("p = 3 differences decrease monotonically") {
        const ConvergenceTable table =
            crandall_liggett_probe(u0, robin_diffusion(3.0), 0.1, {4, 8, 16, 32});
        REQUIRE(table.rows.size() == 3);
        for (std::size_t i = 0; i + 1 < table.rows.size(); ++i) {
            CHECK(table.rows[i + 1].diff_maxnorm < table.rows[i].diff_maxnorm);
        }
    }
    SUBCASE("degenerate single-entry list gives an empty table") {
        const ConvergenceTable table =
            crandall_liggett_probe(u0, robin_diffusion(2.0), 0.1, {1});
        CHECK(table.rows.empty());
    }
    SUBCASE("non-increasing lists are rejected") {
        CHECK_THROWS_AS(crandall_liggett_probe(u0, robin_diffusion(2.0), 0.1, {8, 4}),
                        InvalidParameter);
    }
}

TEST_CASE("semigroup composition defect") {
    auto mesh = square_mesh(8);
    const double pi = 3.14159265358979323846;
    const DiscreteField u0 =
        DiscreteField::from_function(mesh, [pi](Vec2 v) { return std::cos(pi * v.x); });

    SUBCASE("steady states have zero defect") {
        const DiscreteField c = DiscreteField::from_function(mesh, [](Vec2) { return 0.4; });
        const SemigroupDefect d =
            semigroup_property_check(c, neumann_diffusion(2.0), 0.05, 0.05, 8);
        CHECK(d.defect <= 1e-10);
    }
    SUBCASE("defect shrinks when the step count doubles") {
        const SemigroupDefect coarse =
            semigroup_property_check(u0, robin_diffusion(2.0), 0.05, 0.05, 16);
        const SemigroupDefect fine =
            semigroup_property_check(u0, robin_diffusion(2.0), 0.05, 0.05, 32);
        CHECK(coarse.defect > 0.0);
        CHECK(fine.defect < coarse.defect);
        CHECK(coarse.defect / fine.defect > 1.5);
    }
    SUBCASE("invalid horizons are rejected") {
        CHECK_THROWS_AS(semigroup_property_check(u0, robin_diffusion(2.0), 0.0, 0.1, 4),
                        InvalidParameter);
    }
}

TEST_CASE("max-norm decay monitor") {
    auto mesh = square_mesh(8);
    const double pi = 3.14159265358979323846;
    EvolutionConfig cfg;
    cfg.t_final = 0.2;
    cfg.n_steps = 20;
    cfg.mass_mode = MassMode::lumped;
    REQUIRE(mesh->is_delaunay());

    SUBCASE("zero initial data stays zero") {
        const Trajectory traj = evolve(DiscreteField::zero(mesh), robin_diffusion(2.0), cfg);
        const DecayReport rep = linf_decay_check(traj);
        CHECK(rep.ok);
        CHECK(rep.max_violation == 0.0);
        for (const auto& f : traj.fields) CHECK(f.max_abs() == 0.0);
    }
    SUBCASE("p = 2 Robin decays strictly") {
        const DiscreteField u0 =
            DiscreteField::from_function(mesh, [pi](Vec2 v) { return std::cos(pi * v.x); });
        const Trajectory traj = evolve(u0, robin_diffusion(2.0), cfg);
        CHECK(linf_decay_check(traj).ok);
        for (std::size_t k = 1; k < traj.fields.size(); ++k) {
            CHECK(traj.fields[k].max_abs() < traj.fields[k - 1].max_abs());
        }
    }
    SUBCASE("degenerate p = 4 flow is nonincreasing within slack") {
        const DiscreteField u0 = DiscreteField::from_function(
            mesh, [pi](Vec2 v) { return std::sin(pi * v.x) * std::sin(pi * v.y); });
        const Trajectory traj = evolve(u0, robin_diffusion(4.0), cfg);
        CHECK(linf_decay_check(traj).ok);
    }
}

TEST_CASE("per-step contraction between two trajectories") {
    auto mesh = square_mesh(6);
    oracles::Rng rng(83);
    DiscreteField a = DiscreteField::zero(mesh);
    DiscreteField b = DiscreteField::zero(mesh);
    for (int i = 0; i < a.size(); ++i) {
        a.values[i] = rng.uniform(-1, 1);
        b.values[i] = rng.uniform(-1, 1);
    }
    EvolutionConfig cfg;
    cfg.t_final = 0.1;
    cfg.n_steps = 10;
    for (double p : {2.0, 3.0}) {
        const CoefficientSet cs = robin_diffusion(p);
        const Trajectory ta = evolve(a, cs, cfg);
        const Trajectory tb = evolve(b, cs, cfg);
        const SparseMatrix mass = assemble_mass(*mesh, false);
        double prev = -1.0;
        for (std::size_t k = 0; k < ta.fields.size(); ++k) {
            std::vector<double> d(a.size());
            for (int i = 0; i < a.size(); ++i) {
                d[i] = ta.fields[k].values[i] - tb.fields[k].values[i];
            }
            const double dist = m_norm(mass, d);
            if (prev >= 0.0) CHECK(dist <= prev + 10.0 * cfg.solver.tol);
            prev = dist;
        }
    }
}

TEST_CASE("wentzell evolution conserves the boundary-weighted functional") {
    auto mesh = square_mesh(8);
    const double pi = 3.14159265358979323846;
    CoefficientSet cs = neumann_diffusion(2.0);
    cs.beta = constant_boundary_field(1.0);
    EvolutionConfig cfg;
    cfg.t_final = 0.05;
    cfg.n_steps = 10;
    cfg.wentzell = true;
    const DiscreteField u0 = DiscreteField::from_function(
        mesh, [pi](Vec2 v) { return std::cos(pi * v.x) * std::cos(pi * v.y); });
    const Trajectory traj = evolve(u0, cs, cfg);

    SparseMatrix mass = assemble_mass(*mesh, false);
    mass = mass.axpy(1.0, assemble_boundary_mass(*mesh, cs.beta));
    const double q0 = mass_integral(mass, traj.fields.front().values);
    for (const auto& field : traj.fields) {
        CHECK(std::fabs(mass_integral(mass, field.values) - q0) <= 1e-9);
    }
    // The boundary actually evolves: the trace is not frozen.
    bool boundary_moved = false;
    for (int i : mesh->boundary_vertices()) {
        if (std::fabs(traj.final_field().values[i] - u0.values[i]) > 1e-6) boundary_moved = true;
    }
    CHECK(boundary_moved);
}

TEST_CASE("evolution error carries the partial trajectory") {
    auto mesh = square_mesh(3);
    const double pi = 3.14159265358979323846;
    const DiscreteField u0 =
        DiscreteField::from_function(mesh, [pi](Vec2 v) { return std::cos(pi * v.x); });
    EvolutionConfig cfg;
    cfg.t_final = 0.1;
    cfg.n_steps = 4;
    cfg.solver.tol = 1e-14;
    cfg.solver.max_newton = 0;
    cfg.solver.max_lagged = 0;
    try {
        evolve(u0, robin_diffusion(3.0), cfg);
        FAIL("expected EvolutionError");
    } catch (const EvolutionError& e) {
        CHECK(e.failed_step == 1);
        CHECK(e.partial_trajectory.fields.size() == 1);
        CHECK(e.partial_trajectory.times.front() == 0.0);
    }
}

TEST_CASE("evolution input validation") {
    auto mesh = square_mesh(2);
    const DiscreteField u0 = DiscreteField::zero(mesh);
    EvolutionConfig cfg;
    cfg.t_final = -1.0;
    CHECK_THROWS_AS(evolve(u0, neumann_diffusion(2.0), cfg), InvalidParameter);
    cfg.t_final = 1.0;
    cfg.n_steps = 0;
    CHECK_THROWS_AS(evolve(u0, neumann_diffusion(2.0), cfg), InvalidParameter);
    cfg.n_steps = 2;
    CoefficientSet with_grad = neumann_diffusion(2.0);
    with_grad.b_grad = [](Vec2, double u, Vec2 z) { return u * norm(z); };
    CHECK_THROWS_AS(evolve(u0, with_grad, cfg), InvalidParameter);
    CoefficientSet wentzell_without_beta = neumann_diffusion(2.0);
    cfg.wentzell = true;
    CHECK_THROWS_AS(evolve(u0, wentzell_without_beta, cfg), InvalidParameter);
}

TEST_CASE("trajectory storage stride and exports") {
    auto mesh = square_mesh(2);
    const DiscreteField u0 = DiscreteField::from_function(mesh, [](Vec2 v) { return v.x; });
    EvolutionConfig cfg;
    cfg.t_final = 1.0;
    cfg.n_steps = 10;
    cfg.store_stride = 4;
    const Trajectory traj = evolve(u0, robin_diffusion(2.0), cfg);
    // Steps 4, 8 and the final step 10 are stored after the initial state.
    REQUIRE(traj.times.size() == 4);
    CHECK(traj.times[0] == 0.0);
    CHECK(traj.times[1] == doctest::Approx(0.4));
    CHECK(traj.times[2] == doctest::Approx(0.8));
    CHECK(traj.times[3] == doctest::Approx(1.0));

    std::ostringstream csv;
    write_trajectory_csv(traj, csv);
    const std::string text = csv.str();
    CHECK(text.rfind("time,v0,v1", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 5);   // header + 4 rows
}

TEST_CASE("robin series reference sanity") {
    // Eigenvalues solve the characteristic equation and interlace with
    // multiples of pi; the series reproduces its own initial datum.
    const double pi = 3.14159265358979323846;
    const RobinSeries1D series(1.0, [pi](double x) { return std::cos(pi * x); }, 50);
    const auto& lam = series.eigenvalues();
    REQUIRE(lam.size() == 50);
    for (std::size_t k = 0; k < lam.size(); ++k) {
        const double f = (lam[k] * lam[k] - 1.0) * std::sin(lam[k]) -
                         2.0 * lam[k] * std::cos(lam[k]);
        CHECK(std::fabs(f) <= 1e-8 * (1.0 + lam[k] * lam[k]));
        if (k > 0) CHECK(lam[k] > lam[k - 1] + 1.0);
        CHECK(lam[k] > k * pi);
        CHECK(lam[k] < (k + 1) * pi);
    }
    for (double x : {0.0, 0.31, 0.5, 0.77, 1.0}) {
        CHECK(series.eval(x, 0.0) == doctest::Approx(std::cos(pi * x)).epsilon(1e-6));
    }
}
