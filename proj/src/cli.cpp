#include "plfem/cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "plfem/diag.hpp"
#include "plfem/errors.hpp"
#include "plfem/expr.hpp"
#include "plfem/robin_series.hpp"
#include "plfem/vtk.hpp"

namespace plfem::cli {

namespace {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

double uniform(std::uint64_t& state, double lo, double hi) {
    const double unit = static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53;
    return lo + unit * (hi - lo);
}

ScalarField scalar_field_from_expr(const std::string& text, const char* what) {
    const Expr expr = Expr::parse(text);
    if (expr.depends_on_u()) {
        throw InvalidParameter(std::string(what) + ": expression must not reference u");
    }
    return [expr](Vec2 p) { return expr.eval(p.x, p.y); };
}

// Boundary fields take a default expression plus per-tag overrides written
// as "<key>.tag<k> = <expr>".
BoundaryField boundary_field_from_config(const Config& cfg, const std::string& section,
                                         const std::string& key,
                                         const std::string& fallback) {
    const std::string base = cfg.get_string(section, key, fallback);
    const Expr base_expr = Expr::parse(base);
    if (base_expr.depends_on_u()) {
        throw InvalidParameter(key + ": boundary expression must not reference u");
    }
    std::map<int, Expr> overrides;
    for (const auto& [k, v] : cfg.section_entries(section)) {
        const std::string prefix = key + ".tag";
        if (k.rfind(prefix, 0) == 0) {
            const int tag = std::stoi(k.substr(prefix.size()));
            overrides.emplace(tag, Expr::parse(v));
        }
    }
    if (overrides.empty()) {
        return [base_expr](const BoundaryPoint& bp) { return base_expr.eval(bp.pos.x, bp.pos.y); };
    }
    return [base_expr, overrides](const BoundaryPoint& bp) {
        const auto it = overrides.find(bp.tag);
        if (it != overrides.end()) return it->second.eval(bp.pos.x, bp.pos.y);
        return base_expr.eval(bp.pos.x, bp.pos.y);
    };
}

void write_manifest(const Config& cfg, const CommonOptions& opts, const std::string& command,
                    const Mesh* mesh, const SolverOptions& solver) {
    std::ofstream out(opts.out_dir + "/manifest.txt");
    char hash[32];
    std::snprintf(hash, sizeof hash, "0x%016llx",
                  static_cast<unsigned long long>(cfg.content_hash()));
    out << "command = " << command << "\n";
    out << "config = " << opts.config_path << "\n";
    out << "config_hash = " << hash << "\n";
    out << "seed = " << opts.seed << "\n";
    out << "threads = " << opts.threads << "\n";
    if (mesh) {
        out << "mesh_vertices = " << mesh->num_vertices() << "\n";
        out << "mesh_triangles = " << mesh->num_triangles() << "\n";
        out << "mesh_boundary_edges = " << mesh->num_boundary_edges() << "\n";
        out << "mesh_size = " << fmt17(mesh->mesh_size()) << "\n";
    }
    out << "newton_tol = " << fmt17(solver.tol) << "\n";
    out << "max_newton = " << solver.max_newton << "\n";
    out << "linear_tol = " << fmt17(solver.linear_tol) << "\n";
    out << "armijo_slope = " << fmt17(solver.armijo_slope) << "\n";
    out << "max_halvings = " << solver.max_halvings << "\n";
    out << "lagged_theta0 = " << fmt17(solver.theta0) << "\n";
}

void write_solve_report(const SolveReport& report, std::ostream& out) {
    out << "converged = " << (report.converged ? "true" : "false") << "\n";
    out << "strategy = " << report.strategy << "\n";
    out << "iterations = " << report.iterations << "\n";
    out << "linear_iterations = " << report.linear_iterations << "\n";
    out << "final_residual = " << fmt17(report.final_residual) << "\n";
    out << "damping_history =";
    for (double d : report.damping_history) out << " " << fmt17(d);
    out << "\n";
}

void write_field_csv(const DiscreteField& field, std::ostream& out) {
    out << "x,y,u\n";
    for (int i = 0; i < field.size(); ++i) {
        const Vec2 v = field.mesh->vertex(i);
        out << fmt17(v.x) << "," << fmt17(v.y) << "," << fmt17(field.values[i]) << "\n";
    }
}

} // namespace

std::shared_ptr<const Mesh> mesh_from_config(const Config& cfg) {
    const std::string generator = cfg.get_string("mesh", "generator", "unit_square");
    const int n = cfg.get_int("mesh", "n", 8);
    const int refine = cfg.get_int("mesh", "refine", 0);
    if (refine < 0) throw InvalidParameter("mesh: refine must be >= 0");

    Mesh mesh = [&]() {
        if (generator == "unit_square") return generate_unit_square(n);
        if (generator == "l_shape") return generate_l_shape(n);
        if (generator == "file") {
            const std::string path = cfg.require_string("mesh", "file");
            if (!std::filesystem::exists(path)) {
                throw InvalidParameter("mesh: file does not exist: " + path);
            }
            return load_mesh(path);
        }
        throw InvalidParameter("mesh: unknown generator '" + generator + "'");
    }();
    for (int k = 0; k < refine; ++k) mesh = refine_uniform(mesh);
    return std::make_shared<const Mesh>(std::move(mesh));
}

CoefficientSet coeffs_from_config(const Config& cfg) {
    const std::string family = cfg.get_string("coeffs", "family", "p_laplace");
    const std::string mode = cfg.get_string("bc", "mode", "robin");
    if (mode != "neumann" && mode != "robin" && mode != "wentzell") {
        throw InvalidParameter("bc: mode must be neumann, robin or wentzell");
    }

    ScalarField a0 = scalar_field_from_expr(cfg.get_string("coeffs", "a0", "1"), "a0");
    ScalarField b0 = scalar_field_from_expr(cfg.get_string("coeffs", "b0", "0"), "b0");
    BoundaryField h0 = boundary_field_from_config(cfg, "coeffs", "h0", "0");
    if (mode == "neumann") h0 = constant_boundary_field(0.0);

    const double p = cfg.get_double("coeffs", "p", 2.0);
    if (!(p > 1.0)) {
        throw InvalidParameter("coeffs: p must be in (1, inf), got " + fmt17(p));
    }

    CoefficientSet cs;
    if (family == "p_laplace" || family == "linear_diffusion" ||
        family == "p_laplace_regularized") {
        double s = cfg.get_double("coeffs", "s", family == "p_laplace_regularized" ? 1.0 : 0.0);
        std::string variant_name = cfg.get_string(
            "coeffs", "variant", family == "p_laplace_regularized" ? "quadratic" : "additive");
        const PLaplaceVariant variant = [&]() {
            if (variant_name == "additive") return PLaplaceVariant::additive;
            if (variant_name == "quadratic") return PLaplaceVariant::quadratic;
            throw InvalidParameter("coeffs: variant must be additive or quadratic");
        }();
        if (family == "linear_diffusion") {
            cs = make_linear_diffusion(a0, b0, h0);
        } else {
            cs = make_p_laplace(p, s, variant, a0, b0, h0);
        }
    } else if (family == "rotation") {
        // Skew test flux for the checker: pairwise products are identically 0
        // and z.a = 0, so coercivity only holds with a vanishing nu. The
        // defaults make the declared structure honest; override nu or mu to
        // exercise failure reports.
        cs.a = [](Vec2, Vec2 z) { return Vec2{z.y, -z.x}; };
        cs.structure.p = p;
        cs.structure.nu = cfg.get_double("coeffs", "nu", 1e-12);
        cs.structure.mu = std::fmax(cfg.get_double("coeffs", "mu", 1.0), cs.structure.nu);
        cs.structure.psi1 = constant_field(1.0);
    } else if (family == "decreasing_m") {
        // Non-monotone radial counterexample: y * m(y) = 1/y decreases.
        cs.a = [](Vec2, Vec2 z) {
            const double y2 = dot(z, z);
            return y2 > 0.0 ? z / y2 : Vec2{0.0, 0.0};
        };
        cs.radial = RadialFluxModel{[](Vec2, double y) { return 1.0 / (y * y); },
                                    [](Vec2, double y) { return -2.0 / (y * y * y); },
                                    {}};
        cs.structure.p = p;
    } else {
        throw InvalidParameter("coeffs: unknown family '" + family + "'");
    }

    cs.omega = cfg.get_double("coeffs", "omega", 0.0);
    if (cs.omega < 0.0) throw InvalidParameter("coeffs: omega must be >= 0");

    if (cfg.has("loads", "f")) {
        cs.f = scalar_field_from_expr(cfg.require_string("loads", "f"), "f");
    }
    if (cfg.has("loads", "Fx") || cfg.has("loads", "Fy")) {
        ScalarField fx = scalar_field_from_expr(cfg.get_string("loads", "Fx", "0"), "Fx");
        ScalarField fy = scalar_field_from_expr(cfg.get_string("loads", "Fy", "0"), "Fy");
        cs.F = [fx, fy](Vec2 x) { return Vec2{fx(x), fy(x)}; };
    }
    if (cfg.has("loads", "g")) {
        cs.g = boundary_field_from_config(cfg, "loads", "g", "0");
    }

    if (mode == "wentzell") {
        if (!cfg.has("coeffs", "beta")) {
            throw InvalidParameter("bc: wentzell mode requires a beta field in [coeffs]");
        }
        cs.beta = boundary_field_from_config(cfg, "coeffs", "beta", "1");
    }
    return cs;
}

SolverOptions solver_options_from_config(const Config& cfg) {
    SolverOptions opts;
    opts.tol = cfg.get_double("solver", "newton_tol", 1e-10);
    opts.max_newton = cfg.get_int("solver", "max_newton", 50);
    opts.linear_tol = cfg.get_double("solver", "linear_tol", 1e-12);
    opts.max_linear = cfg.get_int("solver", "max_linear", 0);
    opts.max_halvings = cfg.get_int("solver", "max_halvings", 30);
    opts.theta0 = cfg.get_double("solver", "lagged_theta0", 0.5);
    return opts;
}

MassMode mass_mode_from_config(const Config& cfg) {
    const std::string mass = cfg.get_string("solver", "mass", "consistent");
    if (mass == "consistent") return MassMode::consistent;
    if (mass == "lumped") return MassMode::lumped;
    throw InvalidParameter("solver: mass must be consistent or lumped");
}

int cmd_solve_elliptic(const Config& cfg, const CommonOptions& opts) {
    const auto mesh = mesh_from_config(cfg);
    const CoefficientSet coeffs = coeffs_from_config(cfg);
    const SolverOptions solver = solver_options_from_config(cfg);
    const MassMode mass_mode = mass_mode_from_config(cfg);
    std::filesystem::create_directories(opts.out_dir);
    write_manifest(cfg, opts, "solve-elliptic", mesh.get(), solver);

    DiscreteField u;
    SolveReport report;
    try {
        std::tie(u, report) = solve_elliptic(mesh, coeffs, mass_mode, solver);
    } catch (const NonConvergence& e) {
        std::cerr << "solve-elliptic: " << e.what() << "\n";
        return 2;
    }

    write_vtk(*mesh, u.values, "u", opts.out_dir + "/solution.vtk");
    {
        std::ofstream out(opts.out_dir + "/solution.csv");
        write_field_csv(u, out);
    }
    {
        std::ofstream out(opts.out_dir + "/solve_report.txt");
        write_solve_report(report, out);
    }
    {
        std::ofstream out(opts.out_dir + "/norms.txt");
        out << "l2_domain = " << fmt17(lq_norm(u, 2.0, NormDomain::domain)) << "\n";
        out << "linf_domain = "
            << fmt17(lq_norm(u, std::numeric_limits<double>::infinity(), NormDomain::domain))
            << "\n";
        out << "l2_boundary = " << fmt17(lq_norm(u, 2.0, NormDomain::boundary)) << "\n";
        if (cfg.has("verify", "exact")) {
            const ScalarField exact =
                scalar_field_from_expr(cfg.require_string("verify", "exact"), "exact");
            DiscreteField diff = u;
            for (int i = 0; i < diff.size(); ++i) diff.values[i] -= exact(mesh->vertex(i));
            const double err = lq_norm(diff, 2.0, NormDomain::domain);
            out << "l2_error_vs_exact = " << fmt17(err) << "\n";
            std::cout << "l2_error_vs_exact = " << fmt17(err) << "\n";
        }
    }
    std::cout << "solve-elliptic: converged in " << report.iterations << " iterations ("
              << report.strategy << "), residual " << fmt17(report.final_residual) << "\n";
    return 0;
}

int cmd_solve_parabolic(const Config& cfg, const CommonOptions& opts) {
    const auto mesh = mesh_from_config(cfg);
    const CoefficientSet coeffs = coeffs_from_config(cfg);
    const std::string mode = cfg.get_string("bc", "mode", "robin");

    EvolutionConfig evo;
    evo.t_final = cfg.get_double("evolution", "t_final", 1.0);
    evo.n_steps = cfg.get_int("evolution", "steps", 1);
    evo.store_stride = cfg.get_int("evolution", "stride", 1);
    evo.mass_mode = mass_mode_from_config(cfg);
    evo.solver = solver_options_from_config(cfg);
    evo.wentzell = mode == "wentzell";
    if (cfg.has("evolution", "forcing")) {
        const Expr expr = Expr::parse(cfg.require_string("evolution", "forcing"));
        evo.forcing = [expr](double t, Vec2 x) { return expr.eval(x.x, x.y, t); };
    }

    const ScalarField u0_field =
        scalar_field_from_expr(cfg.require_string("evolution", "u0"), "u0");
    const DiscreteField u0 = DiscreteField::from_function(mesh, u0_field);

    std::filesystem::create_directories(opts.out_dir);
    write_manifest(cfg, opts, "solve-parabolic", mesh.get(), evo.solver);

    Trajectory traj;
    try {
        traj = evolve(u0, coeffs, evo);
    } catch (const EvolutionError& e) {
        std::cerr << "solve-parabolic: " << e.what() << "\n";
        return 2;
    }

    {
        std::ofstream out(opts.out_dir + "/trajectory.csv");
        write_trajectory_csv(traj, out);
    }
    const std::string formats = cfg.get_string("output", "formats", "csv,vtk");
    if (formats.find("vtk") != std::string::npos) {
        write_trajectory_vtk(traj, opts.out_dir, "u");
    }

    std::ofstream report(opts.out_dir + "/report.txt");
    report << "steps = " << evo.n_steps << "\n";
    report << "dt = " << fmt17(evo.t_final / evo.n_steps) << "\n";
    report << "stored_states = " << traj.fields.size() << "\n";

    // Conservation monitor: drift of 1^T M u along the stored states.
    {
        SparseMatrix mass = assemble_mass(*mesh, evo.mass_mode == MassMode::lumped);
        if (evo.wentzell) {
            mass = mass.axpy(1.0, assemble_boundary_mass(*mesh, coeffs.beta,
                                                         evo.mass_mode == MassMode::lumped));
        }
        double q0 = 0.0, worst = 0.0;
        for (std::size_t k = 0; k < traj.fields.size(); ++k) {
            const auto mu = mass.multiply(traj.fields[k].values);
            double q = 0.0;
            for (double v : mu) q += v;
            if (k == 0) q0 = q;
            worst = std::fmax(worst, std::fabs(q - q0));
        }
        report << "mass_functional_drift = " << fmt17(worst) << "\n";
        std::cout << "mass_functional_drift = " << fmt17(worst) << "\n";
    }

    if (cfg.has("verify", "series_u0x") && cfg.has("verify", "series_u0y")) {
        // Product-series reference for separable Robin heat runs.
        const double r = cfg.get_double("verify", "series_robin", 1.0);
        const int modes = cfg.get_int("verify", "series_modes", 50);
        const Expr ux = Expr::parse(cfg.require_string("verify", "series_u0x"));
        const Expr uy = Expr::parse(cfg.require_string("verify", "series_u0y"));
        const RobinSeries1D sx(r, [&](double v) { return ux.eval(v, 0.0); }, modes);
        const RobinSeries1D sy(r, [&](double v) { return uy.eval(v, 0.0); }, modes);
        double err = 0.0;
        const auto& uf = traj.final_field();
        for (int i = 0; i < uf.size(); ++i) {
            const Vec2 v = mesh->vertex(i);
            err = std::fmax(err, std::fabs(uf.values[i] - sx.eval(v.x, evo.t_final) *
                                                              sy.eval(v.y, evo.t_final)));
        }
        report << "max_error_vs_series = " << fmt17(err) << "\n";
        std::cout << "max_error_vs_series = " << fmt17(err) << "\n";
    }

    std::cout << "solve-parabolic: " << evo.n_steps << " steps to t = " << fmt17(evo.t_final)
              << "\n";
    return 0;
}

int cmd_check_coefficients(const Config& cfg, const CommonOptions& opts) {
    const CoefficientSet coeffs = coeffs_from_config(cfg);
    std::filesystem::create_directories(opts.out_dir);
    write_manifest(cfg, opts, "check-coefficients", nullptr, solver_options_from_config(cfg));

    const int n_points = cfg.get_int("check", "points", 50);
    const int n_values = cfg.get_int("check", "values", 20);
    const double u_range = cfg.get_double("check", "u_range", 3.0);
    const double z_range = cfg.get_double("check", "z_range", 3.0);
    const int n_pairs = cfg.get_int("check", "pairs", 10000);
    const double y_min = cfg.get_double("check", "y_min", 0.0);
    const double y_max = cfg.get_double("check", "y_max", 10.0);
    const int y_count = cfg.get_int("check", "y_samples", 200);

    std::uint64_t state = opts.seed ^ 0xC0FFEEull;
    SampleGrid grid;
    for (int i = 0; i < n_points; ++i) {
        grid.points.push_back({uniform(state, 0.0, 1.0), uniform(state, 0.0, 1.0)});
    }
    for (int i = 0; i < n_values; ++i) {
        grid.u_values.push_back(uniform(state, -u_range, u_range));
        grid.z_values.push_back({uniform(state, -z_range, z_range),
                                 uniform(state, -z_range, z_range)});
    }
    grid.u_values.push_back(0.0);
    grid.z_values.push_back({0.0, 0.0});

    std::ofstream report(opts.out_dir + "/report.txt");
    bool all_pass = true;

    const StructureReport sr = check_structure(coeffs, grid);
    auto show = [&](const StructureReport::Check& chk) {
        report << chk.name << " = " << (chk.pass ? "pass" : "fail")
               << " worst_margin = " << fmt17(chk.worst_margin) << " at ("
               << fmt17(chk.worst_at.x.x) << ", " << fmt17(chk.worst_at.x.y) << ")"
               << " u = " << fmt17(chk.worst_at.u) << " z = (" << fmt17(chk.worst_at.z1.x)
               << ", " << fmt17(chk.worst_at.z1.y) << ")\n";
    };
    show(sr.lower_coercivity);
    show(sr.upper_growth);
    show(sr.zero_order_growth);
    show(sr.boundary_growth);
    all_pass = all_pass && sr.pass;

    if (coeffs.radial) {
        std::vector<double> ys;
        const double lo = std::fmax(y_min, coeffs.radial->m(Vec2{0, 0}, 0.0) ==
                                               coeffs.radial->m(Vec2{0, 0}, 0.0)
                                           ? y_min
                                           : 1e-3);
        for (int i = 0; i <= y_count; ++i) {
            ys.push_back(lo + (y_max - lo) * i / y_count);
        }
        if (ys.front() == 0.0 && !std::isfinite(coeffs.radial->m(Vec2{0, 0}, 0.0))) {
            ys.erase(ys.begin());
        }
        const MonotonicityReport mr = check_monotone_radial(*coeffs.radial, ys);
        report << "monotone_radial = " << (mr.pass ? "pass" : "fail")
               << " worst_margin = " << fmt17(mr.worst_margin);
        if (!mr.note.empty()) report << " note = " << mr.note;
        if (!mr.pass) {
            report << " witness_y = [" << fmt17(mr.worst_at.z1.x) << ", "
                   << fmt17(mr.worst_at.z2.x) << "]";
        }
        report << "\n";
        all_pass = all_pass && mr.pass;
    }

    PairSamples pairs;
    for (int i = 0; i < n_pairs; ++i) {
        SampleWitness s;
        s.x = {uniform(state, 0.0, 1.0), uniform(state, 0.0, 1.0)};
        s.z1 = {uniform(state, -z_range, z_range), uniform(state, -z_range, z_range)};
        s.z2 = {uniform(state, -z_range, z_range), uniform(state, -z_range, z_range)};
        pairs.flux_pairs.push_back(s);
        SampleWitness t;
        t.x = s.x;
        t.u = uniform(state, -u_range, u_range);
        t.u2 = uniform(state, -u_range, u_range);
        pairs.scalar_pairs.push_back(t);
    }
    const MonotonicityReport pr = check_monotone_pairwise(coeffs, pairs);
    report << "monotone_pairwise = " << (pr.pass ? "pass" : "fail")
           << " worst_margin = " << fmt17(pr.worst_margin);
    if (!pr.note.empty()) report << " note = " << pr.note;
    if (!pr.pass) {
        report << " witness = (" << fmt17(pr.worst_at.x.x) << ", " << fmt17(pr.worst_at.x.y)
               << ")";
    }
    report << "\n";
    all_pass = all_pass && pr.pass;

    std::cout << (all_pass ? "check-coefficients: all checks pass"
                           : "check-coefficients: FAILURES, see report.txt")
              << "\n";
    return all_pass ? 0 : 2;
}

int cmd_study(const Config& cfg, const CommonOptions& opts) {
    const std::string kind = cfg.require_string("study", "kind");
    std::filesystem::create_directories(opts.out_dir);
    const SolverOptions solver = solver_options_from_config(cfg);
    write_manifest(cfg, opts, "study:" + kind, nullptr, solver);

    if (kind == "refinement_hoelder" || kind == "refinement_error" ||
        kind == "refinement_contraction") {
        const int levels = cfg.get_int("study", "levels", 0);
        if (levels < 2) {
            throw InvalidParameter("study: refinement studies need levels >= 2");
        }
        StudyParams params;
        params.coeffs = coeffs_from_config(cfg);
        params.mass_mode = mass_mode_from_config(cfg);
        params.solver = solver;
        params.hoelder_alpha = cfg.get_double("study", "hoelder_alpha", 0.25);
        params.alpha = cfg.get_double("study", "alpha", 1.0);
        if (cfg.has("verify", "exact")) {
            params.exact = scalar_field_from_expr(cfg.require_string("verify", "exact"), "exact");
        }
        if (cfg.has("study", "rhs1")) {
            params.rhs1 = scalar_field_from_expr(cfg.require_string("study", "rhs1"), "rhs1");
            params.rhs2 = scalar_field_from_expr(cfg.require_string("study", "rhs2"), "rhs2");
        }
        const StudyQuantity quantity = kind == "refinement_hoelder" ? StudyQuantity::hoelder
                                       : kind == "refinement_error" ? StudyQuantity::error
                                                                    : StudyQuantity::contraction;
        const Config& cfg_ref = cfg;
        auto mesh_for_level = [&cfg_ref](int level) {
            const std::string generator = cfg_ref.get_string("mesh", "generator", "unit_square");
            const int n = cfg_ref.get_int("mesh", "n", 2);
            Mesh mesh = generator == "l_shape" ? generate_l_shape(n) : generate_unit_square(n);
            for (int k = 0; k < level; ++k) mesh = refine_uniform(mesh);
            return mesh;
        };
        const RefinementStudy study = refinement_study(mesh_for_level, levels, quantity, params);
        std::ofstream out(opts.out_dir + "/study.csv");
        write_study_csv(study, out);
        for (const auto& row : study.rows) {
            std::cout << "level " << row.level << " h = " << fmt17(row.h) << " "
                      << study.quantity << " = " << fmt17(row.value) << "\n";
        }
        return 0;
    }

    if (kind == "cl_probe") {
        const auto mesh = mesh_from_config(cfg);
        const CoefficientSet coeffs = coeffs_from_config(cfg);
        const DiscreteField u0 = DiscreteField::from_function(
            mesh, scalar_field_from_expr(cfg.require_string("study", "u0"), "u0"));
        const double t = cfg.get_double("study", "t", 0.1);
        const std::vector<int> n_list = cfg.get_int_list("study", "n_list");
        if (n_list.empty()) throw InvalidParameter("study: cl_probe needs a nonempty n_list");
        EvolutionConfig base;
        base.mass_mode = mass_mode_from_config(cfg);
        base.solver = solver;
        base.wentzell = cfg.get_string("bc", "mode", "robin") == "wentzell";
        const ConvergenceTable table = crandall_liggett_probe(u0, coeffs, t, n_list, base);
        std::ofstream out(opts.out_dir + "/cl_probe.csv");
        out << "n_coarse,n_fine,diff_mnorm,diff_maxnorm,observed_order\n";
        for (std::size_t i = 0; i < table.rows.size(); ++i) {
            const auto& row = table.rows[i];
            const double order = i < table.observed_orders.size()
                                     ? table.observed_orders[i]
                                     : std::numeric_limits<double>::quiet_NaN();
            out << row.n_coarse << "," << row.n_fine << "," << fmt17(row.diff_mnorm) << ","
                << fmt17(row.diff_maxnorm) << "," << fmt17(order) << "\n";
            std::cout << "n " << row.n_coarse << " -> " << row.n_fine
                      << " max-norm diff = " << fmt17(row.diff_maxnorm) << "\n";
        }
        return 0;
    }

    if (kind == "semigroup") {
        const auto mesh = mesh_from_config(cfg);
        const CoefficientSet coeffs = coeffs_from_config(cfg);
        const DiscreteField u0 = DiscreteField::from_function(
            mesh, scalar_field_from_expr(cfg.require_string("study", "u0"), "u0"));
        const double t = cfg.get_double("study", "t", 0.05);
        const double s = cfg.get_double("study", "s", 0.05);
        const int n = cfg.get_int("study", "n", 32);
        EvolutionConfig base;
        base.mass_mode = mass_mode_from_config(cfg);
        base.solver = solver;
        const SemigroupDefect d1 = semigroup_property_check(u0, coeffs, t, s, n, base);
        const SemigroupDefect d2 = semigroup_property_check(u0, coeffs, t, s, 2 * n, base);
        std::ofstream out(opts.out_dir + "/semigroup.csv");
        out << "n,defect\n";
        out << n << "," << fmt17(d1.defect) << "\n";
        out << 2 * n << "," << fmt17(d2.defect) << "\n";
        std::cout << "defect(n=" << n << ") = " << fmt17(d1.defect) << "\n";
        std::cout << "defect(n=" << 2 * n << ") = " << fmt17(d2.defect) << "\n";
        std::cout << "ratio = " << fmt17(d1.defect / d2.defect) << "\n";
        return 0;
    }

    throw InvalidParameter("study: unknown kind '" + kind + "'");
}

int cmd_export_mesh(const Config& cfg, const CommonOptions& opts) {
    const auto mesh = mesh_from_config(cfg);
    std::filesystem::create_directories(opts.out_dir);
    write_manifest(cfg, opts, "export-mesh", mesh.get(), {});
    save_mesh(*mesh, opts.out_dir + "/mesh.txt");
    write_vtk(*mesh, std::vector<double>(mesh->num_vertices(), 0.0), "u",
              opts.out_dir + "/mesh.vtk");
    std::cout << "export-mesh: " << mesh->num_vertices() << " vertices, "
              << mesh->num_triangles() << " triangles, " << mesh->num_boundary_edges()
              << " boundary edges\n";
    return 0;
}

int run(int argc, const char* const* argv) {
    CLI::App app{"finite-element solver for quasi-linear diffusion of p-Laplace type with "
                 "Robin and dynamic boundary conditions"};
    app.require_subcommand(1);

    CommonOptions opts;
    std::map<std::string, int (*)(const Config&, const CommonOptions&)> commands = {
        {"solve-elliptic", cmd_solve_elliptic},
        {"solve-parabolic", cmd_solve_parabolic},
        {"check-coefficients", cmd_check_coefficients},
        {"study", cmd_study},
        {"export-mesh", cmd_export_mesh},
    };
    for (auto& [name, fn] : commands) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", opts.config_path, "configuration file")->required();
        sub->add_option("--out", opts.out_dir, "output directory");
        sub->add_option("--threads", opts.threads, "worker threads for pair scans");
        sub->add_option("--seed", opts.seed, "seed for sampling-based checks");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        const Config cfg = Config::parse_file(opts.config_path);
        for (auto& [name, fn] : commands) {
            if (app.get_subcommand(name)->parsed()) return fn(cfg, opts);
        }
        return 1;
    } catch (const InvalidParameter& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

} // namespace plfem::cli
