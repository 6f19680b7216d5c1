#include "plfem/solver.hpp"

#include <cmath>
#include <limits>

#include "plfem/errors.hpp"

namespace plfem {

namespace {

double dot_vec(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(const std::vector<double>& v) { return std::sqrt(dot_vec(v, v)); }

// State shared by the Newton and lagged paths of one nonlinear solve.
struct NonlinearSystem {
    const Mesh& mesh;
    const CoefficientSet& coeffs;
    const SparseMatrix* mass;            // null for plain elliptic solves
    double alpha;
    const std::vector<double>* mass_rhs; // precomputed M rhs, null without mass
    AssemblyOptions asm_opts;
    std::vector<double> inv_weights;     // inverse lumped weights for the residual norm

    // G(u) = M u - M rhs + alpha R(u)
    std::vector<double> residual(const DiscreteField& u) const {
        std::vector<double> g = assemble_residual(mesh, coeffs, u, asm_opts);
        for (double& v : g) v *= alpha;
        if (mass) {
            std::vector<double> mu = mass->multiply(u.values);
            for (std::size_t i = 0; i < g.size(); ++i) g[i] += mu[i] - (*mass_rhs)[i];
        }
        return g;
    }

    double weighted_norm(const std::vector<double>& g) const {
        double s = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) s += g[i] * g[i] * inv_weights[i];
        return std::sqrt(s);
    }
};

std::vector<double> lumped_weights(const Mesh& mesh, const CoefficientSet& coeffs,
                                   bool wentzell) {
    std::vector<double> w = assemble_mass(mesh, true).diagonal();
    if (wentzell) {
        const auto bm = assemble_boundary_mass(mesh, coeffs.beta, true).diagonal();
        for (std::size_t i = 0; i < w.size(); ++i) w[i] += bm[i];
    }
    return w;
}

} // namespace

std::vector<double> solve_linear_spd(const SparseMatrix& matrix, const std::vector<double>& rhs,
                                     double tol, int max_iter, int* iterations_out) {
    if (!(tol > 0.0)) throw InvalidParameter("solve_linear_spd: tol must be positive");
    const int n = matrix.size();
    std::vector<double> x(n, 0.0);
    const double bnorm = norm2(rhs);
    if (iterations_out) *iterations_out = 0;
    if (bnorm == 0.0) return x;

    std::vector<double> precond = matrix.diagonal();
    for (double& d : precond) d = d > 0.0 ? 1.0 / d : 1.0;

    std::vector<double> r = rhs;              // r = b - A*0
    std::vector<double> z(n), p(n), ap(n);
    for (int i = 0; i < n; ++i) z[i] = precond[i] * r[i];
    p = z;
    double rz = dot_vec(r, z);

    for (int it = 1; it <= max_iter; ++it) {
        matrix.multiply(p, ap);
        const double pap = dot_vec(p, ap);
        if (pap <= 0.0) {
            throw NonConvergence("solve_linear_spd: matrix is not positive definite",
                                 norm2(r), it);
        }
        const double alpha = rz / pap;
        for (int i = 0; i < n; ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        if (iterations_out) *iterations_out = it;
        if (norm2(r) <= tol * bnorm) return x;
        for (int i = 0; i < n; ++i) z[i] = precond[i] * r[i];
        const double rz_next = dot_vec(r, z);
        const double beta = rz_next / rz;
        rz = rz_next;
        for (int i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    throw NonConvergence("solve_linear_spd: conjugate gradients exhausted max_iter",
                         norm2(r), max_iter);
}

SparseMatrix problem_mass(const ResolventProblem& problem) {
    SparseMatrix m = assemble_mass(*problem.mesh, problem.mass_mode == MassMode::lumped);
    if (problem.wentzell) {
        m = m.axpy(1.0, assemble_boundary_mass(*problem.mesh, problem.coeffs.beta,
                                               problem.mass_mode == MassMode::lumped));
    }
    return m;
}

double m_norm(const SparseMatrix& mass, const std::vector<double>& v) {
    return std::sqrt(dot_vec(v, mass.multiply(v)));
}

double max_abs_norm(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::fmax(m, std::fabs(x));
    return m;
}

double weighted_lq_norm(const std::vector<double>& weights, const std::vector<double>& v,
                        double q) {
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) s += weights[i] * std::pow(std::fabs(v[i]), q);
    return std::pow(s, 1.0 / q);
}

namespace {

// Full nonlinear driver. Kept out of the stub above; this is the real one.
std::pair<DiscreteField, SolveReport> drive_nonlinear(const NonlinearSystem& sys,
                                                      DiscreteField u,
                                                      const SolverOptions& opts) {
    SolveReport report;
    const int n = sys.mesh.num_vertices();
    const int max_linear = opts.max_linear > 0 ? opts.max_linear : 10 * n + 200;
    const bool newton_allowed = !sys.coeffs.has_gradient_lower_order();

    auto combined_matrix = [&](const SparseMatrix& op) {
        // sigma M + alpha Op
        if (!sys.mass) {
            SparseMatrix scaled(n);
            return scaled.axpy(sys.alpha, op);
        }
        return sys.mass->axpy(sys.alpha, op);
    };

    std::vector<double> g = sys.residual(u);
    double gnorm = sys.weighted_norm(g);
    bool newton_phase = newton_allowed;
    report.strategy = newton_phase ? "newton" : "lagged";

    // Lagged-path state.
    double theta = opts.theta0;
    int lagged_iters = 0;
    std::vector<double> loads;   // assembled once on first lagged iteration
    bool loads_ready = false;

    while (gnorm > opts.tol) {
        if (!std::isfinite(gnorm)) {
            throw EvaluationError("nonlinear solve produced a non-finite residual", 0, 0);
        }

        if (newton_phase) {
            if (report.iterations >= opts.max_newton) {
                newton_phase = false;
                if (report.strategy == "newton") report.strategy = "newton+lagged";
                continue;
            }
            const SparseMatrix tangent = assemble_tangent(sys.mesh, sys.coeffs, u, sys.asm_opts);
            const SparseMatrix T = combined_matrix(tangent);

            std::vector<double> neg_g = g;
            for (double& v : neg_g) v = -v;
            std::vector<double> delta;
            int cg_iters = 0;
            bool linear_ok = true;
            try {
                delta = solve_linear_spd(T, neg_g, opts.linear_tol, max_linear, &cg_iters);
            } catch (const NonConvergence&) {
                linear_ok = false;
            }
            report.linear_iterations += cg_iters;
            ++report.iterations;

            bool accepted = false;
            if (linear_ok) {
                double lambda = 1.0;
                for (int halving = 0; halving <= opts.max_halvings; ++halving) {
                    DiscreteField trial = u;
                    for (int i = 0; i < n; ++i) trial.values[i] = u.values[i] + lambda * delta[i];
                    std::vector<double> g_trial;
                    double trial_norm = std::numeric_limits<double>::infinity();
                    try {
                        g_trial = sys.residual(trial);
                        trial_norm = sys.weighted_norm(g_trial);
                    } catch (const EvaluationError&) {
                        // treat as rejected step
                    }
                    if (trial_norm <= (1.0 - opts.armijo_slope * lambda) * gnorm) {
                        u = std::move(trial);
                        g = std::move(g_trial);
                        gnorm = trial_norm;
                        report.damping_history.push_back(lambda);
                        report.residual_history.push_back(trial_norm);
                        accepted = true;
                        break;
                    }
                    lambda *= 0.5;
                }
            }
            if (!accepted) {
                newton_phase = false;
                if (report.strategy == "newton") report.strategy = "newton+lagged";
            }
            continue;
        }

        // Lagged (Kacanov/Picard) fallback.
        if (lagged_iters >= opts.max_lagged) {
            throw NonConvergence("solve_resolvent: both Newton and lagged iterations stalled",
                                 gnorm, report.iterations + lagged_iters);
        }
        if (!loads_ready) {
            loads = assemble_loads(sys.mesh, sys.coeffs, sys.asm_opts);
            loads_ready = true;
        }
        const LaggedOperator lag = assemble_lagged_operator(sys.mesh, sys.coeffs, u, sys.asm_opts);
        const SparseMatrix A = combined_matrix(lag.matrix);
        std::vector<double> rhs(n, 0.0);
        if (sys.mass) rhs = *sys.mass_rhs;
        for (int i = 0; i < n; ++i) rhs[i] += sys.alpha * (loads[i] - lag.constant[i]);

        int cg_iters = 0;
        std::vector<double> tilde = solve_linear_spd(A, rhs, opts.linear_tol, max_linear,
                                                     &cg_iters);
        report.linear_iterations += cg_iters;
        ++lagged_iters;

        bool accepted = false;
        while (theta >= 1e-3) {
            DiscreteField trial = u;
            for (int i = 0; i < n; ++i) {
                trial.values[i] = (1.0 - theta) * u.values[i] + theta * tilde[i];
            }
            std::vector<double> g_trial;
            double trial_norm = std::numeric_limits<double>::infinity();
            try {
                g_trial = sys.residual(trial);
                trial_norm = sys.weighted_norm(g_trial);
            } catch (const EvaluationError&) {
            }
            if (trial_norm < gnorm) {
                u = std::move(trial);
                g = std::move(g_trial);
                gnorm = trial_norm;
                report.damping_history.push_back(theta);
                report.residual_history.push_back(trial_norm);
                theta = std::fmin(1.0, theta * 1.2);
                accepted = true;
                break;
            }
            theta *= 0.5;
        }
        if (!accepted) {
            throw NonConvergence("solve_resolvent: lagged iteration cannot reduce the residual",
                                 gnorm, report.iterations + lagged_iters);
        }
    }

    report.final_residual = gnorm;
    report.converged = true;
    return {std::move(u), report};
}

} // namespace

std::pair<DiscreteField, SolveReport> solve_resolvent(const ResolventProblem& problem,
                                                      const SolverOptions& opts) {
    if (!(problem.alpha >= 0.0)) {
        throw InvalidParameter("solve_resolvent: alpha must be nonnegative");
    }
    if (problem.rhs.mesh.get() != problem.mesh.get()) {
        throw InvalidParameter("solve_resolvent: rhs lives on a different mesh");
    }

    if (problem.alpha == 0.0) {
        // M u = M rhs has the exact solution u = rhs.
        SolveReport report;
        report.converged = true;
        report.strategy = "projection";
        return {problem.rhs, report};
    }

    const SparseMatrix mass = problem_mass(problem);
    const std::vector<double> mass_rhs = mass.multiply(problem.rhs.values);

    AssemblyOptions asm_opts;
    asm_opts.lumped_zero_order = problem.mass_mode == MassMode::lumped;

    NonlinearSystem sys{*problem.mesh, problem.coeffs, &mass, problem.alpha,
                        &mass_rhs, asm_opts, {}};
    sys.inv_weights = lumped_weights(*problem.mesh, problem.coeffs, problem.wentzell);
    for (double& w : sys.inv_weights) w = 1.0 / w;

    DiscreteField u = opts.initial_guess ? *opts.initial_guess : problem.rhs;
    return drive_nonlinear(sys, std::move(u), opts);
}

std::pair<DiscreteField, SolveReport> solve_elliptic(std::shared_ptr<const Mesh> mesh,
                                                     const CoefficientSet& coeffs,
                                                     MassMode mass_mode,
                                                     const SolverOptions& opts) {
    AssemblyOptions asm_opts;
    asm_opts.lumped_zero_order = mass_mode == MassMode::lumped;

    NonlinearSystem sys{*mesh, coeffs, nullptr, 1.0, nullptr, asm_opts, {}};
    sys.inv_weights = lumped_weights(*mesh, coeffs, false);
    for (double& w : sys.inv_weights) w = 1.0 / w;

    DiscreteField u = opts.initial_guess ? *opts.initial_guess : DiscreteField::zero(mesh);
    return drive_nonlinear(sys, std::move(u), opts);
}

double contraction_ratio(const ResolventProblem& problem1, const ResolventProblem& problem2,
                         double q, const SolverOptions& opts) {
    if (problem1.mesh.get() != problem2.mesh.get() || problem1.alpha != problem2.alpha ||
        problem1.mass_mode != problem2.mass_mode || problem1.wentzell != problem2.wentzell) {
        throw InvalidParameter(
            "contraction_ratio: problems must share mesh, alpha, mass mode and boundary mode");
    }
    if (!(q >= 1.0)) throw InvalidParameter("contraction_ratio: q must be >= 1 or infinity");

    const auto [u1, rep1] = solve_resolvent(problem1, opts);
    const auto [u2, rep2] = solve_resolvent(problem2, opts);

    const int n = problem1.mesh->num_vertices();
    std::vector<double> du(n), df(n);
    for (int i = 0; i < n; ++i) {
        du[i] = u1.values[i] - u2.values[i];
        df[i] = problem1.rhs.values[i] - problem2.rhs.values[i];
    }

    double num, den;
    if (std::isinf(q)) {
        num = max_abs_norm(du);
        den = max_abs_norm(df);
    } else if (q == 2.0) {
        const SparseMatrix mass = problem_mass(problem1);
        num = m_norm(mass, du);
        den = m_norm(mass, df);
    } else {
        std::vector<double> w = assemble_mass(*problem1.mesh, true).diagonal();
        if (problem1.wentzell) {
            const auto bm =
                assemble_boundary_mass(*problem1.mesh, problem1.coeffs.beta, true).diagonal();
            for (int i = 0; i < n; ++i) w[i] += bm[i];
        }
        num = weighted_lq_norm(w, du, q);
        den = weighted_lq_norm(w, df, q);
    }
    if (den == 0.0) {
        throw UndefinedRatio("contraction_ratio: the two right-hand sides coincide");
    }
    return num / den;
}

} // namespace plfem
